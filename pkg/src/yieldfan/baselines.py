"""Deterministic extrapolation baselines.

Nelson-Siegel: three-factor parametric curve fitted by profiling the decay
parameter over a log grid with an exact inner linear least-squares, then a
golden-section refinement.

Smith-Wilson: exact-repricing kernel extrapolation toward an ultimate
forward rate (ufr), with the convergence speed alpha chosen as the smallest
value whose one-year forward rate at the convergence maturity is within
tolerance of the ufr. Prices are continuously compounded throughout:
P(t) = exp(-z(t) * t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverError

_NS_GRID_LO = 0.1
_NS_GRID_HI = 30.0
_NS_GRID_N = 200
_NS_GOLDEN_TOL = 1e-9
_ALPHA_LO = 1e-4
_ALPHA_HI = 1.0
_ALPHA_BISECT_TOL = 1e-10
_INST_FWD_STEP = 1e-5


# ---------------------------------------------------------------------------
# Nelson-Siegel

@dataclass(frozen=True)
class NsParams:
    """Fitted Nelson-Siegel parameters.

    z(t) = beta0 + beta1 * g(t) + beta2 * (g(t) - e^(-t/tau_ns)),
    g(t) = (1 - e^(-t/tau_ns)) / (t/tau_ns). beta0 is the long-maturity
    asymptote. resid_norm records the fit quality.
    """

    beta0: float
    beta1: float
    beta2: float
    tau_ns: float
    resid_norm: float


def _ns_design(t: np.ndarray, tau_ns: float) -> np.ndarray:
    x = t / tau_ns
    g = -np.expm1(-x) / x
    return np.column_stack([np.ones_like(t), g, g - np.exp(-x)])


def ns_evaluate(params: NsParams, t) -> np.ndarray:
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 0):
        raise DomainError("maturities must be positive")
    out = _ns_design(t_arr, params.tau_ns) @ np.array(
        [params.beta0, params.beta1, params.beta2]
    )
    return float(out[0]) if np.isscalar(t) else out


def _ns_profile_sse(t: np.ndarray, z: np.ndarray, tau_ns: float):
    design = _ns_design(t, tau_ns)
    beta, *_ = np.linalg.lstsq(design, z, rcond=None)
    resid = z - design @ beta
    return float(resid @ resid), beta


def ns_fit(maturities, rates) -> NsParams:
    """Profile tau_ns over a 200-point log grid on [0.1, 30], solve the inner
    linear problem exactly at each node, then refine the best node by
    golden-section search."""
    t = np.asarray(maturities, dtype=float)
    z = np.asarray(rates, dtype=float)
    if t.ndim != 1 or t.shape != z.shape or len(t) < 4:
        raise DomainError("need at least 4 (maturity, rate) points to fit")
    if np.any(t <= 0):
        raise DomainError("maturities must be positive")
    if np.any(np.diff(np.sort(t)) == 0):
        raise DomainError("maturities must be distinct")

    grid = np.geomspace(_NS_GRID_LO, _NS_GRID_HI, _NS_GRID_N)
    sses = np.array([_ns_profile_sse(t, z, g)[0] for g in grid])
    i = int(np.argmin(sses))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]

    # golden-section on the profiled objective
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _ns_profile_sse(t, z, c)[0]
    fd = _ns_profile_sse(t, z, d)[0]
    while b - a > _NS_GOLDEN_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _ns_profile_sse(t, z, c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _ns_profile_sse(t, z, d)[0]
    tau_best = 0.5 * (a + b)
    candidates = [(sses[i], grid[i]), (_ns_profile_sse(t, z, tau_best)[0], tau_best)]
    sse_best, tau_best = min(candidates)
    sse_best, beta = _ns_profile_sse(t, z, tau_best)
    return NsParams(
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        beta2=float(beta[2]),
        tau_ns=float(tau_best),
        resid_norm=math.sqrt(sse_best),
    )


def ns_objective(maturities, rates, beta0, beta1, beta2, tau_ns) -> float:
    """Sum of squared rate errors for arbitrary parameters (probe surface)."""
    t = np.asarray(maturities, dtype=float)
    z = np.asarray(rates, dtype=float)
    resid = z - _ns_design(t, tau_ns) @ np.array([beta0, beta1, beta2])
    return float(resid @ resid)


# ---------------------------------------------------------------------------
# Smith-Wilson

@dataclass(frozen=True)
class SwConfig:
    """ufr: ultimate forward rate (decimal, continuous compounding);
    llp: last liquid point in years (input maturities beyond it are ignored);
    convergence_maturity: where the forward must have converged;
    tolerance_bp: allowed forward gap at the convergence maturity, in basis
    points; instantaneous_forward switches the criterion from the one-year
    forward to the instantaneous forward."""

    ufr: float = 0.042
    llp: float = 20.0
    convergence_maturity: float = 60.0
    tolerance_bp: float = 3.0
    instantaneous_forward: bool = False

    def __post_init__(self):
        if self.llp <= 0:
            raise DomainError(f"llp must be positive, got {self.llp}")
        if self.convergence_maturity <= self.llp:
            raise DomainError("convergence maturity must exceed the llp")
        if self.tolerance_bp <= 0:
            raise DomainError("tolerance must be positive")


@dataclass(frozen=True)
class SwCurve:
    """Fitted Smith-Wilson curve: input maturities u, kernel weights zeta,
    the chosen alpha, and the config used."""

    u: np.ndarray
    zeta: np.ndarray
    alpha: float
    config: SwConfig
    repricing_error: float = field(default=0.0)

    def price(self, t) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < 0):
            raise DomainError("maturities must be non-negative")
        w = _wilson(t_arr, self.u, self.alpha, self.config.ufr)
        out = np.exp(-self.config.ufr * t_arr) + w @ self.zeta
        return float(out[0]) if np.isscalar(t) else out

    def zero(self, t) -> np.ndarray:
        """Zero rate -ln P(t)/t; errors out if the price went non-positive."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr <= 0):
            raise DomainError("zero rates need positive maturities")
        p = np.atleast_1d(self.price(t_arr))
        if np.any(p <= 0):
            bad = float(t_arr[np.argmax(p <= 0)])
            raise SolverError(
                f"extrapolation breakdown: non-positive price at t = {bad}"
            )
        out = -np.log(p) / t_arr
        return float(out[0]) if np.isscalar(t) else out

    def forward_1y(self, t: float) -> float:
        p1, p2 = self.price(np.array([t, t + 1.0]))
        if p1 <= 0 or p2 <= 0:
            raise SolverError(f"extrapolation breakdown near t = {t}")
        return math.log(p1 / p2)

    def forward_inst(self, t: float) -> float:
        lo, hi = t - _INST_FWD_STEP, t + _INST_FWD_STEP
        p1, p2 = self.price(np.array([lo, hi]))
        if p1 <= 0 or p2 <= 0:
            raise SolverError(f"extrapolation breakdown near t = {t}")
        return math.log(p1 / p2) / (hi - lo)


def _wilson(t: np.ndarray, u: np.ndarray, alpha: float, ufr: float) -> np.ndarray:
    """Symmetric Wilson kernel matrix W[i, j] = W(t_i, u_j)."""
    tt = t[:, None]
    uu = u[None, :]
    lo = np.minimum(tt, uu)
    hi = np.maximum(tt, uu)
    return np.exp(-ufr * (tt + uu)) * (
        alpha * lo - np.exp(-alpha * hi) * np.sinh(alpha * lo)
    )


def _solve_sw(u: np.ndarray, p: np.ndarray, alpha: float, ufr: float):
    w = _wilson(u, u, alpha, ufr)
    rhs = p - np.exp(-ufr * u)
    try:
        zeta = np.linalg.solve(w, rhs)
        # one refinement pass keeps repricing at machine precision
        zeta += np.linalg.solve(w, rhs - w @ zeta)
    except np.linalg.LinAlgError:
        raise SolverError(
            f"Wilson kernel system is singular at alpha = {alpha}"
        ) from None
    return zeta, float(np.max(np.abs(w @ zeta - rhs)))


def sw_fit(maturities, rates, config: SwConfig = SwConfig()) -> SwCurve:
    """Fit the kernel weights by exact repricing of the input curve up to the
    llp, choosing the smallest alpha in [1e-4, 1] whose forward rate at the
    convergence maturity is within tolerance of the ufr (bisection on the
    gap criterion)."""
    t = np.asarray(maturities, dtype=float)
    z = np.asarray(rates, dtype=float)
    if t.ndim != 1 or t.shape != z.shape or len(t) < 2:
        raise DomainError("need at least 2 (maturity, rate) points")
    if np.any(t <= 0):
        raise DomainError("maturities must be positive")
    keep = t <= config.llp + 1e-12
    if keep.sum() < 2:
        raise DomainError(f"need at least 2 maturities at or below the llp {config.llp}")
    u = t[keep]
    order = np.argsort(u)
    u = u[order]
    if np.any(np.diff(u) == 0):
        raise DomainError("maturities must be distinct")
    p = np.exp(-z[keep][order] * u)
    tol = config.tolerance_bp * 1e-4

    def gap(alpha: float) -> float:
        zeta, _ = _solve_sw(u, p, alpha, config.ufr)
        curve = SwCurve(u=u, zeta=zeta, alpha=alpha, config=config)
        if config.instantaneous_forward:
            f = curve.forward_inst(config.convergence_maturity)
        else:
            f = curve.forward_1y(config.convergence_maturity)
        return abs(f - config.ufr) - tol

    g_lo = gap(_ALPHA_LO)
    if g_lo <= 0.0:
        alpha = _ALPHA_LO
    else:
        g_hi = gap(_ALPHA_HI)
        if g_hi > 0.0:
            raise SolverError(
                "no alpha in [1e-4, 1] meets the convergence tolerance: "
                f"gap {g_lo:.3e} at 1e-4, {g_hi:.3e} at 1"
            )
        lo, hi = _ALPHA_LO, _ALPHA_HI
        while hi - lo > _ALPHA_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if gap(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
        alpha = hi

    zeta, reprice = _solve_sw(u, p, alpha, config.ufr)
    return SwCurve(u=u, zeta=zeta, alpha=alpha, config=config, repricing_error=reprice)
