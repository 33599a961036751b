"""Affine one-factor term structure: loadings, cross-maturity extrapolation,
and the map between discrete two-maturity VAR parameters and the short-rate
model parameters under both probability measures.

Conventions: zero rates are continuously compounded decimals, maturities in
years. kappa/mu govern the short rate under the physical measure, kappa_q/
mu_q under the pricing measure; theta is the infinite-maturity zero rate and
omega2 = sigma2/(2*kappa_q) the stationary short-rate variance used in the
convexity terms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curves import MaturityPair
from .errors import DomainError, FeasibilityError, SolverError

_B_TAYLOR_CUT = 1e-4  # below this kappa_q*tau the series form of b is used
_KAPPA_TOL = 1e-12  # residual tolerance for the kappa_q root solve
_KAPPA_HI_MAX = 1024.0


class DecompositionKind(enum.Enum):
    """How the VAR innovation covariance is split into model and extra parts.

    NOISE: rank-one model covariance plus an equal measurement-noise variance
    eta on both diagonals. CORRELATION: model variances held exactly, off-
    diagonal damped by a correlation rho.
    """

    NOISE = "noise"
    CORRELATION = "corr"


@dataclass(frozen=True)
class VarParams:
    """Discrete VAR(1) parameters for a two-maturity panel.

    a: mean-reversion speed per year (0 < a, and a*h < 1 at the working h);
    m: long-run zero-rate means, componentwise >= 0;
    sigma: 2x2 symmetric positive-definite annualized innovation covariance.
    """

    a: float
    m: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float).reshape(2)
        s = np.asarray(self.sigma, dtype=float).reshape(2, 2)
        if not self.a > 0:
            raise DomainError(f"mean reversion a must be positive, got {self.a}")
        if np.any(m < 0):
            raise DomainError(f"long-run means must be non-negative, got {m}")
        if abs(s[0, 1] - s[1, 0]) > 1e-12 * max(1.0, abs(s[0, 1])):
            raise DomainError("innovation covariance must be symmetric")
        if s[0, 0] <= 0 or s[1, 1] <= 0 or np.linalg.det(s) <= 0:
            raise DomainError("innovation covariance must be positive definite")
        s = 0.5 * (s + s.T)
        m.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", s)


@dataclass(frozen=True)
class DerivedParams:
    """Short-rate model parameters implied by a VarParams draw.

    Exactly one of eta (noise variance) / rho (innovation correlation) is set,
    matching the decomposition kind used to derive them.
    """

    kappa: float
    kappa_q: float
    mu: float
    mu_q: float
    theta: float
    omega2: float
    sigma2: float
    lambda0: float
    lambda1: float
    eta: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if (self.eta is None) == (self.rho is None):
            raise DomainError("exactly one of eta / rho must be set")

    @property
    def kind(self) -> DecompositionKind:
        return DecompositionKind.NOISE if self.eta is not None else DecompositionKind.CORRELATION

    @property
    def extra(self) -> float:
        return self.eta if self.eta is not None else self.rho


def loading_b(kappa_q, tau):
    """Zero-rate loading b(tau) = (1 - e^(-kappa_q*tau)) / (kappa_q*tau).

    Accepts scalars or arrays in tau; kappa_q >= 0 (b = 1 at kappa_q = 0);
    decreasing in tau for kappa_q > 0. Uses a 4-term series for
    kappa_q*tau < 1e-4 to avoid cancellation.
    """
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr <= 0):
        raise DomainError(f"tau must be positive, got {tau}")
    if kappa_q < 0:
        raise DomainError(f"kappa_q must be non-negative, got {kappa_q}")
    x = kappa_q * tau_arr
    series = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.where(x > 0, -np.expm1(-x) / np.where(x > 0, x, 1.0), 1.0)
    out = np.where(x < _B_TAYLOR_CUT, series, exact)
    return float(out) if np.isscalar(tau) else out


def _b_scalar(kappa_q: float, tau: float) -> float:
    # hot-path version of loading_b for the samplers; no validation
    x = kappa_q * tau
    if x < _B_TAYLOR_CUT:
        return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
    return -math.expm1(-x) / x


def ultimate_zero_rate(kappa_q: float, mu_q: float, sigma2: float) -> float:
    """Infinite-maturity zero rate theta = mu_q - sigma2 / (2*kappa_q^2)."""
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    if sigma2 < 0:
        raise DomainError(f"sigma2 must be non-negative, got {sigma2}")
    return mu_q - sigma2 / (2.0 * kappa_q * kappa_q)


def stationary_variance(kappa_q: float, sigma2: float) -> float:
    """Stationary short-rate variance omega2 = sigma2 / (2*kappa_q)."""
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    if sigma2 < 0:
        raise DomainError(f"sigma2 must be non-negative, got {sigma2}")
    return sigma2 / (2.0 * kappa_q)


def zero_rate_from_short(r, tau, kappa_q: float, mu_q: float, sigma2: float):
    """Zero rate of maturity tau given the current short rate r.

    z(tau) = b(tau)*(r - theta) + theta + 0.5*tau*omega2*b(tau)^2.
    """
    theta = ultimate_zero_rate(kappa_q, mu_q, sigma2)
    omega2 = stationary_variance(kappa_q, sigma2)
    b = loading_b(kappa_q, tau)
    return b * (r - theta) + theta + 0.5 * np.asarray(tau, dtype=float) * omega2 * b * b


def extrapolate_zero(z_tau, tau: float, s, kappa_q: float, theta: float, omega2: float):
    """Extend an observed zero rate z(tau) out to maturity s >= tau.

    z(s) = (b(s)/b(tau)) * (z(tau) - theta) + theta
           + 0.5*omega2*b(s)*(s*b(s) - tau*b(tau)).
    Affine in z(tau); returns z(tau) exactly at s = tau.
    """
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    if omega2 < 0:
        raise DomainError(f"omega2 must be non-negative, got {omega2}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < tau):
        raise DomainError(f"target maturity s must be >= tau = {tau}")
    b_tau = loading_b(kappa_q, tau)
    b_s = loading_b(kappa_q, s_arr if not np.isscalar(s) else float(s))
    out = (
        (b_s / b_tau) * (z_tau - theta)
        + theta
        + 0.5 * omega2 * b_s * (s_arr * b_s - tau * b_tau)
    )
    out = np.where(s_arr == tau, z_tau, out)
    return float(out) if np.isscalar(s) and np.isscalar(z_tau) else out


def convergence_ratio(kappa_q: float, tau: float, s: float) -> float:
    """Slope b(s)/b(tau) of the extrapolation in the observed rate; in (0, 1]."""
    if s < tau:
        raise DomainError(f"s must be >= tau, got s={s}, tau={tau}")
    if kappa_q == 0:
        return 1.0
    return loading_b(kappa_q, s) / loading_b(kappa_q, tau)


def forward_loading(kappa_q: float, tau: float, horizon: float) -> float:
    """Weight of the observed zero rate z(tau) in the one-year forward rate
    starting `horizon` years ahead:

        tau * e^(-kappa_q*horizon) * (1 - e^(-kappa_q)) / (1 - e^(-kappa_q*tau)).

    Decays like e^(-kappa_q*horizon); equals 1 at kappa_q = 0.
    """
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if horizon < 0:
        raise DomainError(f"horizon must be non-negative, got {horizon}")
    if kappa_q < 0:
        raise DomainError(f"kappa_q must be non-negative, got {kappa_q}")
    if kappa_q == 0:
        return 1.0
    return (
        tau
        * math.exp(-kappa_q * horizon)
        * (-math.expm1(-kappa_q))
        / (-math.expm1(-kappa_q * tau))
    )


def measure_change(
    kappa: float, mu: float, kappa_q: float, mu_q: float, sigma: float
) -> tuple[float, float]:
    """Market price of risk lambda(r) = lambda0 + lambda1 * r linking the
    physical (kappa, mu) and pricing (kappa_q, mu_q) dynamics:

        lambda1 = (kappa_q - kappa) / sigma
        lambda0 = (mu*kappa - mu_q*kappa_q) / sigma.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    lambda1 = (kappa_q - kappa) / sigma
    lambda0 = (mu * kappa - mu_q * kappa_q) / sigma
    return lambda0, lambda1


def model_covariance(
    kappa_q: float,
    sigma2: float,
    pair: MaturityPair,
    kind: DecompositionKind,
    extra: float,
) -> np.ndarray:
    """Annualized innovation covariance implied by the short-rate model.

    NOISE (extra = eta >= 0):  sigma2 * b_i b_j  +  eta * I
    CORRELATION (extra = rho in (0, 1]): diagonals sigma2 * b_i^2,
    off-diagonal rho * sigma2 * b1 * b2.
    """
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    b1 = loading_b(kappa_q, pair.tau1)
    b2 = loading_b(kappa_q, pair.tau2)
    if kind is DecompositionKind.NOISE:
        eta = extra
        if eta < 0:
            raise DomainError(f"eta must be non-negative, got {eta}")
        return sigma2 * np.array(
            [[b1 * b1, b1 * b2], [b1 * b2, b2 * b2]]
        ) + eta * np.eye(2)
    rho = extra
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must be in (0, 1], got {rho}")
    return sigma2 * np.array(
        [[b1 * b1, rho * b1 * b2], [rho * b1 * b2, b2 * b2]]
    )


def _check_feasible(sigma: np.ndarray) -> tuple[float, float, float]:
    s11, s21, s22 = float(sigma[0, 0]), float(sigma[1, 0]), float(sigma[1, 1])
    if s21 <= 0:
        raise FeasibilityError(
            f"off-diagonal covariance must be positive, got {s21}"
        )
    if s11 < s22:
        raise FeasibilityError(
            f"covariance implies negative mean reversion: "
            f"sigma11 = {s11} < sigma22 = {s22}"
        )
    return s11, s21, s22


def _kappa_equation_noise(pair: MaturityPair, rhs: float):
    t1, t2 = pair.tau1, pair.tau2
    sup = t2 / t1 - t1 / t2

    def f(k: float) -> float:
        if k == 0.0:
            return -rhs
        r = (-math.expm1(-k * t1)) * t2 / ((-math.expm1(-k * t2)) * t1)
        return r - 1.0 / r - rhs

    return f, sup - rhs


def _kappa_equation_corr(pair: MaturityPair, sigma: np.ndarray):
    t1, t2 = pair.tau1, pair.tau2
    rhs = math.sqrt(sigma[0, 0] / sigma[1, 1]) * t1 / t2
    sup = 1.0

    def f(k: float) -> float:
        if k == 0.0:
            return t1 / t2 - rhs
        return (-math.expm1(-k * t1)) / (-math.expm1(-k * t2)) - rhs

    return f, sup - rhs


def solve_kappa_q(
    sigma: np.ndarray, pair: MaturityPair, kind: DecompositionKind
) -> float:
    """Pricing-measure mean reversion implied by the covariance cross-section.

    Solves the decomposition-specific maturity-ratio equation by bracketed
    bisection with a secant polish; the equation is strictly increasing in
    kappa_q, which is verified on a coarse grid before solving. Returns 0.0
    when the data sit exactly at the kappa_q = 0 boundary.
    """
    sigma = np.asarray(sigma, dtype=float)
    s11, s21, s22 = _check_feasible(sigma)
    if kind is DecompositionKind.NOISE:
        f, gap_at_sup = _kappa_equation_noise(pair, (s11 - s22) / s21)
    else:
        f, gap_at_sup = _kappa_equation_corr(pair, sigma)

    f0 = f(0.0)
    if f0 == 0.0:
        return 0.0
    if f0 > 0.0:  # rhs below the kappa_q -> 0 limit; cannot happen for feasible input
        raise FeasibilityError("covariance ratio below the kappa_q = 0 limit")
    if gap_at_sup <= 0.0:
        raise SolverError(
            "covariance ratio at or beyond the large-kappa_q supremum; no finite root"
        )

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > _KAPPA_HI_MAX:
            raise SolverError(
                f"no sign change for kappa_q up to {_KAPPA_HI_MAX}"
            )

    grid = np.linspace(lo, hi, 17)
    vals = [f(g) for g in grid]
    if any(b < a - 1e-13 for a, b in zip(vals, vals[1:])):
        raise SolverError("maturity-ratio equation not monotone over the bracket")

    flo = f0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < _KAPPA_TOL:
            return mid
        if fm < 0.0:
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-16 * max(1.0, hi):
            break

    # secant polish from the bracket ends
    x0, x1 = lo, hi
    f_x0, f_x1 = flo, f(hi)
    for _ in range(8):
        if f_x1 == f_x0:
            break
        x2 = x1 - f_x1 * (x1 - x0) / (f_x1 - f_x0)
        if not (lo <= x2 <= hi):
            break
        x0, f_x0, x1, f_x1 = x1, f_x1, x2, f(x2)
        if abs(f_x1) < _KAPPA_TOL:
            return x1
    if abs(f_x1) < 1e-9:
        return x1
    raise SolverError(f"kappa_q solve stalled at residual {f_x1}")


def long_run_zero_means(
    mu: float, theta: float, omega2: float, kappa_q: float, pair: MaturityPair
) -> np.ndarray:
    """Long-run zero-rate means m implied by the short-rate model:

        m_i = b_i*mu + (1 - b_i)*theta + 0.5*omega2*tau_i*b_i^2.
    """
    out = np.empty(2)
    for i, tau in enumerate((pair.tau1, pair.tau2)):
        b = loading_b(kappa_q, tau)
        out[i] = b * mu + (1.0 - b) * theta + 0.5 * omega2 * tau * b * b
    return out


def theta_mu_from_means(
    m, kappa_q: float, sigma2: float, pair: MaturityPair
) -> tuple[float, float]:
    """Invert the long-run mean system for (theta, mu); needs kappa_q > 0
    so the two loadings differ."""
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    b1 = _b_scalar(kappa_q, pair.tau1)
    b2 = _b_scalar(kappa_q, pair.tau2)
    omega2 = sigma2 / (2.0 * kappa_q)
    c1 = 0.5 * omega2 * pair.tau1 * b1 * b1
    c2 = 0.5 * omega2 * pair.tau2 * b2 * b2
    g1 = float(m[0]) - c1
    g2 = float(m[1]) - c2
    det = b1 - b2
    theta = (b2 * g1 - b1 * g2) / (-det)
    mu = ((1.0 - b2) * g1 - (1.0 - b1) * g2) / det
    return theta, mu


def derive_params(
    v: VarParams, pair: MaturityPair, kind: DecompositionKind, h: float
) -> DerivedParams:
    """Map discrete VAR parameters to the short-rate model under both measures.

    kappa = -ln(1 - a*h)/h (exact discretization), kappa_q from the covariance
    cross-section, then sigma2, the extra parameter (eta or rho), theta, mu,
    mu_q, and the market price of risk.
    """
    if h <= 0:
        raise DomainError(f"h must be positive, got {h}")
    if v.a * h >= 1.0:
        raise DomainError(
            f"a*h = {v.a * h} >= 1: discrete mean reversion too fast for kappa"
        )
    kappa = -math.log1p(-v.a * h) / h
    kappa_q = solve_kappa_q(v.sigma, pair, kind)
    if kappa_q <= 0:
        raise FeasibilityError(
            "kappa_q = 0: long-run zero rate undefined at the boundary"
        )
    b1 = _b_scalar(kappa_q, pair.tau1)
    b2 = _b_scalar(kappa_q, pair.tau2)
    s11, s21, s22 = float(v.sigma[0, 0]), float(v.sigma[1, 0]), float(v.sigma[1, 1])
    if kind is DecompositionKind.NOISE:
        sigma2 = s21 / (b1 * b2)
        eta = 0.5 * ((s11 - sigma2 * b1 * b1) + (s22 - sigma2 * b2 * b2))
        if eta < 0:
            eta = 0.0 if eta > -1e-15 else eta
        if eta < 0:
            raise FeasibilityError(f"implied noise variance negative: {eta}")
        rho = None
    else:
        sigma2 = 0.5 * (s11 / (b1 * b1) + s22 / (b2 * b2))
        rho = s21 / math.sqrt(s11 * s22)
        eta = None
    omega2 = sigma2 / (2.0 * kappa_q)
    theta, mu = theta_mu_from_means(v.m, kappa_q, sigma2, pair)
    mu_q = theta + sigma2 / (2.0 * kappa_q * kappa_q)
    lambda0, lambda1 = measure_change(kappa, mu, kappa_q, mu_q, math.sqrt(sigma2))
    return DerivedParams(
        kappa=kappa,
        kappa_q=kappa_q,
        mu=mu,
        mu_q=mu_q,
        theta=theta,
        omega2=omega2,
        sigma2=sigma2,
        lambda0=lambda0,
        lambda1=lambda1,
        eta=eta,
        rho=rho,
    )


def short_zero_map(
    kappa: float,
    mu: float,
    kappa_q: float,
    mu_q: float,
    sigma_r: float,
    tau: float,
) -> tuple[float, float, float]:
    """Continuous-time dynamics of the zero rate z(tau) implied by the short
    rate: returns (a, m, sigma_z) with a = kappa, sigma_z = b(tau)*sigma_r,
    and m the long-run mean of z(tau)."""
    if sigma_r <= 0:
        raise DomainError(f"sigma_r must be positive, got {sigma_r}")
    sigma2 = sigma_r * sigma_r
    theta = ultimate_zero_rate(kappa_q, mu_q, sigma2)
    omega2 = stationary_variance(kappa_q, sigma2)
    b = loading_b(kappa_q, tau)
    m = theta + 0.5 * tau * omega2 * b * b - theta * b + mu * b
    return kappa, m, b * sigma_r
