"""Constrained Gibbs sampler for the two-maturity VAR(1) under truncated
normal priors on (a, m) and a Wishart prior on the innovation precision.

Sweep order per iteration: m, a, Sigma. Each block draws from its
conditional posterior and re-draws the same block until the draw satisfies
the model constraints (long-run means non-negative, implied short-rate means
positive under both measures, covariance compatible with non-negative
pricing-measure mean reversion). Acceptance is tracked per constraint; a
window with no acceptances aborts with a stall report.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .affine import (
    DecompositionKind,
    VarParams,
    _b_scalar,
    derive_params,
    solve_kappa_q,
)
from .curves import MaturityPair
from .errors import (
    CurveDataError,
    DomainError,
    FeasibilityError,
    SamplerStallError,
    SolverError,
)

_STALL_WINDOW = 10_000
_EXP_BRANCH_DEFAULT = 0.5

CHAIN_COLUMNS = (
    "iter",
    "a",
    "m1",
    "m2",
    "s11",
    "s21",
    "s22",
    "kappa",
    "kappa_q",
    "mu",
    "mu_q",
    "theta",
    "lambda0",
    "lambda1",
    "sigma2",
    "eta_or_rho",
)

CONSTRAINTS = ("m_positivity", "a_positivity", "sigma_feasibility")


@dataclass(frozen=True)
class Priors:
    """Hyperparameters: a ~ TN(mu_a, tau_a^2) on [0, inf); m ~ TN2(mu_m, omega_m)
    on the positive orthant with diagonal omega_m; Sigma^-1 ~ Wishart with
    inverse-scale psi_sigma and nu_sigma >= 3 degrees of freedom."""

    mu_a: float = 0.0
    tau_a: float = 0.2
    mu_m: tuple[float, float] = (-0.923, -0.923)
    omega_m: tuple[float, float] = (0.04, 0.04)  # diagonal variances
    psi_sigma: np.ndarray = field(
        default_factory=lambda: np.array([[1e-4, 0.95e-4], [0.95e-4, 1e-4]])
    )
    nu_sigma: float = 3.0

    def __post_init__(self):
        if self.tau_a <= 0:
            raise DomainError(f"tau_a must be positive, got {self.tau_a}")
        if any(w <= 0 for w in self.omega_m):
            raise DomainError(f"omega_m variances must be positive, got {self.omega_m}")
        psi = np.asarray(self.psi_sigma, dtype=float).reshape(2, 2)
        if abs(psi[0, 1] - psi[1, 0]) > 1e-15 * max(1.0, abs(psi[0, 1])):
            raise DomainError("psi_sigma must be symmetric")
        if psi[0, 0] <= 0 or np.linalg.det(psi) <= 0:
            raise DomainError("psi_sigma must be positive definite")
        if self.nu_sigma < 3:
            raise DomainError(f"nu_sigma must be >= 3, got {self.nu_sigma}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi_sigma", psi)


@dataclass(frozen=True)
class GibbsConfig:
    """Run controls. Defaults match the production setup; tests shrink them."""

    iterations: int = 1_000_000
    burn_in: int = 1_000
    thinning: int = 100
    seed: int = 0
    pair: MaturityPair = field(default_factory=lambda: MaturityPair(5.0, 20.0))
    kind: DecompositionKind = DecompositionKind.NOISE
    trunc_threshold: float = _EXP_BRANCH_DEFAULT
    init_a: float = 1e-5
    init_sigma_sd: float = 1e-3
    init_sigma_corr: float = 0.95
    init_m_floor: float = 1e-4

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError("burn_in must be in [0, iterations)")
        if self.thinning < 1:
            raise DomainError("thinning must be >= 1")


@dataclass
class Chain:
    """Stored draws (post burn-in, thinned) with their derived parameters."""

    data: dict[str, np.ndarray]
    burn_in: int
    thinning: int
    seed: int
    kind: str
    pair: tuple[float, float] | None
    counters: dict[str, dict[str, int]]

    def __len__(self) -> int:
        return len(self.data["a"])

    def parameter(self, name: str) -> np.ndarray:
        if name not in self.data:
            raise KeyError(
                f"unknown chain parameter '{name}'; valid: {list(self.data)}"
            )
        return self.data[name]

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CHAIN_COLUMNS)
            cols = [self.data[c] for c in CHAIN_COLUMNS]
            for i in range(len(self)):
                row = [str(int(cols[0][i]))]
                row += [repr(float(c[i])) for c in cols[1:]]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path: str) -> "Chain":
        try:
            fh = open(path, newline="")
        except OSError as e:
            raise CurveDataError(f"cannot open chain file {path}: {e}") from e
        with fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CurveDataError(f"chain file {path} is empty") from None
            if tuple(h.strip() for h in header) != CHAIN_COLUMNS:
                raise CurveDataError(
                    f"chain file {path} header {header} does not match {CHAIN_COLUMNS}"
                )
            rows = []
            for i, row in enumerate(reader):
                if not row:
                    continue
                if len(row) != len(CHAIN_COLUMNS):
                    raise CurveDataError(
                        f"chain file {path} row {i + 2} has {len(row)} cells"
                    )
                try:
                    rows.append([float(x) for x in row])
                except ValueError:
                    raise CurveDataError(
                        f"chain file {path} row {i + 2} has a non-numeric cell"
                    ) from None
        if not rows:
            raise CurveDataError(f"chain file {path} has no draws")
        arr = np.array(rows)
        data = {c: arr[:, j].copy() for j, c in enumerate(CHAIN_COLUMNS)}
        return cls(
            data=data,
            burn_in=0,
            thinning=1,
            seed=-1,
            kind="unknown",
            pair=None,
            counters={},
        )


# ---------------------------------------------------------------------------
# samplers

def _phi_bar(alpha: float) -> float:
    # P(Z >= alpha) for a standard normal
    return 0.5 * math.erfc(alpha / math.sqrt(2.0))


def uses_exponential_branch(
    mu: float, sigma: float, lb: float, threshold: float = _EXP_BRANCH_DEFAULT
) -> bool:
    """Routing rule of sample_trunc_normal: the exponential rejection branch
    runs when the standardized bound (lb - mu)/sigma exceeds the threshold."""
    return (lb - mu) / sigma > threshold


def sample_trunc_normal(
    mu: float,
    sigma: float,
    lb: float,
    rng: np.random.Generator,
    size: int | None = None,
    threshold: float = _EXP_BRANCH_DEFAULT,
):
    """Exact draws from a normal truncated to [lb, inf).

    Near-untruncated regimes use accept-reject against the plain normal
    (worst-case acceptance ~0.31 at the threshold); deep truncation uses
    exponential rejection sampling with the optimal shifted-exponential rate
    lam = (alpha + sqrt(alpha^2 + 4))/2, which keeps acceptance above ~0.76
    however far out the bound sits.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    alpha = (lb - mu) / sigma
    if size is None:
        return mu + sigma * _draw_std_trunc_scalar(alpha, rng, threshold)
    n = int(size)
    out = np.empty(n)
    filled = 0
    if alpha <= threshold:
        accept = max(_phi_bar(alpha), 1e-3)
        while filled < n:
            k = int((n - filled) / accept * 1.1) + 64
            z = rng.standard_normal(k)
            z = z[z >= alpha]
            take = min(len(z), n - filled)
            out[filled : filled + take] = z[:take]
            filled += take
    else:
        lam = 0.5 * (alpha + math.sqrt(alpha * alpha + 4.0))
        while filled < n:
            k = int((n - filled) * 1.4) + 64
            z = alpha + rng.exponential(scale=1.0 / lam, size=k)
            u = rng.random(k)
            z = z[u <= np.exp(-0.5 * (z - lam) ** 2)]
            take = min(len(z), n - filled)
            out[filled : filled + take] = z[:take]
            filled += take
    return mu + sigma * out


def _draw_std_trunc_scalar(
    alpha: float, rng: np.random.Generator, threshold: float
) -> float:
    if alpha <= threshold:
        while True:
            z = rng.standard_normal()
            if z >= alpha:
                return z
    lam = 0.5 * (alpha + math.sqrt(alpha * alpha + 4.0))
    while True:
        z = alpha + rng.exponential() / lam
        d = z - lam
        if rng.random() <= math.exp(-0.5 * d * d):
            return z


def sample_trunc_normal_2d(
    mu,
    omega,
    rng: np.random.Generator,
    size: int | None = None,
    threshold: float = _EXP_BRANCH_DEFAULT,
    max_tries: int = 10_000_000,
):
    """Exact draws from a bivariate normal truncated to the positive orthant.

    Diagonal omega factorizes into two univariate truncated normals (robust
    to any mean); a full covariance falls back to orthant rejection, which is
    exact but assumes the orthant keeps non-negligible mass.
    """
    mu = np.asarray(mu, dtype=float).reshape(2)
    omega = np.asarray(omega, dtype=float).reshape(2, 2)
    if omega[0, 0] <= 0 or omega[1, 1] <= 0 or np.linalg.det(omega) <= 0:
        raise DomainError("omega must be positive definite")
    n = 1 if size is None else int(size)
    if omega[0, 1] == 0.0 and omega[1, 0] == 0.0:
        x = sample_trunc_normal(mu[0], math.sqrt(omega[0, 0]), 0.0, rng, n, threshold)
        y = sample_trunc_normal(mu[1], math.sqrt(omega[1, 1]), 0.0, rng, n, threshold)
        out = np.column_stack([x, y])
        return out[0] if size is None else out
    chol = np.linalg.cholesky(omega)
    out = np.empty((n, 2))
    filled = 0
    tried = 0
    while filled < n:
        k = min(max(4 * (n - filled), 64), 1 << 20)
        draws = mu + rng.standard_normal((k, 2)) @ chol.T
        good = draws[(draws[:, 0] >= 0.0) & (draws[:, 1] >= 0.0)]
        take = min(len(good), n - filled)
        out[filled : filled + take] = good[:take]
        filled += take
        tried += k
        if tried > max_tries and filled == 0:
            raise SolverError(
                "orthant rejection found no positive draws; orthant mass too small"
            )
    return out[0] if size is None else out


def sample_wishart(psi: np.ndarray, nu: float, rng: np.random.Generator) -> np.ndarray:
    """One 2x2 Wishart draw with scale psi (so E[draw] = nu * psi), via the
    Bartlett decomposition; nu may be non-integer but must be >= 2."""
    psi = np.asarray(psi, dtype=float)
    if nu < 2:
        raise DomainError(f"nu must be >= 2 for a 2x2 Wishart, got {nu}")
    chol = np.linalg.cholesky(psi)
    a11 = math.sqrt(rng.gamma(shape=0.5 * nu, scale=2.0))
    a22 = math.sqrt(rng.gamma(shape=0.5 * (nu - 1.0), scale=2.0))
    a21 = rng.standard_normal()
    b = chol @ np.array([[a11, 0.0], [a21, a22]])
    return b @ b.T


# ---------------------------------------------------------------------------
# conditional-posterior hyperparameters

def posterior_hyper_a(
    Z: np.ndarray, m, sigma, priors: Priors, h: float
) -> tuple[float, float]:
    """Conditional posterior of a given (m, Sigma) is normal (before
    truncation) with

        1/tau_ca^2 = h * tr(Sigma^-1 W'W) + 1/tau_a^2
        mu_ca      = tau_ca^2 * ( tr(Sigma^-1 dZ'W) + mu_a/tau_a^2 ),

    W = 1 m' - Z_lag. Returns (mu_ca, tau_ca) with tau_ca the standard
    deviation. Flat-prior limit reproduces the cMLE a-step.
    """
    Z = np.asarray(Z, dtype=float)
    m = np.asarray(m, dtype=float).reshape(2)
    sigma_inv = _inv2(np.asarray(sigma, dtype=float))
    if Z.shape[0] >= 2:
        dz = Z[1:] - Z[:-1]
        zlag = Z[:-1]
        w = m[None, :] - zlag
        tr_ww = float(np.trace(sigma_inv @ (w.T @ w)))
        tr_dzw = float(np.trace(sigma_inv @ (dz.T @ w)))
    else:
        tr_ww = 0.0
        tr_dzw = 0.0
    prec = h * tr_ww + 1.0 / (priors.tau_a * priors.tau_a)
    var = 1.0 / prec
    mu_ca = var * (tr_dzw + priors.mu_a / (priors.tau_a * priors.tau_a))
    return mu_ca, math.sqrt(var)


def posterior_hyper_m(
    Z: np.ndarray, a: float, sigma, priors: Priors, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """Conditional posterior of m given (a, Sigma) is bivariate normal
    (before truncation) with

        Omega_cm^-1 = Omega_m^-1 + a^2 * N * h * Sigma^-1
        mu_cm       = Omega_cm ( Omega_m^-1 mu_m + a Sigma^-1 X' 1 ),

    X = dZ + a*h*Z_lag. Returns (mu_cm, Omega_cm)."""
    Z = np.asarray(Z, dtype=float)
    sigma_inv = _inv2(np.asarray(sigma, dtype=float))
    omega_prior_inv = np.diag([1.0 / priors.omega_m[0], 1.0 / priors.omega_m[1]])
    mu_m = np.asarray(priors.mu_m, dtype=float)
    if Z.shape[0] >= 2:
        n = Z.shape[0] - 1
        dz = Z[1:] - Z[:-1]
        zlag = Z[:-1]
        x_sum = (dz + a * h * zlag).sum(axis=0)
    else:
        n = 0
        x_sum = np.zeros(2)
    prec = omega_prior_inv + (a * a * n * h) * sigma_inv
    cov = _inv2(prec)
    mean = cov @ (omega_prior_inv @ mu_m + a * (sigma_inv @ x_sum))
    return mean, cov


def posterior_hyper_sigma(
    Z: np.ndarray, a: float, m, priors: Priors, h: float
) -> tuple[np.ndarray, float]:
    """Conditional posterior of Sigma given (a, m): inverse-Wishart with

        Psi_c = Psi_sigma + E'E/h,   nu_c = nu_sigma + N,

    E = dZ - a*h*(1 m' - Z_lag). Returns (Psi_c, nu_c); a draw of Sigma is
    the inverse of a Wishart(Psi_c^-1, nu_c) draw."""
    Z = np.asarray(Z, dtype=float)
    m = np.asarray(m, dtype=float).reshape(2)
    if Z.shape[0] >= 2:
        n = Z.shape[0] - 1
        dz = Z[1:] - Z[:-1]
        zlag = Z[:-1]
        e = dz - a * h * (m[None, :] - zlag)
        psi_c = priors.psi_sigma + (e.T @ e) / h
    else:
        n = 0
        psi_c = priors.psi_sigma.copy()
    return psi_c, priors.nu_sigma + n


def _inv2(s: np.ndarray) -> np.ndarray:
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if det <= 0:
        raise DomainError("matrix is not positive definite")
    return np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det


# ---------------------------------------------------------------------------
# the sweep

class _SigmaCache:
    """Derived quantities of the current Sigma reused by the accept tests."""

    __slots__ = ("kappa_q", "b1", "b2", "sigma2", "omega2")

    def __init__(self, sigma, pair: MaturityPair, kind: DecompositionKind):
        self.kappa_q = solve_kappa_q(sigma, pair, kind)
        if self.kappa_q > 0:
            self.b1 = _b_scalar(self.kappa_q, pair.tau1)
            self.b2 = _b_scalar(self.kappa_q, pair.tau2)
            if kind is DecompositionKind.NOISE:
                self.sigma2 = float(sigma[1, 0]) / (self.b1 * self.b2)
            else:
                self.sigma2 = 0.5 * (
                    float(sigma[0, 0]) / (self.b1 * self.b1)
                    + float(sigma[1, 1]) / (self.b2 * self.b2)
                )
            self.omega2 = self.sigma2 / (2.0 * self.kappa_q)
        else:
            # kappa_q = 0 boundary (equal diagonals): loadings tend to 1
            self.b1 = self.b2 = 1.0
            if kind is DecompositionKind.NOISE:
                self.sigma2 = float(sigma[1, 0])
            else:
                self.sigma2 = 0.5 * (float(sigma[0, 0]) + float(sigma[1, 1]))
            self.omega2 = math.inf

    def short_rate_means(self, m, pair: MaturityPair) -> tuple[float, float]:
        # (mu, mu_q) implied by the zero-rate means m at this Sigma
        c1 = 0.5 * self.omega2 * pair.tau1 * self.b1 * self.b1
        c2 = 0.5 * self.omega2 * pair.tau2 * self.b2 * self.b2
        g1 = float(m[0]) - c1
        g2 = float(m[1]) - c2
        det = self.b1 - self.b2
        theta = (self.b1 * g2 - self.b2 * g1) / det
        mu = ((1.0 - self.b2) * g1 - (1.0 - self.b1) * g2) / det
        mu_q = theta + self.sigma2 / (2.0 * self.kappa_q * self.kappa_q)
        return mu, mu_q


class _ConstraintCounter:
    __slots__ = ("accepted", "proposed", "consecutive_rejects")

    def __init__(self):
        self.accepted = 0
        self.proposed = 0
        self.consecutive_rejects = 0

    def accept(self):
        self.proposed += 1
        self.accepted += 1
        self.consecutive_rejects = 0

    def reject(self, name: str, iteration: int, counters):
        self.proposed += 1
        self.consecutive_rejects += 1
        if self.consecutive_rejects >= _STALL_WINDOW:
            raise SamplerStallError(
                name,
                {
                    "window": _STALL_WINDOW,
                    "iteration": iteration,
                    "counters": {
                        k: {"accepted": c.accepted, "proposed": c.proposed}
                        for k, c in counters.items()
                    },
                },
            )


def _feasible(sigma: np.ndarray) -> bool:
    return sigma[1, 0] > 0.0 and sigma[0, 0] >= sigma[1, 1]


def _means_admissible(cache: _SigmaCache, m, pair: MaturityPair) -> bool:
    if cache.kappa_q > 0:
        mu, mu_q = cache.short_rate_means(m, pair)
        return mu > 0.0 and mu_q > 0.0
    if math.isnan(cache.sigma2):
        # Sigma carries no usable shape information; nothing to test
        return True
    # kappa_q -> 0 limit of the implied short-rate mean (mu_q diverges to
    # +inf there, so only the mu sign can bind)
    t1, t2 = pair.tau1, pair.tau2
    mu = (t2 * float(m[0]) - t1 * float(m[1])) / (t2 - t1)
    return mu - cache.sigma2 * t1 * t2 / 6.0 > 0.0


def _draw_m_block(mean, cov, m_current, rng, threshold) -> np.ndarray:
    # two coordinate-Gibbs sweeps of the orthant-truncated bivariate normal
    m = m_current.copy()
    c01 = cov[0, 1]
    sd0 = math.sqrt(cov[0, 0] - c01 * c01 / cov[1, 1])
    sd1 = math.sqrt(cov[1, 1] - c01 * c01 / cov[0, 0])
    for _ in range(2):
        cm0 = mean[0] + c01 / cov[1, 1] * (m[1] - mean[1])
        m[0] = sample_trunc_normal(cm0, sd0, 0.0, rng, None, threshold)
        cm1 = mean[1] + c01 / cov[0, 0] * (m[0] - mean[0])
        m[1] = sample_trunc_normal(cm1, sd1, 0.0, rng, None, threshold)
    return m


def run_chain(
    Z: np.ndarray,
    h: float,
    priors: Priors,
    config: GibbsConfig,
    initial_state: tuple | None = None,
) -> Chain:
    """Run the constrained Gibbs sampler and return the thinned chain.

    Z is the (rows x 2) rate panel for the configured maturity pair; rows - 1
    transitions enter the likelihood (a single row or empty array means the
    posteriors equal the priors). Identical inputs and seed give a
    bit-identical chain. initial_state, an (a, m, Sigma) triple, resumes the
    sweep from that point instead of the config's cold start.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or (Z.size and Z.shape[1] != 2):
        raise DomainError(f"Z must have two columns, got shape {Z.shape}")
    if h <= 0:
        raise DomainError(f"h must be positive, got {h}")
    pair = config.pair
    kind = config.kind
    rng = np.random.default_rng(config.seed)

    if initial_state is not None:
        a0, m0, sigma0 = initial_state
        a = float(a0)
        m = np.asarray(m0, dtype=float).reshape(2).copy()
        sigma = np.asarray(sigma0, dtype=float).reshape(2, 2).copy()
    else:
        a = config.init_a
        if Z.shape[0] >= 1:
            m = np.maximum(Z.mean(axis=0), config.init_m_floor)
        else:
            m = np.full(2, config.init_m_floor)
        sd2 = config.init_sigma_sd * config.init_sigma_sd
        sigma = np.array(
            [[sd2, config.init_sigma_corr * sd2], [config.init_sigma_corr * sd2, sd2]]
        )
    cache = _sigma_cache_or_boundary(sigma, pair, kind)

    counters = {name: _ConstraintCounter() for name in CONSTRAINTS}
    n_keep = (config.iterations - config.burn_in) // config.thinning
    stored = {c: np.empty(n_keep) for c in CHAIN_COLUMNS}
    kept = 0

    for it in range(1, config.iterations + 1):
        # m block
        mean_m, cov_m = posterior_hyper_m(Z, a, sigma, priors, h)
        ctr = counters["m_positivity"]
        while True:
            m_prop = _draw_m_block(mean_m, cov_m, m, rng, config.trunc_threshold)
            if _means_admissible(cache, m_prop, pair):
                ctr.accept()
                m = m_prop
                break
            ctr.reject("m_positivity", it, counters)

        # a block
        mu_ca, tau_ca = posterior_hyper_a(Z, m, sigma, priors, h)
        ctr = counters["a_positivity"]
        while True:
            a_prop = sample_trunc_normal(
                mu_ca, tau_ca, 0.0, rng, None, config.trunc_threshold
            )
            if a_prop > 0.0 and a_prop * h < 1.0:
                ctr.accept()
                a = a_prop
                break
            ctr.reject("a_positivity", it, counters)

        # Sigma block
        psi_c, nu_c = posterior_hyper_sigma(Z, a, m, priors, h)
        psi_c_inv = _inv2(psi_c)
        ctr = counters["sigma_feasibility"]
        while True:
            prec = sample_wishart(psi_c_inv, nu_c, rng)
            sigma_prop = _inv2(prec)
            if _feasible(sigma_prop):
                cache_prop = _sigma_cache_or_boundary(sigma_prop, pair, kind)
                if cache_prop.kappa_q > 0 and _means_admissible(cache_prop, m, pair):
                    ctr.accept()
                    sigma = sigma_prop
                    cache = cache_prop
                    break
            ctr.reject("sigma_feasibility", it, counters)

        if it > config.burn_in and (it - config.burn_in) % config.thinning == 0:
            v = VarParams(a=a, m=m.copy(), sigma=sigma.copy())
            d = derive_params(v, pair, kind, h)
            stored["iter"][kept] = it
            stored["a"][kept] = a
            stored["m1"][kept] = m[0]
            stored["m2"][kept] = m[1]
            stored["s11"][kept] = sigma[0, 0]
            stored["s21"][kept] = sigma[1, 0]
            stored["s22"][kept] = sigma[1, 1]
            stored["kappa"][kept] = d.kappa
            stored["kappa_q"][kept] = d.kappa_q
            stored["mu"][kept] = d.mu
            stored["mu_q"][kept] = d.mu_q
            stored["theta"][kept] = d.theta
            stored["lambda0"][kept] = d.lambda0
            stored["lambda1"][kept] = d.lambda1
            stored["sigma2"][kept] = d.sigma2
            stored["eta_or_rho"][kept] = d.extra
            kept += 1

    return Chain(
        data=stored,
        burn_in=config.burn_in,
        thinning=config.thinning,
        seed=config.seed,
        kind=kind.value,
        pair=(pair.tau1, pair.tau2),
        counters={
            k: {"accepted": c.accepted, "proposed": c.proposed}
            for k, c in counters.items()
        },
    )


def _sigma_cache_or_boundary(sigma, pair, kind) -> _SigmaCache:
    try:
        return _SigmaCache(sigma, pair, kind)
    except (FeasibilityError, SolverError):
        boundary = _SigmaCache.__new__(_SigmaCache)
        boundary.kappa_q = 0.0
        boundary.b1 = boundary.b2 = boundary.sigma2 = boundary.omega2 = math.nan
        return boundary
