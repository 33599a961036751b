"""Conditional maximum likelihood for the two-maturity VAR(1), with the
printed asymptotic covariance blocks and delta-method standard errors for
the derived short-rate parameters.

The three update steps are mutually dependent and are iterated to a fixed
point: given (m, Sigma) the score in a has the closed-form zero

    a = tr(Sigma^-1 dZ' W) / (h * tr(Sigma^-1 W' W)),   W = 1 m' - Z_lag,

given (a, Sigma) the mean is m = (dZ + a*h*Z_lag)' 1 / (a*h*N), and given
(a, m) the covariance is Sigma = E'E/(h*N) with E = dZ - a*h*W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .affine import DecompositionKind, DerivedParams, VarParams, derive_params
from .curves import MaturityPair
from .errors import DegenerateDataError, DomainError, SolverError

_FP_TOL = 1e-12
_FP_MAX_ITER = 500
_FD_REL_STEP = 1e-6

DERIVED_ORDER = (
    "kappa",
    "kappa_q",
    "mu",
    "mu_q",
    "theta",
    "lambda0",
    "lambda1",
    "sigma2",
)


@dataclass
class MleFit:
    """Conditional MLE output.

    params: the VAR(1) estimate; h: observation spacing used; n_transitions:
    rows - 1; loglik: conditional log likelihood at the optimum; fp_residual:
    |a - a_step(m(a), Sigma(a))| at termination. Covariance blocks follow the
    printed asymptotic forms (cross-blocks zero). derived / derived_se are
    filled by delta_method.
    """

    params: VarParams
    h: float
    n_transitions: int
    loglik: float
    fp_residual: float
    n_iterations: int
    var_a: float
    cov_m: np.ndarray
    cov_vech: np.ndarray
    derived: DerivedParams | None = None
    derived_se: dict[str, float] = field(default_factory=dict)
    boundary: bool = False


def _suffstats(Z: np.ndarray):
    dz = Z[1:] - Z[:-1]
    zlag = Z[:-1]
    return dz, zlag


def _inv2(s: np.ndarray) -> np.ndarray:
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if det <= 0:
        raise DegenerateDataError("covariance estimate is singular")
    return np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det


def _a_step(dz, zlag, m, sigma_inv, h) -> float:
    w = m[None, :] - zlag
    num = float(np.trace(sigma_inv @ (dz.T @ w)))
    den = h * float(np.trace(sigma_inv @ (w.T @ w)))
    if den <= 0:
        raise DegenerateDataError("no variation around the long-run mean")
    return num / den


def _m_step(dz, zlag, a, h) -> np.ndarray:
    n = dz.shape[0]
    x = dz + a * h * zlag
    return x.sum(axis=0) / (a * h * n)


def _sigma_step(dz, zlag, a, m, h) -> np.ndarray:
    n = dz.shape[0]
    e = dz - a * h * (m[None, :] - zlag)
    return (e.T @ e) / (h * n)


def conditional_loglik(Z: np.ndarray, a: float, m, sigma, h: float) -> float:
    """Gaussian log likelihood of the transitions, conditioning on row 0."""
    dz, zlag = _suffstats(np.asarray(Z, dtype=float))
    n = dz.shape[0]
    m = np.asarray(m, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    if det <= 0:
        raise DegenerateDataError("covariance is singular in the likelihood")
    e = dz - a * h * (m[None, :] - zlag)
    quad = float(np.trace(_inv2(sigma) @ (e.T @ e))) / h
    return -n * math.log(2.0 * math.pi) - n * math.log(h) - 0.5 * n * math.log(det) - 0.5 * quad


def fit_cmle(Z: np.ndarray, h: float) -> MleFit:
    """Iterate the three conditional-score steps to a joint fixed point.

    Starts from column means and the covariance-ignoring OLS slope; stops when
    the a-update moves less than 1e-12 or after 500 iterations (SolverError).
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != 2 or Z.shape[0] < 3:
        raise DomainError(f"Z must be (rows >= 3) x 2, got shape {Z.shape}")
    if h <= 0:
        raise DomainError(f"h must be positive, got {h}")
    dz, zlag = _suffstats(Z)
    n = dz.shape[0]
    if np.allclose(Z.std(axis=0), 0.0):
        raise DegenerateDataError("panel columns are constant")

    m = Z.mean(axis=0)
    w = m[None, :] - zlag
    den = h * float(np.trace(w.T @ w))
    if den <= 0:
        raise DegenerateDataError("no variation around the long-run mean")
    a = float(np.trace(dz.T @ w)) / den

    residual = math.inf
    for it in range(1, _FP_MAX_ITER + 1):
        if not a > 0:
            raise DegenerateDataError(
                f"mean-reversion step left the positive domain (a = {a}); "
                "data do not look mean-reverting"
            )
        m = _m_step(dz, zlag, a, h)
        sigma = _sigma_step(dz, zlag, a, m, h)
        det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
        if det <= 1e-30 * max(sigma[0, 0], sigma[1, 1]) ** 2:
            raise DegenerateDataError(
                "residual covariance is (near-)singular: data sit on the "
                "conditional mean, the Gaussian model is degenerate"
            )
        a_new = _a_step(dz, zlag, m, _inv2(sigma), h)
        residual = abs(a_new - a)
        a = a_new
        if residual < _FP_TOL:
            break
    else:
        raise SolverError(
            f"cMLE fixed point did not converge in {_FP_MAX_ITER} iterations "
            f"(last move {residual})"
        )

    m = _m_step(dz, zlag, a, h)
    sigma = _sigma_step(dz, zlag, a, m, h)
    try:
        params = VarParams(a=a, m=m, sigma=sigma)
    except DomainError as e:
        raise DegenerateDataError(
            f"estimate violates the model domain ({e}); the panel is too short "
            "or not mean-reverting around non-negative levels"
        ) from e
    fit = MleFit(
        params=params,
        h=h,
        n_transitions=n,
        loglik=conditional_loglik(Z, a, m, sigma, h),
        fp_residual=abs(a - _a_step(dz, zlag, m, _inv2(sigma), h)),
        n_iterations=it,
        var_a=0.0,
        cov_m=np.zeros((2, 2)),
        cov_vech=np.zeros((3, 3)),
    )
    fit.var_a, fit.cov_m, fit.cov_vech = asymptotic_cov(fit, Z, h)
    return fit


# duplication matrix machinery for vech(Sigma) = (s11, s21, s22)
_D2 = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ]
)
_D2_PLUS = np.linalg.solve(_D2.T @ _D2, _D2.T)


def asymptotic_cov(fit: MleFit, Z: np.ndarray, h: float):
    """Printed asymptotic covariance blocks at the estimate:

        var(a)       = { tr(Sigma^-1 h W'W) }^-1
        cov(m)       = { Sigma^-1 N a^2 h }^-1
        cov(vech S)  = 2 D2+ (Sigma x Sigma) D2+'

    Cross-parameter blocks are taken as zero.
    """
    Z = np.asarray(Z, dtype=float)
    dz, zlag = _suffstats(Z)
    n = dz.shape[0]
    v = fit.params
    sigma_inv = _inv2(v.sigma)
    w = v.m[None, :] - zlag
    tr = float(np.trace(sigma_inv @ (w.T @ w)))
    if tr <= 0:
        raise DegenerateDataError("no curvature in a: W'W is zero")
    var_a = 1.0 / (h * tr)
    cov_m = v.sigma / (n * v.a * v.a * h)
    cov_vech = 2.0 * _D2_PLUS @ np.kron(v.sigma, v.sigma) @ _D2_PLUS.T
    return var_a, cov_m, cov_vech


def _derived_vector(
    theta: np.ndarray, pair: MaturityPair, kind: DecompositionKind, h: float
) -> np.ndarray:
    v = VarParams(
        a=float(theta[0]),
        m=np.array([theta[1], theta[2]]),
        sigma=np.array(
            [[theta[3], theta[4]], [theta[4], theta[5]]]
        ),
    )
    d = derive_params(v, pair, kind, h)
    out = [getattr(d, name) for name in DERIVED_ORDER]
    out.append(d.extra)
    return np.array(out)


def delta_method(
    fit: MleFit, pair: MaturityPair, kind: DecompositionKind
) -> MleFit:
    """Fill fit.derived and fit.derived_se.

    The Jacobian of the derived-parameter map is taken by central finite
    differences with step 1e-6 * max(|component|, 1); the parameter covariance
    is block diagonal in (a, m, vech Sigma). When the covariance sits at the
    kappa_q = 0 boundary the standard errors are unavailable and the fit is
    flagged instead.
    """
    v = fit.params
    theta = np.array(
        [v.a, v.m[0], v.m[1], v.sigma[0, 0], v.sigma[1, 0], v.sigma[1, 1]]
    )
    try:
        base = _derived_vector(theta, pair, kind, fit.h)
    except Exception:
        fit.boundary = True
        fit.derived = None
        fit.derived_se = {}
        return fit
    fit.derived = derive_params(v, pair, kind, fit.h)

    jac = np.empty((len(base), 6))
    try:
        for j in range(6):
            step = _FD_REL_STEP * max(abs(theta[j]), 1.0)
            up = theta.copy()
            dn = theta.copy()
            up[j] += step
            dn[j] -= step
            jac[:, j] = (_derived_vector(up, pair, kind, fit.h)
                         - _derived_vector(dn, pair, kind, fit.h)) / (2.0 * step)
    except Exception:
        fit.boundary = True
        fit.derived_se = {}
        return fit

    cov = np.zeros((6, 6))
    cov[0, 0] = fit.var_a
    cov[1:3, 1:3] = fit.cov_m
    cov[3:, 3:] = fit.cov_vech
    var = np.einsum("ij,jk,ik->i", jac, cov, jac)
    names = list(DERIVED_ORDER) + ["eta" if kind is DecompositionKind.NOISE else "rho"]
    fit.derived_se = {
        name: math.sqrt(max(v, 0.0)) for name, v in zip(names, var)
    }
    fit.boundary = False
    return fit
