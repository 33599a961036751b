"""Synthetic data generation and the Monte Carlo bond-price oracle.

The two-maturity panel simulator uses the discrete VAR(1) recursion
Z_t = Z_{t-h} - a*h*(Z_{t-h} - m) + sqrt(h)*sigma*e_t, whose innovation
covariance h*Sigma is exactly the covariance the decomposition equations
describe. The univariate short-rate simulator uses the exact
Ornstein-Uhlenbeck transition instead, so step size never biases it.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .affine import (
    DerivedParams,
    VarParams,
    long_run_zero_means,
    model_covariance,
)
from .curves import MaturityPair, ZeroCurvePanel
from .errors import DomainError

_START_DATE = dt.date(2000, 1, 31)
_MC_BLOCK = 2048  # paths simulated per vectorized block


@dataclass(frozen=True)
class SimSpec:
    """Inputs for the panel simulator.

    a, m, sigma: discrete VAR(1) parameters; sigma may be singular or zero
    (noiseless paths are legitimate fixtures).
    n_obs: number of rows to emit (n_obs - 1 transitions), >= 2.
    h: observation spacing in years.
    seed: RNG seed; equal seeds give identical panels.
    z0: starting rates; defaults to m.
    """

    a: float
    m: tuple[float, float]
    sigma: np.ndarray
    n_obs: int
    h: float
    seed: int
    z0: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_obs < 2:
            raise DomainError(f"n_obs must be >= 2, got {self.n_obs}")
        if self.h <= 0:
            raise DomainError(f"h must be positive, got {self.h}")
        if not 0.0 < self.a * self.h < 1.0:
            raise DomainError(
                f"need 0 < a*h < 1 for a stable recursion, got a*h = {self.a * self.h}"
            )
        s = np.asarray(self.sigma, dtype=float).reshape(2, 2)
        if abs(s[0, 1] - s[1, 0]) > 1e-12 * max(1.0, abs(s[0, 1])):
            raise DomainError("sigma must be symmetric")
        w = np.linalg.eigvalsh(s)
        if w[0] < -1e-12 * max(1.0, w[-1]):
            raise DomainError("sigma must be positive semi-definite")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def from_var_params(
        cls, v: VarParams, n_obs: int, h: float, seed: int, z0=None
    ) -> "SimSpec":
        return cls(v.a, (float(v.m[0]), float(v.m[1])), v.sigma, n_obs, h, seed, z0)

    @classmethod
    def from_derived(
        cls,
        d: DerivedParams,
        pair: MaturityPair,
        n_obs: int,
        h: float,
        seed: int,
        z0=None,
    ) -> "SimSpec":
        """Build the discrete parameters implied by short-rate model parameters."""
        a = -math.expm1(-d.kappa * h) / h
        m = long_run_zero_means(d.mu, d.theta, d.omega2, d.kappa_q, pair)
        if d.sigma2 > 0:
            sigma = model_covariance(d.kappa_q, d.sigma2, pair, d.kind, d.extra)
        else:
            sigma = np.zeros((2, 2))
        return cls(a, (float(m[0]), float(m[1])), sigma, n_obs, h, seed, z0)


def _psd_factor(sigma: np.ndarray) -> np.ndarray:
    if not sigma.any():
        return np.zeros((2, 2))
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(sigma)
        return v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


def simulate_rates(spec: SimSpec) -> np.ndarray:
    """Simulate the raw (n_obs x 2) rate matrix under the VAR(1) recursion."""
    rng = np.random.default_rng(spec.seed)
    chol = _psd_factor(spec.sigma) * math.sqrt(spec.h)
    m = np.array(spec.m)
    z = np.array(spec.z0 if spec.z0 is not None else spec.m, dtype=float)
    ah = spec.a * spec.h
    rates = np.empty((spec.n_obs, 2))
    rates[0] = z
    for t in range(1, spec.n_obs):
        z = z - ah * (z - m) + chol @ rng.standard_normal(2)
        rates[t] = z
    return rates


def simulate_panel(spec: SimSpec, pair: MaturityPair) -> ZeroCurvePanel:
    """Simulate a two-maturity panel under the discrete VAR(1) recursion."""
    rates = simulate_rates(spec)
    days = np.rint(np.arange(spec.n_obs) * spec.h * 365.25).astype(int)
    dates = tuple(_START_DATE + dt.timedelta(days=int(d)) for d in days)
    return ZeroCurvePanel(dates, (pair.tau1, pair.tau2), rates)


def ou_step_coefficients(kappa: float, sigma2: float, delta: float) -> tuple[float, float]:
    """Exact Ornstein-Uhlenbeck transition over a step of length delta:
    next = mean + coef*(current - mean) + sd*noise, with

        coef = e^(-kappa*delta),
        sd   = sqrt(sigma2 * (1 - e^(-2*kappa*delta)) / (2*kappa)),

    and the sd -> sqrt(sigma2*delta) limit at kappa = 0.
    """
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if kappa < 0:
        raise DomainError(f"kappa must be non-negative, got {kappa}")
    if sigma2 < 0:
        raise DomainError(f"sigma2 must be non-negative, got {sigma2}")
    coef = math.exp(-kappa * delta)
    if kappa == 0.0:
        var = sigma2 * delta
    else:
        var = sigma2 * (-math.expm1(-2.0 * kappa * delta)) / (2.0 * kappa)
    return coef, math.sqrt(var)


def mc_bond_yield(
    r0: float,
    tau: float,
    kappa_q: float,
    mu_q: float,
    sigma2: float,
    n_paths: int,
    steps_per_year: int = 52,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo zero-coupon yield: simulate the short rate under the
    pricing measure, average exp(-integral r dt) over paths (trapezoid rule),
    return (yield, standard error of the yield).

    Paths draw from per-path jumped RNG streams in fixed path order, so
    increasing n_paths leaves earlier paths unchanged.
    """
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if n_paths < 2:
        raise DomainError(f"n_paths must be >= 2, got {n_paths}")
    if steps_per_year < 12:
        raise DomainError(f"steps_per_year must be >= 12, got {steps_per_year}")
    n_steps_f = tau * steps_per_year
    n_steps = int(round(n_steps_f))
    if abs(n_steps_f - n_steps) > 1e-9:
        raise DomainError(
            f"tau = {tau} is not an integer number of steps at {steps_per_year}/year"
        )
    delta = 1.0 / steps_per_year
    coef, sd = ou_step_coefficients(kappa_q, sigma2, delta)

    if sigma2 == 0.0:
        # deterministic path; one trapezoid quadrature
        r = np.empty(n_steps + 1)
        r[0] = r0
        for t in range(1, n_steps + 1):
            r[t] = mu_q + coef * (r[t - 1] - mu_q)
        integral = delta * (np.sum(r) - 0.5 * (r[0] + r[-1]))
        return integral / tau, 0.0

    base = np.random.PCG64(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_paths:
        k = min(_MC_BLOCK, n_paths - done)
        shocks = np.empty((k, n_steps))
        for i in range(k):
            gen = np.random.Generator(base.jumped(done + i))
            shocks[i] = gen.standard_normal(n_steps)
        integral = np.full(k, 0.5 * delta * r0)
        r = np.full(k, r0)
        for t in range(n_steps):
            r = mu_q + coef * (r - mu_q) + sd * shocks[:, t]
            integral += delta * r
        integral -= 0.5 * delta * r
        disc = np.exp(-integral)
        total += float(np.sum(disc))
        total_sq += float(np.sum(disc * disc))
        done += k

    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0) * n_paths / (n_paths - 1)
    se_disc = math.sqrt(var / n_paths)
    y = -math.log(mean) / tau
    return y, se_disc / (tau * mean)


def analytic_mc_check(
    r0: float, tau: float, kappa_q: float, mu_q: float, sigma2: float
) -> float:
    """Closed-form yield the Monte Carlo should reproduce (for tests):
    tau*z = M - V/2 with M, V the mean and variance of the integrated
    short rate."""
    if kappa_q <= 0:
        raise DomainError(f"kappa_q must be positive, got {kappa_q}")
    e = -math.expm1(-kappa_q * tau)  # 1 - exp(-kappa_q*tau)
    m_int = (r0 - mu_q) * e / kappa_q + mu_q * tau
    v_int = (sigma2 / (kappa_q * kappa_q)) * (
        tau - e / kappa_q - e * e / (2.0 * kappa_q)
    )
    return (m_int - 0.5 * v_int) / tau


__all__ = [
    "SimSpec",
    "simulate_panel",
    "ou_step_coefficients",
    "mc_bond_yield",
    "analytic_mc_check",
]
