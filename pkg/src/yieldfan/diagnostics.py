"""Chain convergence diagnostics: standardized CUSUM paths, Geweke
split-sample Z scores with batch-means numerical standard errors, and the
biased-normalization autocorrelation function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DomainError
from .gibbs import Chain

GEWEKE_FRACTIONS = (0.1, 0.5)
GEWEKE_CRITICAL = 1.96
DEFAULT_MAX_LAG = 100
DIAGNOSED_PARAMS = ("a", "m1", "m2", "s11", "s21", "s22")
_CUSUM_EXPORT_CAP = 10_000


@dataclass(frozen=True)
class ParamDiagnostics:
    name: str
    geweke_z: float
    geweke_reject: bool
    cusum_abs_mean: float
    cusum_abs_var: float
    acf: np.ndarray  # lags 1..max_lag


@dataclass(frozen=True)
class DiagnosticsReport:
    params: tuple[ParamDiagnostics, ...]
    max_lag: int

    @property
    def any_reject(self) -> bool:
        return any(p.geweke_reject for p in self.params)

    def verdict(self) -> str:
        flagged = [p.name for p in self.params if p.geweke_reject]
        if flagged:
            return f"REJECT: Geweke flags {', '.join(flagged)}"
        return "PASS: no Geweke rejection at |Z| > 1.96"


def cusum(samples: np.ndarray) -> np.ndarray:
    """Standardized cumulative-mean path

        CS_t = ( mean(x_1..x_t) - mean(x) ) / sd(x),   t = 1..n,

    with the population sd (divisor n). Ends at exactly 0; invariant to
    affine rescaling of the samples.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise DomainError("cusum needs a 1-d sample of length >= 2")
    # ptp, not sd: the sd of a constant sample can round to a nonzero tiny
    if np.ptp(x) == 0.0:
        raise DegenerateDataError("cusum undefined for a constant sample")
    sd = float(x.std())
    t = np.arange(1, len(x) + 1, dtype=float)
    return (np.cumsum(x) / t - x.mean()) / sd


def _batch_means_nse(x: np.ndarray) -> float:
    n = len(x)
    n_batches = int(math.isqrt(n))
    if n_batches < 2:
        raise DomainError("segment too short for batch means")
    size = n // n_batches
    used = x[: n_batches * size].reshape(n_batches, size)
    means = used.mean(axis=1)
    return float(means.std(ddof=1)) / math.sqrt(n_batches)


def geweke_z(
    samples: np.ndarray, fractions: tuple[float, float] = GEWEKE_FRACTIONS
) -> float:
    """Split-sample mean-equality Z score: first fractions[0] of the chain
    against the last fractions[1], each mean's numerical standard error from
    batch means with floor(sqrt(segment length)) batches."""
    x = np.asarray(samples, dtype=float)
    fa, fb = fractions
    if not (0 < fa and 0 < fb and fa + fb <= 1):
        raise DomainError(f"invalid fractions {fractions}")
    n = len(x)
    na = int(fa * n)
    nb = int(fb * n)
    if na < 16 or nb < 16:
        raise DomainError("geweke segments too short")
    a_seg = x[:na]
    b_seg = x[n - nb :]
    if np.ptp(a_seg) == 0.0 and np.ptp(b_seg) == 0.0:
        raise DegenerateDataError("geweke undefined: zero variance in both segments")
    nse_a = _batch_means_nse(a_seg)
    nse_b = _batch_means_nse(b_seg)
    denom = math.hypot(nse_a, nse_b)
    if denom == 0.0:
        raise DegenerateDataError("geweke undefined: zero variance in both segments")
    return (float(a_seg.mean()) - float(b_seg.mean())) / denom


def acf(samples: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelations r_1..r_max_lag with the biased (1/n) normalization,
    so every value lies in [-1, 1]."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if not 1 <= max_lag < n:
        raise DomainError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    xc = x - x.mean()
    c0 = float(xc @ xc) / n
    if c0 == 0.0:
        raise DegenerateDataError("acf undefined for a constant sample")
    out = np.empty(max_lag)
    for k in range(1, max_lag + 1):
        out[k - 1] = float(xc[:-k] @ xc[k:]) / n / c0
    return out


def diagnose_chain(chain: Chain, max_lag: int = DEFAULT_MAX_LAG) -> DiagnosticsReport:
    """Run all three diagnostics on the raw VAR parameter columns."""
    params = []
    for name in DIAGNOSED_PARAMS:
        x = chain.parameter(name)
        z = geweke_z(x)
        cs = cusum(x)
        abs_cs = np.abs(cs)
        params.append(
            ParamDiagnostics(
                name=name,
                geweke_z=z,
                geweke_reject=abs(z) > GEWEKE_CRITICAL,
                cusum_abs_mean=float(abs_cs.mean()),
                cusum_abs_var=float(abs_cs.var()),
                acf=acf(x, min(max_lag, len(x) - 1)),
            )
        )
    return DiagnosticsReport(params=tuple(params), max_lag=max_lag)


def write_diagnostics_csv(report: DiagnosticsReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ("parameter", "geweke_z", "geweke_reject", "cusum_abs_mean", "cusum_abs_var")
        )
        for p in report.params:
            writer.writerow(
                [
                    p.name,
                    repr(float(p.geweke_z)),
                    str(int(p.geweke_reject)),
                    repr(float(p.cusum_abs_mean)),
                    repr(float(p.cusum_abs_var)),
                ]
            )


def write_acf_csv(report: DiagnosticsReport, path: str) -> None:
    n_lags = min(len(p.acf) for p in report.params)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("lag",) + tuple(p.name for p in report.params))
        for k in range(n_lags):
            writer.writerow(
                [str(k + 1)] + [repr(float(p.acf[k])) for p in report.params]
            )


def write_cusum_csv(chain: Chain, path: str) -> None:
    """CUSUM trajectories for every diagnosed parameter, decimated to at most
    10,000 rows."""
    n = len(chain)
    paths = {name: cusum(chain.parameter(name)) for name in DIAGNOSED_PARAMS}
    step = max(1, math.ceil(n / _CUSUM_EXPORT_CAP))
    idx = np.arange(0, n, step)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t",) + DIAGNOSED_PARAMS)
        for i in idx:
            writer.writerow(
                [str(int(i + 1))]
                + [repr(float(paths[name][i])) for name in DIAGNOSED_PARAMS]
            )
