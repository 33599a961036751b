"""Posterior summaries: moments, shortest 95% highest-density intervals,
equal-tail intervals, extrapolation fans, histogram densities, and scatter
splits of a stored chain.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np

from .curves import CurveSnapshot
from .errors import DegenerateDataError, DomainError
from .gibbs import Chain

_MIN_HPD_N = 100
HPD_LEVEL = 0.95

SUMMARY_COLUMNS = ("parameter", "mean", "hpd_lo", "hpd_hi", "ci_lo", "ci_hi", "sd")
FAN_COLUMNS = ("s", "mean", "hpd_lo", "hpd_hi", "ci_lo", "ci_hi")

# posterior summary rows, in reporting order; the last row label depends on
# the decomposition kind
SUMMARY_PARAMS = (
    "kappa",
    "kappa_q",
    "mu",
    "mu_q",
    "theta",
    "lambda0",
    "lambda1",
    "sigma2",
)


@dataclass(frozen=True)
class IntervalSummary:
    """Moments plus both 95% intervals for one scalar sample."""

    mean: float
    sd: float
    hpd: tuple[float, float]
    ci: tuple[float, float]


@dataclass(frozen=True)
class CurveFan:
    """Pointwise posterior summaries of extrapolated zero rates.

    s: target maturities; summaries: one IntervalSummary per maturity;
    anchor: the observed snapshot the fan is conditioned on; tau: the
    anchoring maturity; n_draws: chain draws used."""

    s: np.ndarray
    summaries: tuple[IntervalSummary, ...]
    anchor: CurveSnapshot
    tau: float
    n_draws: int


def hpd_interval(samples: np.ndarray, level: float = HPD_LEVEL) -> tuple[float, float]:
    """Shortest interval containing ceil(level * n) sorted sample points."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n < _MIN_HPD_N:
        raise DegenerateDataError(
            f"need at least {_MIN_HPD_N} samples for an HPD interval, got {n}"
        )
    k = int(np.ceil(level * n))
    widths = x[k - 1 :] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def summarize(samples: np.ndarray, level: float = HPD_LEVEL) -> IntervalSummary:
    """Sample mean/sd, shortest HPD, and equal-tail interval at `level`."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise DomainError(f"samples must be 1-d, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples contain non-finite values")
    lo_q = (1.0 - level) / 2.0
    ci = (float(np.quantile(x, lo_q)), float(np.quantile(x, 1.0 - lo_q)))
    return IntervalSummary(
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)) if len(x) > 1 else 0.0,
        hpd=hpd_interval(x, level),
        ci=ci,
    )


def trimmed_mean(samples: np.ndarray, trim_lowest: int) -> float:
    """Mean after dropping the `trim_lowest` smallest values (display aid for
    heavy lower tails)."""
    x = np.sort(np.asarray(samples, dtype=float))
    if not 0 <= trim_lowest < len(x):
        raise DomainError(
            f"trim_lowest must be in [0, {len(x)}), got {trim_lowest}"
        )
    return float(x[trim_lowest:].mean())


def fan(
    chain: Chain,
    anchor: CurveSnapshot,
    tau: float,
    s_grid: np.ndarray,
    level: float = HPD_LEVEL,
) -> CurveFan:
    """Extrapolate the anchored rate z(tau) under every stored draw and
    summarize pointwise.

    Each draw extends z(tau) with its own (kappa_q, theta, omega2); the fan
    collapses to z(tau) exactly where the grid touches tau, and its width is
    non-decreasing in s for positive kappa_q draws.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or len(s) == 0:
        raise DomainError("s_grid must be a non-empty 1-d array")
    if np.any(s < tau):
        raise DomainError(f"fan grid must satisfy s >= tau = {tau}")
    z_tau = anchor.rate(tau)
    kq = chain.parameter("kappa_q")
    theta = chain.parameter("theta")
    sigma2 = chain.parameter("sigma2")
    if np.any(kq <= 0):
        raise DomainError("fan needs strictly positive kappa_q draws")
    omega2 = sigma2 / (2.0 * kq)

    x_s = np.outer(kq, s)  # (draws, grid)
    b_s = -np.expm1(-x_s) / x_s
    x_t = kq * tau
    b_t = -np.expm1(-x_t) / x_t
    zmat = (
        (b_s / b_t[:, None]) * (z_tau - theta[:, None])
        + theta[:, None]
        + 0.5 * omega2[:, None] * b_s * (s[None, :] * b_s - (tau * b_t)[:, None])
    )
    zmat[:, s == tau] = z_tau

    summaries = tuple(summarize(zmat[:, j], level) for j in range(len(s)))
    return CurveFan(
        s=s.copy(), summaries=summaries, anchor=anchor, tau=tau, n_draws=len(kq)
    )


def density(
    samples: np.ndarray, grid, trim_lowest: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram density on an explicit grid.

    grid: bin edge array, or an int bin count spanning the (possibly trimmed)
    sample range. Returns (edges, values) with sum(values * diff(edges)) = 1.
    trim_lowest drops that many smallest samples first; display only.
    """
    x = np.asarray(samples, dtype=float)
    if trim_lowest:
        x = np.sort(x)[trim_lowest:]
        if len(x) == 0:
            raise DomainError("trimming removed every sample")
    if isinstance(grid, (int, np.integer)):
        if grid < 1:
            raise DomainError(f"bin count must be >= 1, got {grid}")
        edges = np.linspace(x.min(), x.max(), int(grid) + 1)
        if edges[0] == edges[-1]:
            edges = edges + np.linspace(-0.5, 0.5, int(grid) + 1)
    else:
        edges = np.asarray(grid, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("grid edges must be 1-d and strictly increasing")
    values, edges = np.histogram(x, bins=edges, density=True)
    return edges, values


def scatter_export(
    chain: Chain, x: str, y: str, split: float
) -> tuple[np.ndarray, np.ndarray]:
    """Split (x, y) draw pairs at a threshold on x.

    Returns (low, high): rows with x <= split and x > split; together they
    partition the chain exactly.
    """
    xs = chain.parameter(x)
    ys = chain.parameter(y)
    mask = xs <= split
    low = np.column_stack([xs[mask], ys[mask]])
    high = np.column_stack([xs[~mask], ys[~mask]])
    return low, high


# ---------------------------------------------------------------------------
# CSV writers

def posterior_summary_rows(
    chain: Chain, theta_trim_fraction: float = 0.01
) -> list[tuple[str, IntervalSummary]]:
    """Summaries for the derived-parameter rows in reporting order, the
    decomposition extra last; appends a `theta_trimmed` row whose mean drops
    the lowest tail (other columns repeated from the raw theta row)."""
    rows = []
    for name in SUMMARY_PARAMS:
        rows.append((name, summarize(chain.parameter(name))))
    extra_label = {"noise": "eta", "corr": "rho"}.get(chain.kind, "eta_or_rho")
    rows.append((extra_label, summarize(chain.parameter("eta_or_rho"))))
    if theta_trim_fraction > 0:
        raw = next(s for n, s in rows if n == "theta")
        trim = int(theta_trim_fraction * len(chain))
        tmean = trimmed_mean(chain.parameter("theta"), trim)
        rows.append(
            ("theta_trimmed", IntervalSummary(tmean, raw.sd, raw.hpd, raw.ci))
        )
    return rows


def write_summary_csv(
    rows: list[tuple[str, IntervalSummary]], path: str
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for name, s in rows:
            writer.writerow(
                [name]
                + [repr(float(v)) for v in (s.mean, s.hpd[0], s.hpd[1], s.ci[0], s.ci[1], s.sd)]
            )


def write_fan_csv(curve_fan: CurveFan, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FAN_COLUMNS)
        for s_val, summ in zip(curve_fan.s, curve_fan.summaries):
            writer.writerow(
                [repr(float(s_val))]
                + [
                    repr(float(v))
                    for v in (summ.mean, summ.hpd[0], summ.hpd[1], summ.ci[0], summ.ci[1])
                ]
            )


def write_point_curve_csv(s_grid: np.ndarray, values: np.ndarray, path: str) -> None:
    """Fan-schema CSV for a deterministic curve: every band collapses to the
    point value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FAN_COLUMNS)
        for s_val, z in zip(s_grid, values):
            writer.writerow([repr(float(s_val))] + [repr(float(z))] * 5)


def write_density_csv(edges: np.ndarray, values: np.ndarray, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bin_lo", "bin_hi", "density"))
        for lo, hi, v in zip(edges[:-1], edges[1:], values):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(v))])


def write_scatter_csv(low: np.ndarray, high: np.ndarray, x: str, y: str, split: float, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow((x, y, "side"))
        for row in low:
            writer.writerow([repr(float(row[0])), repr(float(row[1])), "le_split"])
        for row in high:
            writer.writerow([repr(float(row[0])), repr(float(row[1])), "gt_split"])


def default_anchor_date(dates: tuple[dt.date, ...]) -> dt.date:
    return dates[-1]
