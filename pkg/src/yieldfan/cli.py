"""Command-line front end.

Subcommands: ingest, mle, gibbs, summarize, extrapolate, diagnose, simulate.
All outputs are CSV plus a run_manifest.json recording the resolved config
hash, effective seed, and library versions; identical inputs and seed
reproduce outputs byte for byte.

Exit codes: 0 success; 1 diagnostics rejected the chain; 2 missing or
malformed input; 3 sampler stall.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import math
import os
import platform
import sys

import numpy as np

from . import __version__
from .affine import DecompositionKind, DerivedParams
from .baselines import SwConfig, ns_evaluate, ns_fit, sw_fit
from .config import RunConfig, config_digest, default_toml, load_config
from .curves import MaturityPair, ZeroCurvePanel, export_panel, ingest_panel, select_pair
from .diagnostics import (
    diagnose_chain,
    write_acf_csv,
    write_cusum_csv,
    write_diagnostics_csv,
)
from .errors import SamplerStallError, YieldFanError
from .gibbs import Chain, run_chain
from .mle import DERIVED_ORDER, delta_method, fit_cmle
from .simulate import SimSpec, simulate_panel
from .summary import (
    default_anchor_date,
    density,
    fan,
    posterior_summary_rows,
    scatter_export,
    write_density_csv,
    write_fan_csv,
    write_point_curve_csv,
    write_scatter_csv,
    write_summary_csv,
)

EXIT_OK = 0
EXIT_DIAGNOSE_REJECT = 1
EXIT_INPUT = 2
EXIT_STALL = 3

_DENSITY_PARAMS = (
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


def _add_common(p: argparse.ArgumentParser, chain_input: bool = False):
    p.add_argument("--config", help="TOML config file; defaults apply without it")
    p.add_argument("--out", default=".", help="output directory (created if needed)")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument("--data", help="override the panel CSV path")
    p.add_argument(
        "--pair",
        help="maturity pair 'tau1,tau2' in years, e.g. 5,20",
    )
    p.add_argument(
        "--decomposition",
        choices=["noise", "corr"],
        help="covariance decomposition kind",
    )
    percent = p.add_mutually_exclusive_group()
    percent.add_argument(
        "--rates-in-percent",
        dest="rates_in_percent",
        action="store_true",
        default=None,
        help="panel rates are quoted in percent (default)",
    )
    percent.add_argument(
        "--rates-in-decimals",
        dest="rates_in_percent",
        action="store_false",
        help="panel rates are already decimals",
    )
    if chain_input:
        p.add_argument("--chain", required=True, help="chain CSV from a gibbs run")


def build_parser() -> argparse.ArgumentParser:
    epilog = (
        "Config keys and their default values:\n\n" + default_toml()
    )
    parser = argparse.ArgumentParser(
        prog="yieldfan",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "ingest": "validate a panel CSV and write the normalized decimal form",
        "mle": "conditional maximum likelihood fit with delta-method errors",
        "gibbs": "run the constrained Gibbs sampler and summarize the chain",
        "summarize": "posterior summary table from an existing chain CSV",
        "extrapolate": "uncertainty fan plus Nelson-Siegel / Smith-Wilson curves",
        "diagnose": "CUSUM / Geweke / autocorrelation diagnostics on a chain",
        "simulate": "generate a synthetic two-maturity panel",
    }
    parsers = {}
    for name, help_text in specs.items():
        sp = sub.add_parser(
            name,
            help=help_text,
            epilog=epilog,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        _add_common(sp, chain_input=name in ("summarize", "extrapolate", "diagnose"))
        parsers[name] = sp
    parsers["diagnose"].add_argument(
        "--max-lag", type=int, default=100, help="autocorrelation lags to export"
    )
    return parser


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    data = cfg.data
    gibbs_section = cfg.gibbs
    sim = cfg.simulate
    if args.data is not None:
        data = dataclasses.replace(data, path=args.data)
    if args.pair is not None:
        try:
            t1, t2 = (float(x) for x in args.pair.split(","))
        except ValueError:
            raise YieldFanError(
                f"--pair must be 'tau1,tau2', got '{args.pair}'"
            ) from None
        data = dataclasses.replace(data, pair=(t1, t2))
    if args.decomposition is not None:
        data = dataclasses.replace(data, decomposition=args.decomposition)
    if args.rates_in_percent is not None:
        data = dataclasses.replace(data, rates_in_percent=args.rates_in_percent)
    if args.seed is not None:
        gibbs_section = dataclasses.replace(gibbs_section, seed=args.seed)
        sim = dataclasses.replace(sim, seed=args.seed)
    return dataclasses.replace(cfg, data=data, gibbs=gibbs_section, simulate=sim)


def _write_manifest(cfg: RunConfig, seed: int, out_dir: str, command: str) -> None:
    manifest = {
        "command": command,
        "config_sha256": config_digest(cfg),
        "seed": seed,
        "versions": {
            "yieldfan": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_panel(cfg: RunConfig) -> ZeroCurvePanel:
    if not cfg.data.path:
        raise YieldFanError("no panel path: set [data] path or pass --data")
    return ingest_panel(cfg.data.path, cfg.data.column_map())


def _pair_matrix(cfg: RunConfig, panel: ZeroCurvePanel):
    pair = cfg.data.maturity_pair()
    sub = select_pair(panel, pair)
    return pair, sub.rates, sub.h


def cmd_ingest(args) -> int:
    cfg = _resolve(args)
    panel = _load_panel(cfg)
    os.makedirs(args.out, exist_ok=True)
    export_panel(panel, os.path.join(args.out, "normalized_panel.csv"))
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "ingest")
    print(
        f"ingested {panel.n_dates} dates x {len(panel.maturities)} maturities, "
        f"h = {panel.h:.6f} years"
    )
    return EXIT_OK


def cmd_mle(args) -> int:
    cfg = _resolve(args)
    panel = _load_panel(cfg)
    pair, Z, h = _pair_matrix(cfg, panel)
    fit = fit_cmle(Z, h)
    fit = delta_method(fit, pair, cfg.data.kind())
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "mle_summary.csv")
    extra = "eta" if cfg.data.kind() is DecompositionKind.NOISE else "rho"
    with open(path, "w", newline="") as fh:
        fh.write("parameter,estimate,std_error\n")
        if fit.derived is None:
            raise YieldFanError("derived parameters unavailable (boundary fit)")
        for name in list(DERIVED_ORDER) + [extra]:
            value = fit.derived.extra if name == extra else getattr(fit.derived, name)
            se = fit.derived_se.get(name, math.nan)
            fh.write(f"{name},{value!r},{se!r}\n")
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "mle")
    print(
        f"cMLE converged in {fit.n_iterations} iterations, "
        f"fixed-point residual {fit.fp_residual:.3e}, loglik {fit.loglik:.3f}"
    )
    return EXIT_OK


def _run_gibbs(cfg: RunConfig):
    panel = _load_panel(cfg)
    pair, Z, h = _pair_matrix(cfg, panel)
    gc = cfg.gibbs.gibbs_config(pair, cfg.data.kind())
    chain = run_chain(Z, h, cfg.priors.priors(), gc)
    return panel, chain


def cmd_gibbs(args) -> int:
    cfg = _resolve(args)
    panel, chain = _run_gibbs(cfg)
    os.makedirs(args.out, exist_ok=True)
    chain.to_csv(os.path.join(args.out, "chain.csv"))
    rows = posterior_summary_rows(chain, cfg.gibbs.theta_trim_fraction)
    write_summary_csv(rows, os.path.join(args.out, "posterior_summary.csv"))
    for name in _DENSITY_PARAMS:
        edges, values = density(chain.parameter(name), cfg.gibbs.density_bins)
        write_density_csv(
            edges, values, os.path.join(args.out, f"density_{name}.csv")
        )
    trim = int(cfg.gibbs.theta_trim_fraction * len(chain))
    if trim:
        edges, values = density(
            chain.parameter("theta"), cfg.gibbs.density_bins, trim_lowest=trim
        )
        write_density_csv(
            edges, values, os.path.join(args.out, "density_theta_trimmed.csv")
        )
    kq = chain.parameter("kappa_q")
    low, high = scatter_export(chain, "kappa_q", "theta", float(np.median(kq)))
    write_scatter_csv(
        low,
        high,
        "kappa_q",
        "theta",
        float(np.median(kq)),
        os.path.join(args.out, "scatter_kappa_q_theta.csv"),
    )
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "gibbs")
    acc = chain.counters
    print(
        f"stored {len(chain)} draws; acceptance: "
        + ", ".join(
            f"{k} {v['accepted']}/{v['proposed']}" for k, v in acc.items()
        )
    )
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = _resolve(args)
    chain = Chain.from_csv(args.chain)
    if args.decomposition is not None:
        chain.kind = args.decomposition
    os.makedirs(args.out, exist_ok=True)
    rows = posterior_summary_rows(chain, cfg.gibbs.theta_trim_fraction)
    write_summary_csv(rows, os.path.join(args.out, "posterior_summary.csv"))
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "summarize")
    print(f"summarized {len(chain)} draws from {args.chain}")
    return EXIT_OK


def cmd_extrapolate(args) -> int:
    cfg = _resolve(args)
    panel = _load_panel(cfg)
    chain = Chain.from_csv(args.chain)
    pair = cfg.data.maturity_pair()
    tau = pair.tau2
    if cfg.extrapolation.anchor_date:
        anchor_date = dt.date.fromisoformat(cfg.extrapolation.anchor_date)
    else:
        anchor_date = default_anchor_date(panel.dates)
    anchor = panel.snapshot(anchor_date)

    s_grid = np.arange(cfg.baselines.llp + 1.0, cfg.extrapolation.s_max + 1.0)
    curve_fan = fan(chain, anchor, tau, s_grid)

    liquid = [
        (t, z)
        for t, z in zip(anchor.maturities, anchor.rates)
        if t <= cfg.baselines.llp + 1e-12
    ]
    mats = np.array([t for t, _ in liquid])
    rates = np.array([z for _, z in liquid])
    ns = ns_fit(mats, rates)
    sw_cfg = SwConfig(
        ufr=cfg.baselines.ufr,
        llp=cfg.baselines.llp,
        convergence_maturity=cfg.baselines.convergence_maturity,
        tolerance_bp=cfg.baselines.tolerance_bp,
        instantaneous_forward=cfg.baselines.instantaneous_forward,
    )
    sw = sw_fit(mats, rates, sw_cfg)

    os.makedirs(args.out, exist_ok=True)
    write_fan_csv(curve_fan, os.path.join(args.out, "fan.csv"))
    write_point_curve_csv(
        s_grid, ns_evaluate(ns, s_grid), os.path.join(args.out, "ns.csv")
    )
    write_point_curve_csv(
        s_grid, sw.zero(s_grid), os.path.join(args.out, "sw.csv")
    )
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "extrapolate")
    print(
        f"fan over s in [{s_grid[0]:.0f}, {s_grid[-1]:.0f}] from {len(chain)} draws; "
        f"ns tau = {ns.tau_ns:.4f}, sw alpha = {sw.alpha:.6f}"
    )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = _resolve(args)
    chain = Chain.from_csv(args.chain)
    report = diagnose_chain(chain, args.max_lag)
    os.makedirs(args.out, exist_ok=True)
    write_diagnostics_csv(report, os.path.join(args.out, "diagnostics_summary.csv"))
    write_acf_csv(report, os.path.join(args.out, "acf.csv"))
    write_cusum_csv(chain, os.path.join(args.out, "cusum.csv"))
    _write_manifest(cfg, cfg.gibbs.seed, args.out, "diagnose")
    print(report.verdict())
    return EXIT_DIAGNOSE_REJECT if report.any_reject else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    sim = cfg.simulate
    pair = cfg.data.maturity_pair()
    kind = cfg.data.kind()
    extra = sim.eta if kind is DecompositionKind.NOISE else sim.rho
    derived = DerivedParams(
        kappa=sim.kappa,
        kappa_q=sim.kappa_q,
        mu=sim.mu,
        mu_q=sim.theta + sim.sigma2 / (2.0 * sim.kappa_q**2),
        theta=sim.theta,
        omega2=sim.sigma2 / (2.0 * sim.kappa_q),
        sigma2=sim.sigma2,
        lambda0=0.0,
        lambda1=0.0,
        eta=extra if kind is DecompositionKind.NOISE else None,
        rho=extra if kind is DecompositionKind.CORRELATION else None,
    )
    spec = SimSpec.from_derived(derived, pair, sim.n_obs, sim.h, sim.seed)
    panel = simulate_panel(spec, pair)
    os.makedirs(args.out, exist_ok=True)
    export_panel(panel, os.path.join(args.out, "simulated_panel.csv"))
    _write_manifest(cfg, sim.seed, args.out, "simulate")
    print(
        f"simulated {panel.n_dates} observations at pair "
        f"({pair.tau1:g}, {pair.tau2:g}), h = {sim.h:.6f}"
    )
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "mle": cmd_mle,
    "gibbs": cmd_gibbs,
    "summarize": cmd_summarize,
    "extrapolate": cmd_extrapolate,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SamplerStallError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STALL
    except YieldFanError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
