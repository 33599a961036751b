"""TOML run configuration: defaults, loading, flag overrides, and hashing.

Every key has a default; unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib as tomli
except ModuleNotFoundError:  # python < 3.11
    import tomli

from .affine import DecompositionKind
from .curves import ColumnMap, MaturityPair
from .errors import CurveDataError, DomainError
from .gibbs import GibbsConfig, Priors


@dataclass(frozen=True)
class DataSection:
    path: str = ""
    rates_in_percent: bool = True
    date_column: str = "date"
    pair: tuple[float, float] = (5.0, 20.0)
    decomposition: str = "noise"

    def maturity_pair(self) -> MaturityPair:
        return MaturityPair(self.pair[0], self.pair[1])

    def kind(self) -> DecompositionKind:
        try:
            return DecompositionKind(self.decomposition)
        except ValueError:
            raise DomainError(
                f"decomposition must be 'noise' or 'corr', got '{self.decomposition}'"
            ) from None

    def column_map(self) -> ColumnMap:
        return ColumnMap(
            date_column=self.date_column, rates_in_percent=self.rates_in_percent
        )


@dataclass(frozen=True)
class PriorSection:
    mu_a: float = 0.0
    tau_a: float = 0.2
    mu_m: tuple[float, float] = (-0.923, -0.923)
    omega_m: tuple[float, float] = (0.04, 0.04)
    psi_sd: float = 0.01
    psi_corr: float = 0.95
    nu_sigma: float = 3.0

    def priors(self) -> Priors:
        v = self.psi_sd * self.psi_sd
        return Priors(
            mu_a=self.mu_a,
            tau_a=self.tau_a,
            mu_m=tuple(self.mu_m),
            omega_m=tuple(self.omega_m),
            psi_sigma=[[v, self.psi_corr * v], [self.psi_corr * v, v]],
            nu_sigma=self.nu_sigma,
        )


@dataclass(frozen=True)
class GibbsSection:
    iterations: int = 1_000_000
    burn_in: int = 1_000
    thinning: int = 100
    seed: int = 0
    trunc_threshold: float = 0.5
    init_a: float = 1e-5
    init_sigma_sd: float = 1e-3
    init_sigma_corr: float = 0.95
    init_m_floor: float = 1e-4
    density_bins: int = 50
    theta_trim_fraction: float = 0.01

    def gibbs_config(self, pair: MaturityPair, kind: DecompositionKind) -> GibbsConfig:
        return GibbsConfig(
            iterations=self.iterations,
            burn_in=self.burn_in,
            thinning=self.thinning,
            seed=self.seed,
            pair=pair,
            kind=kind,
            trunc_threshold=self.trunc_threshold,
            init_a=self.init_a,
            init_sigma_sd=self.init_sigma_sd,
            init_sigma_corr=self.init_sigma_corr,
            init_m_floor=self.init_m_floor,
        )


@dataclass(frozen=True)
class ExtrapolationSection:
    s_max: float = 100.0
    anchor_date: str = ""  # ISO date; empty means the last panel date


@dataclass(frozen=True)
class BaselineSection:
    ufr: float = 0.042
    llp: float = 20.0
    convergence_maturity: float = 60.0
    tolerance_bp: float = 3.0
    instantaneous_forward: bool = False


@dataclass(frozen=True)
class SimulateSection:
    kappa: float = 0.16
    kappa_q: float = 0.02
    theta: float = 0.03
    mu: float = 0.01
    sigma2: float = 5e-5
    eta: float = 1e-5
    rho: float = 0.9
    n_obs: int = 140
    h: float = 1.0 / 12.0
    seed: int = 12345


@dataclass(frozen=True)
class RunConfig:
    data: DataSection = field(default_factory=DataSection)
    priors: PriorSection = field(default_factory=PriorSection)
    gibbs: GibbsSection = field(default_factory=GibbsSection)
    extrapolation: ExtrapolationSection = field(default_factory=ExtrapolationSection)
    baselines: BaselineSection = field(default_factory=BaselineSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)


_SECTIONS = {
    "data": DataSection,
    "priors": PriorSection,
    "gibbs": GibbsSection,
    "extrapolation": ExtrapolationSection,
    "baselines": BaselineSection,
    "simulate": SimulateSection,
}


def load_config(path: str | None) -> RunConfig:
    """Load TOML over the defaults; None means pure defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as e:
        raise CurveDataError(f"cannot open config file {path}: {e}") from e
    except tomli.TOMLDecodeError as e:
        raise CurveDataError(f"config file {path} is not valid TOML: {e}") from e

    kwargs = {}
    for section, payload in raw.items():
        if section not in _SECTIONS:
            raise CurveDataError(
                f"unknown config section [{section}] in {path}; "
                f"valid: {sorted(_SECTIONS)}"
            )
        cls = _SECTIONS[section]
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - names
        if unknown:
            raise CurveDataError(
                f"unknown keys {sorted(unknown)} in [{section}] of {path}; "
                f"valid: {sorted(names)}"
            )
        coerced = {
            k: tuple(v) if isinstance(v, list) else v for k, v in payload.items()
        }
        kwargs[section] = cls(**coerced)
    return RunConfig(**kwargs)


def _value_toml(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(_value_toml(x) for x in v) + "]"
    raise TypeError(f"cannot render {type(v)} as TOML")


def render_toml(cfg: RunConfig) -> str:
    lines = []
    for section in _SECTIONS:
        lines.append(f"[{section}]")
        sub = getattr(cfg, section)
        for f in dataclasses.fields(sub):
            lines.append(f"{f.name} = {_value_toml(getattr(sub, f.name))}")
        lines.append("")
    return "\n".join(lines)


def default_toml() -> str:
    return render_toml(RunConfig())


def config_digest(cfg: RunConfig) -> str:
    """sha256 over the canonical JSON form of the resolved configuration."""
    payload = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()
