"""Long-maturity yield-curve extrapolation under a one-factor affine
short-rate model, with full-posterior uncertainty fans and deterministic
Nelson-Siegel / Smith-Wilson baselines."""

__version__ = "0.1.0"

from .affine import (
    DecompositionKind,
    DerivedParams,
    VarParams,
    convergence_ratio,
    derive_params,
    extrapolate_zero,
    forward_loading,
    loading_b,
    long_run_zero_means,
    measure_change,
    model_covariance,
    short_zero_map,
    solve_kappa_q,
    stationary_variance,
    theta_mu_from_means,
    ultimate_zero_rate,
    zero_rate_from_short,
)
from .baselines import NsParams, SwConfig, SwCurve, ns_evaluate, ns_fit, sw_fit
from .curves import (
    ColumnMap,
    CurveSnapshot,
    MaturityPair,
    ZeroCurvePanel,
    export_panel,
    ingest_panel,
    select_pair,
)
from .diagnostics import DiagnosticsReport, acf, cusum, diagnose_chain, geweke_z
from .errors import (
    CurveDataError,
    DegenerateDataError,
    DomainError,
    FeasibilityError,
    SamplerStallError,
    SolverError,
    YieldFanError,
)
from .gibbs import (
    Chain,
    GibbsConfig,
    Priors,
    posterior_hyper_a,
    posterior_hyper_m,
    posterior_hyper_sigma,
    run_chain,
    sample_trunc_normal,
    sample_trunc_normal_2d,
    sample_wishart,
)
from .mle import MleFit, asymptotic_cov, conditional_loglik, delta_method, fit_cmle
from .simulate import (
    SimSpec,
    analytic_mc_check,
    mc_bond_yield,
    ou_step_coefficients,
    simulate_panel,
    simulate_rates,
)
from .summary import (
    CurveFan,
    IntervalSummary,
    density,
    fan,
    hpd_interval,
    scatter_export,
    summarize,
    trimmed_mean,
)
