"""Nelson-Siegel and Smith-Wilson baseline curves."""

import math

import numpy as np
import pytest

from yieldfan.baselines import (
    NsParams,
    SwConfig,
    SwCurve,
    ns_evaluate,
    ns_fit,
    ns_objective,
    sw_fit,
)
from yieldfan.errors import DomainError, SolverError

from conftest import SEPTEMBER_NS


# ------------------------------------------------------------ Nelson-Siegel

def test_ns_recovers_planted_parameters():
    truth = NsParams(0.03, -0.02, 0.01, 2.5, 0.0)
    t = np.arange(1.0, 21.0)
    fit = ns_fit(t, ns_evaluate(truth, t))
    assert fit.beta0 == pytest.approx(truth.beta0, abs=1e-6)
    assert fit.beta1 == pytest.approx(truth.beta1, abs=1e-6)
    assert fit.beta2 == pytest.approx(truth.beta2, abs=1e-6)
    assert fit.tau_ns == pytest.approx(truth.tau_ns, abs=1e-6)
    assert fit.resid_norm < 1e-9


def test_ns_flat_curve_loads_only_the_level():
    t = np.arange(1.0, 13.0)
    fit = ns_fit(t, np.full_like(t, 0.03))
    assert fit.beta0 == pytest.approx(0.03, abs=1e-12)
    assert abs(fit.beta1) < 1e-10
    assert abs(fit.beta2) < 1e-10
    assert fit.resid_norm < 1e-12


def test_ns_september_fixture_magnitudes(september_curve):
    t, z = september_curve
    fit = ns_fit(t, z)
    # generated data: recovery is exact; magnitudes match the reported
    # steep-curve fit (decay near 1.9, long level near 3%)
    assert fit.tau_ns == pytest.approx(SEPTEMBER_NS.tau_ns, abs=1e-5)
    assert fit.beta0 == pytest.approx(SEPTEMBER_NS.beta0, abs=1e-7)
    assert 1.9 / 2.0 < fit.tau_ns < 1.9 * 2.0
    assert 0.03 / 2.0 < fit.beta0 < 0.03 * 2.0


def test_ns_fit_is_the_least_squares_optimum(september_curve):
    t, z = september_curve
    rng = np.random.default_rng(0)
    z_noisy = z + 2e-4 * rng.standard_normal(len(z))
    fit = ns_fit(t, z_noisy)
    sse_fit = ns_objective(t, z_noisy, fit.beta0, fit.beta1, fit.beta2,
                           fit.tau_ns)
    assert math.isclose(sse_fit, fit.resid_norm ** 2,
                        rel_tol=1e-9, abs_tol=1e-18)
    for _ in range(200):
        b0 = fit.beta0 + 0.02 * rng.standard_normal()
        b1 = fit.beta1 + 0.02 * rng.standard_normal()
        b2 = fit.beta2 + 0.05 * rng.standard_normal()
        tau = math.exp(rng.uniform(math.log(0.1), math.log(30.0)))
        assert ns_objective(t, z_noisy, b0, b1, b2, tau) >= sse_fit - 1e-15
    # profiled objective at every grid node is no better either
    for tau in np.geomspace(0.1, 30.0, 200):
        design_sse = ns_objective(t, z_noisy, *_profile(t, z_noisy, tau), tau)
        assert design_sse >= sse_fit - 1e-15


def _profile(t, z, tau):
    x = t / tau
    g = -np.expm1(-x) / x
    design = np.column_stack([np.ones_like(t), g, g - np.exp(-x)])
    beta, *_ = np.linalg.lstsq(design, z, rcond=None)
    return beta


def test_ns_evaluate_limits():
    p = NsParams(0.032, -0.0285, -0.04, 1.93, 0.0)
    assert ns_evaluate(p, 1e7) == pytest.approx(p.beta0, abs=1e-7)
    assert ns_evaluate(p, 1e-9) == pytest.approx(p.beta0 + p.beta1, abs=1e-8)


def test_ns_long_end_stays_below_the_ufr(september_curve):
    t, z = september_curve
    fit = ns_fit(t, z)
    far = ns_evaluate(fit, np.array([60.0, 100.0]))
    assert np.all(far < 0.042)
    assert far[1] == pytest.approx(fit.beta0, abs=2e-3)


def test_ns_evaluate_scalar_and_vector():
    p = NsParams(0.03, -0.01, 0.0, 2.0, 0.0)
    out = ns_evaluate(p, 5.0)
    assert isinstance(out, float)
    arr = ns_evaluate(p, np.array([1.0, 5.0]))
    assert arr.shape == (2,)
    assert arr[1] == pytest.approx(out, rel=1e-15)
    with pytest.raises(DomainError):
        ns_evaluate(p, 0.0)


def test_ns_fit_validation():
    with pytest.raises(DomainError):
        ns_fit([1.0, 2.0, 3.0], [0.02, 0.02, 0.02])
    with pytest.raises(DomainError):
        ns_fit([1.0, 2.0, 2.0, 3.0], [0.02] * 4)
    with pytest.raises(DomainError):
        ns_fit([0.0, 1.0, 2.0, 3.0], [0.02] * 4)
    with pytest.raises(DomainError):
        ns_fit([1.0, 2.0, 3.0, 4.0], [0.02] * 3)


# ------------------------------------------------------------- Smith-Wilson

def test_sw_reprices_the_inputs(september_curve):
    t, z = september_curve
    curve = sw_fit(t, z)
    assert curve.repricing_error < 1e-12
    np.testing.assert_allclose(curve.price(t), np.exp(-z * t),
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(curve.zero(t), z, rtol=0, atol=1e-12)


def test_sw_forward_sits_at_the_tolerance_boundary(september_curve):
    # alpha is the smallest feasible value, so the convergence-point forward
    # lands exactly tol away from the ufr
    t, z = september_curve
    curve = sw_fit(t, z)
    gap = abs(curve.forward_1y(60.0) - 0.042)
    assert gap <= 3e-4 + 1e-12
    assert gap == pytest.approx(3e-4, abs=1e-8)
    assert 1e-4 < curve.alpha < 1.0


def test_sw_flat_curve_at_the_ufr_needs_no_correction():
    t = np.arange(1.0, 21.0)
    curve = sw_fit(t, np.full_like(t, 0.042))
    np.testing.assert_allclose(curve.zeta, 0.0, atol=1e-10)
    grid = np.array([0.5, 5.0, 20.0, 60.0, 120.0])
    np.testing.assert_allclose(curve.zero(grid), 0.042, atol=1e-10)
    assert curve.alpha == pytest.approx(1e-4)


def test_sw_converges_to_the_ufr(september_curve):
    t, z = september_curve
    curve = sw_fit(t, z)
    assert abs(curve.forward_1y(200.0) - 0.042) < 1e-5
    assert curve.zero(10_000.0) == pytest.approx(0.042, abs=1e-4)


def test_sw_prices_stay_positive(september_curve):
    t, z = september_curve
    curve = sw_fit(t, z)
    grid = np.linspace(0.1, 120.0, 1200)
    assert np.all(curve.price(grid) > 0.0)


def test_sw_ignores_rates_beyond_the_llp(september_curve):
    t, z = september_curve
    base = sw_fit(t, z)
    t_ext = np.concatenate([t, [25.0, 30.0]])
    z_ext = np.concatenate([z, [0.5, -0.3]])
    ext = sw_fit(t_ext, z_ext)
    assert ext.alpha == base.alpha
    np.testing.assert_array_equal(ext.u, base.u)
    np.testing.assert_allclose(ext.zeta, base.zeta, rtol=1e-12)
    assert ext.zero(40.0) == pytest.approx(base.zero(40.0), rel=1e-12)


def test_sw_instantaneous_forward_criterion(september_curve):
    t, z = september_curve
    config = SwConfig(instantaneous_forward=True)
    curve = sw_fit(t, z, config)
    assert abs(curve.forward_inst(60.0) - 0.042) <= 3e-4 + 1e-9


def test_sw_alpha_search_can_fail(september_curve):
    # asking for convergence one year past the llp at a hundredth of a basis
    # point is out of reach for any alpha in the search bracket
    t, z = september_curve
    config = SwConfig(convergence_maturity=21.0, tolerance_bp=0.01)
    with pytest.raises(SolverError, match="alpha"):
        sw_fit(t, z, config)


def test_sw_extrapolation_breakdown_is_reported(september_curve):
    t, z = september_curve
    curve = sw_fit(t, z)
    broken = SwCurve(u=curve.u, zeta=curve.zeta * -50.0, alpha=curve.alpha,
                     config=curve.config)
    with pytest.raises(SolverError, match="breakdown"):
        broken.zero(np.linspace(1.0, 120.0, 400))


def test_sw_validation(september_curve):
    t, z = september_curve
    with pytest.raises(DomainError):
        sw_fit([10.0], [0.02])
    with pytest.raises(DomainError):
        sw_fit([5.0, 5.0], [0.02, 0.02])
    with pytest.raises(DomainError):
        sw_fit([-1.0, 5.0], [0.02, 0.02])
    with pytest.raises(DomainError):
        # everything sits beyond the llp
        sw_fit([25.0, 30.0], [0.02, 0.02])
    with pytest.raises(DomainError):
        SwConfig(llp=0.0)
    with pytest.raises(DomainError):
        SwConfig(convergence_maturity=10.0)
    with pytest.raises(DomainError):
        SwConfig(tolerance_bp=0.0)
    with pytest.raises(DomainError):
        sw_fit(t, z[:-1])
