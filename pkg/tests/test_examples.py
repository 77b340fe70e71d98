import math

import numpy as np
import pytest

from bvmbounds.bounds import Bounds, SQRT_PI_8
from bvmbounds.errors import HyperparameterOutOfRange, ShapeTooSmall
from bvmbounds.examples import (POISSON_EPS_COEFFICIENT_DISPLAYED, PRESETS, gamma_normal_exact_wass,
                                multinomial_b_matrix, normal_precision_bn, poisson_eps_coefficient, preset)

from conftest import make_context


def test_every_preset_builds_and_generates():
    for name, spec in PRESETS.items():
        _, ctx = make_context(name, 50)
        assert ctx.n == 50
        reports = spec.closed_bounds(ctx)
        assert {r.theorem for r in reports} >= set(spec.figure_theorems)


def test_unknown_preset():
    with pytest.raises(HyperparameterOutOfRange, match="unknown preset"):
        preset("fig9")


def test_gamma_normal_formula_domain():
    assert gamma_normal_exact_wass(3.0, 4.0) == 0.25
    with pytest.raises(ShapeTooSmall):
        gamma_normal_exact_wass(1.0, 1.0)


def test_poisson_coefficients():
    assert POISSON_EPS_COEFFICIENT_DISPLAYED == pytest.approx(2.6681579, abs=1e-7)
    assert poisson_eps_coefficient(1.0) == pytest.approx(math.e / 2 + (3 + math.sqrt(5)) / 2, rel=1e-15)


def test_normal_precision_closed_forms():
    spec, ctx = make_context("fig1c-normal", 100)
    reps = {(r.theorem, r.metric): r.value for r in spec.closed_bounds(ctx)}
    n, t2 = 100, spec.tau[1]
    assert reps[("normal-precision-closed", "Wass")] == pytest.approx(math.sqrt(2 / (n + 2 * t2)), rel=1e-14)
    assert reps[("normal-precision-closed", "TV")] == pytest.approx(math.sqrt(math.pi) / 2 / math.sqrt(n + 2 * t2))


def test_normal_precision_bn_versions_differ():
    assert normal_precision_bn(100, 3.0, (2.0, 0.5)) != normal_precision_bn(100, 3.0, (2.0, 0.5), corrected=True)


def test_weibull_closed_form():
    spec, ctx = make_context("weibull", 120)
    reps = {(r.theorem, r.metric): r.value for r in spec.closed_bounds(ctx)}
    assert reps[("weibull-closed", "Wass")] == pytest.approx(1 / math.sqrt(120 + spec.tau[1]), rel=1e-12)


def test_bernoulli_tv_is_scaled_wasserstein():
    spec, ctx = make_context("fig1a-bernoulli", 200)
    reps = {(r.theorem, r.metric): r.value for r in spec.closed_bounds(ctx)}
    assert reps[("bernoulli-closed", "TV")] == pytest.approx(SQRT_PI_8 * reps[("bernoulli-closed", "Wass")])


def test_multinomial_b_matrix_is_scaled_hessian():
    spec, ctx = make_context("fig1d-multinomial", 150)
    B = multinomial_b_matrix(ctx.summary, spec.tau)
    np.testing.assert_allclose(B, np.asarray(ctx.hess_lambda_at_mode.source) / ctx.n, rtol=1e-10)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_closed_form_bounds_dominate_engine_where_both_exist(name):
    spec, ctx = make_context(name, 200)
    if spec.key in ("bernoulli-beta", "poisson-gamma"):
        closed = {(r.theorem, r.metric): r.value for r in spec.closed_bounds(ctx)}
        key = ("bernoulli-closed" if spec.key == "bernoulli-beta" else "poisson-closed", "Wass")
        assert closed[key] >= Bounds(ctx).mode_tv_wass()[1].value * (1 - 1e-9)


def test_normal_precision_lower_bounds_below_upper():
    spec, ctx = make_context("fig1c-normal", 100)
    reps = {(r.theorem, r.metric, r.standardization): r.value for r in spec.closed_bounds(ctx)}
    for theorem, std, value in spec.lower_bounds(ctx):
        uppers = [v for (t, m, s), v in reps.items() if m == "Wass" and s == std]
        assert value <= min(uppers) * (1 + 1e-12)
