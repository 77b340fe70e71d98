import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvmbounds.bounds import (TAIL_CONST, TV_CONST, BoundConfig, BoundReport, Bounds, PolySpec, UpsilonKernel,
                              Variant, constant_test_function, default_epsilon, linear_test_function,
                              normal_abs_moment, quadratic_test_function)
from bvmbounds.errors import AssumptionFailure, NonFinite, PreconditionFail
from bvmbounds.examples import ExampleSpec
from bvmbounds.expfam import summarize
from bvmbounds.solvers import PosteriorContext
from bvmbounds.standardize import Kind

from conftest import make_context


def poisson_ctx(t1, t2, xs):
    spec = ExampleSpec("poisson-gamma", (t1, t2))
    return PosteriorContext(spec.model, spec.prior, summarize(spec.model, np.asarray(xs, dtype=float)))


@pytest.mark.parametrize("r, expected", [(0, 1.0), (1, math.sqrt(2 / math.pi)), (2, 1.0), (3, 2 * math.sqrt(2 / math.pi)),
                                         (4, 3.0)])
def test_normal_abs_moments(r, expected):
    assert normal_abs_moment(r) == pytest.approx(expected, rel=1e-14)


def test_report_rejects_negative_value():
    with pytest.raises(NonFinite):
        BoundReport("t", "TV", "mode", 10, -0.1)


def test_report_clamps_tv_only():
    tv = BoundReport("t", "TV", "mode", 10, 3.0)
    wass = BoundReport("t", "Wass", "mode", 10, 3.0)
    assert tv.clamped == 1.0 and wass.clamped == 3.0


@pytest.mark.parametrize("name", ["fig1b-poisson", "fig1a-bernoulli", "fig1d-multinomial", "normal-meanvar"])
def test_upsilon_at_origin_is_half_third_derivative(name):
    _, ctx = make_context(name, 80)
    B = Bounds(ctx)
    for form in ("reduced", "tensor"):
        k = UpsilonKernel(ctx, B.std(Kind.MODE), form=form)
        vals, valid = k.tensor(np.zeros((1, ctx.k)))
        assert valid.all()
        np.testing.assert_allclose(vals[0], 0.5 * ctx.log_posterior.third(ctx.mode), rtol=1e-12)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_upsilon_forms_agree(a, b):
    _, ctx = make_context("fig1d-multinomial", 120)
    std = Bounds(ctx).std(Kind.MODE)
    w = np.array([[a, b]])
    red = UpsilonKernel(ctx, std).tensor(w)[0]
    ten = UpsilonKernel(ctx, std, form="tensor").tensor(w)[0]
    np.testing.assert_allclose(red, ten, rtol=1e-9, atol=1e-12 * np.abs(ten).max())


def test_upsilon_is_symmetric_in_indices():
    _, ctx = make_context("normal-meanvar", 80)
    vals, _ = UpsilonKernel(ctx, Bounds(ctx).std(Kind.MODE)).tensor(np.array([[0.4, -1.1]]))
    t = vals[0]
    for perm in ((1, 0, 2), (2, 1, 0), (0, 2, 1)):
        np.testing.assert_allclose(t, np.transpose(t, perm), rtol=1e-12)


def test_kernel_rows_outside_support_are_flagged():
    _, ctx = make_context("fig1c-normal", 30)
    std = Bounds(ctx).std(Kind.MODE)
    vals, valid = UpsilonKernel(ctx, std).tensor(np.array([[-1e6], [0.5]]))
    assert not valid[0] and valid[1]
    assert np.all(vals[0] == 0.0)


@settings(max_examples=20)
@given(st.floats(0.2, 15.0), st.floats(0.1, 10.0), st.lists(st.integers(0, 8), min_size=5, max_size=120))
def test_poisson_lower_bound_meets_upper_bound(t1, t2, xs):
    # Upsilon has one sign here, so |E theta*| equals the Wasserstein bound exactly
    ctx = poisson_ctx(t1, t2, xs)
    B = Bounds(ctx)
    upper = B.mode_tv_wass()[1].value
    lower = B.wass_lower_bound(Kind.MODE)
    assert lower <= upper * (1 + 1e-6)
    assert lower == pytest.approx(upper, rel=1e-6)


@settings(max_examples=15)
@given(st.floats(0.5, 10.0), st.floats(0.1, 5.0), st.integers(5, 400))
def test_normal_precision_wasserstein_is_exact(t1, t2, n):
    rng = np.random.default_rng(n)
    spec = ExampleSpec("normal-precision-gamma", (t1, t2), {"m": 0.0})
    ctx = spec.context(rng.normal(0.0, 1.5, n))
    B = Bounds(ctx)
    exact = math.sqrt(2.0) / math.sqrt(n + 2.0 * t2)
    assert B.mode_univariate("wass").value == pytest.approx(exact, rel=1e-6)
    assert B.wass_lower_bound(Kind.MODE) == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("name", ["fig1a-bernoulli", "fig1b-poisson", "weibull", "negbin"])
def test_univariate_path_matches_engine(name):
    _, ctx = make_context(name, 150)
    B = Bounds(ctx)
    assert B.mode_univariate("wass").value == pytest.approx(B.mode_tv_wass()[1].value, rel=1e-6)


@pytest.mark.parametrize("name", ["fig1a-bernoulli", "fig1b-poisson", "fig1c-normal", "weibull"])
def test_univariate_refinements_are_ordered(name):
    _, ctx = make_context(name, 150)
    B = Bounds(ctx)
    tv, wass = B.mode_tv_wass()
    assert B.mode_univariate("tv").value <= tv.value
    assert B.mode_univariate("wass").value <= wass.value * (1 + 1e-9)


def test_smooth_bound_with_unit_derivative_growth_is_delta():
    _, ctx = make_context("fig1b-poisson", 100)
    B = Bounds(ctx)
    assert B.mode_smooth(PolySpec(1.0, (0.0,), (0.0,))).value == pytest.approx(B.mode_tv_wass()[1].value, rel=1e-12)


def test_smooth_bound_grows_with_polynomial_terms():
    _, ctx = make_context("fig1d-multinomial", 150)
    B = Bounds(ctx)
    base = B.mode_smooth(PolySpec(1.0, (0.0, 0.0), (0.0, 0.0))).value
    more = B.mode_smooth(PolySpec(1.0, (0.5, 0.5), (2.0, 2.0))).value
    assert more > base


def test_corollary_dominates_local_bound():
    # Markov's inequality overestimates the tail probability the local bound uses
    _, ctx = make_context("fig1b-poisson", 200)
    B = Bounds(ctx)
    rep = B.mode_tv_corollary()
    assert rep.epsilon == pytest.approx(default_epsilon(ctx))
    A = B.std(Kind.MODE).inv_scale.entries[0, 0]
    eps = rep.epsilon
    local = B.mode_tv_local(lambda w: np.abs(w[:, 0] * A) <= eps, breaks=(-eps / A, eps / A))
    assert rep.value >= local.value


def test_corollary_refuses_tiny_region():
    _, ctx = make_context("fig1b-poisson", 200)
    with pytest.raises(PreconditionFail):
        Bounds(ctx).mode_tv_corollary(eps=1e-4)


def test_tail_constant():
    assert TAIL_CONST == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-15)


def test_default_epsilon_rules():
    _, pois = make_context("fig1b-poisson", 100)
    assert default_epsilon(pois) == pytest.approx(1.0)
    spec, nrm = make_context("fig1c-normal", 100)
    assert default_epsilon(nrm) == pytest.approx(0.5 * nrm.mode[0])


def test_strict_bounds_refuse_c1_prior():
    _, ctx = make_context("bernoulli-hyperbolic", 100)
    B = Bounds(ctx)
    with pytest.raises(AssumptionFailure):
        B.mode_tv_wass()
    tv, wass = B.mle_weak_prior()
    assert wass.value > 0 and tv.value == pytest.approx(TV_CONST * wass.value)


def test_experimental_variant_needs_opt_in():
    _, ctx = make_context("fig1b-poisson", 100)
    with pytest.raises(AssumptionFailure):
        Bounds(ctx).mode_beta_eta_experimental()
    tv, wass = Bounds(ctx, BoundConfig(experimental=True)).mode_beta_eta_experimental()
    assert wass.value > 0


@pytest.mark.parametrize("name", ["fig1a-bernoulli", "fig1b-poisson", "fig1c-normal", "fig1d-multinomial"])
def test_mle_bounds_positive_and_ordered(name):
    _, ctx = make_context(name, 200)
    B = Bounds(ctx)
    tv, wass = B.mle_full()
    assert tv.value == pytest.approx(TV_CONST * wass.value) and wass.value > 0
    if ctx.k == 1:
        assert B.mle_univariate("wass").value > 0


@pytest.mark.parametrize("variant", list(Variant))
def test_every_kernel_variant_evaluates(variant):
    _, ctx = make_context("fig1b-poisson", 100)
    k = UpsilonKernel(ctx, Bounds(ctx).std(Kind.MLE), variant=variant)
    vals, valid = k.tensor(np.array([[0.3]]))
    assert valid.all() and np.isfinite(vals).all()


@pytest.mark.parametrize("name", ["fig1a-bernoulli", "fig1b-poisson"])
def test_stein_residual_vanishes(name):
    _, ctx = make_context(name, 100)
    B = Bounds(ctx, BoundConfig(seed=3))
    for f in (linear_test_function(), quadratic_test_function()):
        res = B.stein_residual(Kind.MODE, f, n_samples=200_000)
        assert abs(res.value) <= 4 * res.std_error
    zero = B.stein_residual(Kind.MODE, constant_test_function(), n_samples=1000)
    assert zero.value == 0.0


def test_stein_residual_detects_wrong_sampler():
    _, ctx = make_context("fig1b-poisson", 100)
    _, other = make_context("fig1b-poisson", 100, seed=99, tau=(8.0, 3.0))
    ctx.__dict__["law"] = other.law  # sample from the wrong posterior
    res = Bounds(ctx, BoundConfig(seed=3)).stein_residual(Kind.MODE, linear_test_function(), n_samples=200_000)
    assert abs(res.value) > 10 * res.std_error


def test_bounds_shrink_like_root_n():
    vals = []
    for n in (100, 400):
        _, ctx = make_context("fig1b-poisson", n)
        vals.append(Bounds(ctx).mode_tv_wass()[1].value * math.sqrt(n))
    assert 0.7 < vals[0] / vals[1] < 1.4
