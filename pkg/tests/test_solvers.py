import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvmbounds.errors import LeftSupport
from bvmbounds.examples import ExampleSpec
from bvmbounds.expfam import summarize
from bvmbounds.solvers import PosteriorContext, check_assumptions, find_mle, find_mode

from conftest import make_context


@given(st.floats(0.1, 20.0), st.floats(0.5, 20.0), st.integers(1, 300), st.floats(0.0, 1.0))
def test_bernoulli_mode_closed_form(t1, extra, n, frac):
    spec = ExampleSpec("bernoulli-beta", (t1, t1 + extra))
    s = int(round(frac * n))
    summary = summarize(spec.model, np.r_[np.ones(s), np.zeros(n - s)])
    res = find_mode(spec.model, spec.prior, summary)
    np.testing.assert_allclose(res.theta, spec.closed_form_mode(summary), atol=1e-8)


@given(st.floats(0.1, 30.0), st.floats(0.1, 30.0), st.lists(st.integers(0, 12), min_size=1, max_size=200))
def test_poisson_mode_closed_form(t1, t2, xs):
    spec = ExampleSpec("poisson-gamma", (t1, t2))
    summary = summarize(spec.model, np.asarray(xs, dtype=float))
    res = find_mode(spec.model, spec.prior, summary)
    np.testing.assert_allclose(res.theta, spec.closed_form_mode(summary), atol=1e-8)
    assert res.residual <= 1e-9 * (1 + sum(xs))


def test_mle_missing_when_all_successes():
    spec = ExampleSpec("bernoulli-beta", (1.0, 3.0))
    with pytest.raises(LeftSupport):
        find_mle(spec.model, summarize(spec.model, np.ones(10)))


def test_mode_exists_when_mle_does_not():
    spec = ExampleSpec("bernoulli-beta", (1.0, 3.0))
    ctx = PosteriorContext(spec.model, spec.prior, summarize(spec.model, np.ones(10)))
    assert check_assumptions(ctx, "mode").ok
    flags = check_assumptions(ctx, "mle")
    assert not flags.ok and "A2'" in flags.failed()


def test_hyperbolic_prior_supports_only_weak_prior_bounds():
    _, ctx = make_context("bernoulli-hyperbolic", 80)
    assert check_assumptions(ctx, "weak_prior").ok
    assert check_assumptions(ctx, "mle").failed() == ["A3"]


@pytest.mark.parametrize("name", ["fig1d-multinomial", "normal-meanvar", "negbin", "weibull"])
def test_newton_matches_closed_forms(name):
    spec, ctx = make_context(name, 150, seed=3)
    np.testing.assert_allclose(ctx.mode, spec.closed_form_mode(ctx.summary), atol=1e-8)
    np.testing.assert_allclose(ctx.mle, spec.closed_form_mle(ctx.summary), atol=1e-8)
