import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bvmbounds.bounds import Bounds
from bvmbounds.distances import (kolmogorov_1d, posterior_oracles, tv_quadrature, wass_1d, wass_empirical)
from bvmbounds.errors import AssignmentOverflow, WindowTooSmall
from bvmbounds.standardize import Kind

from conftest import make_context

W = (-14.0, 15.0)


def test_normal_shift_values():
    b = stats.norm(1.0, 1.0)
    assert wass_1d(stats.norm.cdf, b.cdf, W).value == pytest.approx(1.0, abs=1e-10)
    tv = 2 * stats.norm.cdf(0.5) - 1
    assert tv_quadrature(stats.norm.pdf, b.pdf, 1, W).value == pytest.approx(tv, abs=1e-10)
    # the CDF gap peaks at t = 1/2 with value Phi(1/2) - Phi(-1/2), the same as TV
    assert kolmogorov_1d(stats.norm.cdf, b.cdf, W).value == pytest.approx(0.382925, abs=1e-6)


def test_same_mean_scale_family():
    b = stats.norm(0.0, 2.0)
    assert wass_1d(stats.norm.cdf, b.cdf, (-20, 20)).value == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)


def test_identical_laws_are_at_distance_zero():
    assert wass_1d(stats.norm.cdf, stats.norm.cdf, W).value == pytest.approx(0.0, abs=1e-14)
    assert tv_quadrature(stats.norm.pdf, stats.norm.pdf, 1, W).value == pytest.approx(0.0, abs=1e-14)
    assert kolmogorov_1d(stats.norm.cdf, stats.norm.cdf, W).value == 0.0


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        wass_1d(stats.norm.cdf, stats.norm(1, 1).cdf, (-2, 2))


@settings(max_examples=25)
@given(st.floats(-2, 2), st.floats(0.3, 3.0))
def test_normal_pairs_metric_ordering(mu, sigma):
    b = stats.norm(mu, sigma)
    win = (-12 * max(1, sigma) - abs(mu), 12 * max(1, sigma) + abs(mu))
    tv = tv_quadrature(stats.norm.pdf, b.pdf, 1, win)
    kol = kolmogorov_1d(stats.norm.cdf, b.cdf, win)
    assert kol.value <= tv.value + tv.error_bar + 1e-10
    assert 0.0 <= tv.value <= 1 + tv.error_bar
    # W1 between normals is at least the mean gap
    assert wass_1d(stats.norm.cdf, b.cdf, win).value >= abs(mu) - 1e-9


@pytest.mark.parametrize("alpha, b", [(2.0, 1.0), (10.0, 2.0), (51.5, 12.0)])
def test_gamma_against_matched_normal(alpha, b):
    g = stats.gamma(alpha, scale=1 / b)
    n = stats.norm((alpha - 1) / b, math.sqrt(alpha - 1) / b)
    est = wass_1d(g.cdf, n.cdf, (min(0.0, n.ppf(1e-12)), max(g.ppf(1 - 1e-12), n.ppf(1 - 1e-12))), [0.0])
    assert est.value == pytest.approx(1 / b, rel=1e-6)


def test_tv_2d_shifted_normals():
    npdf = lambda w: np.exp(-0.5 * np.sum(w * w, axis=1)) / (2 * math.pi)  # noqa: E731
    shifted = lambda w: npdf(w - np.array([1.0, 0.0]))  # noqa: E731
    est = tv_quadrature(npdf, shifted, 2, ((-10, 11), (-10, 10)), panels=80)
    assert est.value == pytest.approx(2 * stats.norm.cdf(0.5) - 1, abs=1e-6)


def test_empirical_point_masses():
    a = lambda rng, m: np.zeros((m, 2))  # noqa: E731
    b = lambda rng, m: np.tile([3.0, 4.0], (m, 1))  # noqa: E731
    assert wass_empirical(a, b, m=5, reps=3).value == pytest.approx(5.0)


def test_empirical_self_distance_decays():
    s = lambda rng, m: rng.standard_normal((m, 2))  # noqa: E731
    small = wass_empirical(s, s, m=100, reps=20, seed=1)
    large = wass_empirical(s, s, m=500, reps=20, seed=1)
    assert large.value < small.value
    assert large.value < 0.25


def test_empirical_overestimates_in_one_dimension():
    g = stats.gamma(10.0, scale=0.5)
    n = stats.norm(4.5, 1.5)
    exact = wass_1d(g.cdf, n.cdf, (-6.0, 20.0), [0.0]).value
    emp = wass_empirical(lambda rng, m: g.rvs(size=(m, 1), random_state=rng),
                         lambda rng, m: n.rvs(size=(m, 1), random_state=rng), m=300, reps=10, seed=2)
    assert emp.value >= exact - 3 * emp.error_bar


def test_assignment_cap():
    s = lambda rng, m: rng.standard_normal((m, 2))  # noqa: E731
    with pytest.raises(AssignmentOverflow):
        wass_empirical(s, s, m=601, reps=1)


@pytest.mark.parametrize("name", ["fig1a-bernoulli", "fig1b-poisson", "weibull", "negbin"])
def test_posterior_oracles_are_consistent(name):
    _, ctx = make_context(name, 150)
    o = posterior_oracles(ctx, Bounds(ctx).std(Kind.MODE))
    assert o["Kol"].value <= o["TV"].value + o["TV"].error_bar + o["Kol"].error_bar
    assert all(v.value >= 0 for v in o.values())


def test_refining_quadrature_stays_within_error_bar():
    _, ctx = make_context("fig1b-poisson", 100)
    std = Bounds(ctx).std(Kind.MODE)
    from bvmbounds.distances import _pdf_1d
    from bvmbounds.standardize import StandardizedLaw
    pdf = _pdf_1d(StandardizedLaw(ctx.law, std))
    coarse = tv_quadrature(pdf, stats.norm.pdf, 1, (-12, 12))
    fine = tv_quadrature(pdf, stats.norm.pdf, 1, (-12, 12), points=list(np.linspace(-6, 6, 13)))
    assert abs(coarse.value - fine.value) <= coarse.error_bar + fine.error_bar + 1e-12
