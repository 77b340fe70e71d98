import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvmbounds.errors import (DimensionMismatch, EmptyData, HyperparameterOutOfRange, ObservationOutOfSupport,
                              SmoothnessViolation)
from bvmbounds.examples import PRESETS
from bvmbounds.expfam import builtin_models, summarize
from bvmbounds.verify import _fd_check


def test_registry_has_every_example():
    assert set(builtin_models()) >= {p.key for p in PRESETS.values()}


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_derivative_chain_matches_finite_differences(name):
    spec = PRESETS[name]
    theta = np.asarray(spec.model.start(), dtype=float)
    if spec.key == "multinomial-dirichlet":
        theta = np.array([-0.3, 0.4])
    m = spec.model
    chain = (m.beta, m.beta_grad, m.beta_hess, m.beta_third_tensor)
    for i in range(3):
        assert _fd_check(chain[i], chain[i + 1], theta) < 1e-6


@given(st.floats(-4.0, 4.0))
def test_bernoulli_cumulant_derivatives(t):
    m, _ = builtin_models()["bernoulli-beta"].build((1.0, 3.0))
    p = 1.0 / (1.0 + np.exp(-t))
    th = np.array([t])
    assert m.beta_grad(th)[0] == pytest.approx(p, rel=1e-12)
    assert m.beta_hess(th)[0, 0] == pytest.approx(p * (1 - p), rel=1e-10)
    assert m.beta_third_tensor(th)[0, 0, 0] == pytest.approx(p * (1 - p) * (1 - 2 * p), abs=1e-12)


@given(st.floats(-3.0, 3.0))
def test_poisson_cumulant_is_exponential(t):
    m, _ = builtin_models()["poisson-gamma"].build((1.0, 3.0))
    th = np.array([t])
    for f in (m.beta(th), m.beta_grad(th)[0], m.beta_hess(th)[0, 0], m.beta_third_tensor(th)[0, 0, 0]):
        assert float(np.ravel(f)[0]) == pytest.approx(np.exp(t), rel=1e-12)


def test_normal_meanvar_constraint_message():
    with pytest.raises(HyperparameterOutOfRange, match=r"4\*tau4\*tau2 > tau3\^2"):
        builtin_models()["normal-meanvar-conjugate"].build((1.0, 1.0, 3.0, 1.0))


def test_wrong_number_of_hyperparameters():
    with pytest.raises(HyperparameterOutOfRange):
        builtin_models()["poisson-gamma"].build((1.0,))


def test_summary_sums_sufficient_statistics():
    m, _ = builtin_models()["poisson-gamma"].build((1.0, 3.0))
    s = summarize(m, np.array([3.0, 0.0, 5.0]))
    assert s.n == 3 and s.T == (8.0,)


def test_summary_sum_is_compensated():
    m, _ = builtin_models()["normal-precision-gamma"].build((2.0, 0.5), m=0.0)
    x = np.full(10, np.sqrt(0.2))
    # naive float summation of ten copies of 0.1 drifts in the last bits
    assert summarize(m, x).T[0] == pytest.approx(-1.0, abs=1e-15)


def test_summary_rejects_bad_data():
    m, _ = builtin_models()["bernoulli-beta"].build((1.0, 3.0))
    with pytest.raises(EmptyData):
        summarize(m, [])
    with pytest.raises(ObservationOutOfSupport):
        summarize(m, [0.0, 2.0])
    mm, _ = builtin_models()["multinomial-dirichlet"].build((0.2, 0.2, 1.5))
    with pytest.raises(DimensionMismatch):
        summarize(mm, np.ones((4, 2)))


def test_strict_derivative_respects_smoothness():
    _, prior = builtin_models()["bernoulli-hyperbolic"].build(())
    with pytest.raises(SmoothnessViolation):
        prior.derivative(3, np.array([0.1]))
    prior.derivative(3, np.array([0.1]), strict=False)
