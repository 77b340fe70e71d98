import sys
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bvmbounds.bounds import BoundConfig, Bounds
from bvmbounds.examples import preset
from bvmbounds.rng import make_rng

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_context(name, n, seed=7, tau=None):
    spec = preset(name)
    if tau is not None:
        spec = spec.with_tau(tau)
    return spec, spec.context(spec.generate(make_rng(seed, "data"), n))


@pytest.fixture(scope="session")
def poisson_100():
    spec, ctx = make_context("fig1b-poisson", 100)
    return spec, ctx, Bounds(ctx, BoundConfig(seed=7))


@pytest.fixture(scope="session")
def normal_100():
    spec, ctx = make_context("fig1c-normal", 100)
    return spec, ctx, Bounds(ctx, BoundConfig(seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
