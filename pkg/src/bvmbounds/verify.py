"""Seeded self-check suites behind ``bvm verify``.

Each check returns a :class:`CheckResult`; a report is the JSON rendering of
the results, sorted and free of timings, so that two runs with the same seed
produce identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .bounds import (BoundConfig, Bounds, UpsilonKernel, linear_test_function, quadratic_test_function)
from .distances import kolmogorov_1d, posterior_oracles, tv_quadrature, wass_1d
from .examples import PRESETS, gamma_normal_exact_wass
from .linalg import inf_norm, row_sum_scalars, spd_sqrt
from .rng import make_rng
from .standardize import Kind

SUITES = ("linalg", "derivs", "bounds", "oracles")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _round(d: dict) -> dict:
    return {k: (float(f"{v:.12g}") if isinstance(v, (float, np.floating)) else int(v) if isinstance(v, np.integer)
                else v) for k, v in d.items()}


def random_spd(rng: np.random.Generator, k: int) -> np.ndarray:
    """SPD test matrix with a condition number spread over several decades."""
    a = rng.standard_normal((k, k))
    shift = 10.0 ** rng.uniform(-3.0, 1.0)
    return a @ a.T + shift * np.eye(k)


def check_linalg_chain(seed: int, count: int = 1000, dims=range(1, 9), slack: float = 1e-9) -> list[CheckResult]:
    out = []
    for k in dims:
        rng = make_rng(seed, f"linalg-{k}")
        violations = 0
        worst = -math.inf
        for _ in range(count):
            f = spd_sqrt(random_spd(rng, k))
            rs = row_sum_scalars(f.inv_sqrt)
            norm = inf_norm(f.inv_sqrt)
            upper = math.sqrt(k / f.lambda_min)
            lower = 1.0 / math.sqrt(f.lambda_min)
            gaps = np.concatenate([rs.R - rs.R_tilde, rs.R_tilde - norm, [norm - upper, lower - norm]])
            scale = max(1.0, upper)
            worst = max(worst, float(gaps.max()) / scale)
            violations += int(np.any(gaps > slack * scale))
        out.append(CheckResult("linalg", f"row-sum-chain-k{k}", violations == 0,
                               _round({"matrices": count, "violations": violations, "worst_gap": worst})))
    return out


def _fd_check(f: Callable, df: Callable, theta: np.ndarray, h: float = 1e-5) -> float:
    """Relative error between ``df`` and a central difference of ``f``."""
    k = len(theta)
    exact = np.asarray(df(theta), dtype=float)
    approx = np.empty_like(exact)
    for i in range(k):
        e = np.zeros(k)
        e[i] = h * max(1.0, abs(theta[i]))
        approx[..., i] = (np.asarray(f(theta + e)) - np.asarray(f(theta - e))) / (2.0 * e[i])
    return float(np.max(np.abs(exact - approx)) / max(1.0, float(np.max(np.abs(exact)))))


def check_derivatives(seed: int, n: int = 50, tol: float = 1e-6) -> list[CheckResult]:
    out = []
    for name, spec in PRESETS.items():
        ctx = spec.context(spec.generate(make_rng(seed, f"derivs-{name}"), n))
        theta = np.asarray(ctx.mle, dtype=float)
        m = spec.model
        chain = (m.beta, m.beta_grad, m.beta_hess, m.beta_third_tensor)
        errs = [_fd_check(chain[i], chain[i + 1], theta) for i in range(3)]
        p = spec.prior
        pchain = (p.eta, p.eta_grad, p.eta_hess, p.eta_third_tensor)
        perrs = [_fd_check(pchain[i], pchain[i + 1], theta) for i in range(min(3, int(p.smoothness)))]
        worst = max(errs + perrs)
        out.append(CheckResult("derivs", f"finite-difference-{name}", worst < tol,
                               _round({"beta_rel_err": max(errs), "eta_rel_err": max(perrs, default=0.0)})))
    return out


def check_bounds(seed: int) -> list[CheckResult]:
    out = []
    fig1c = PRESETS["fig1c-normal"]
    for n in (50, 100, 500):
        ctx = fig1c.context(fig1c.generate(make_rng(seed, "data"), n))
        B = Bounds(ctx, BoundConfig(seed=seed))
        exact = math.sqrt(2.0) / math.sqrt(n + 2.0 * fig1c.tau[1])
        vals = {
            "generic": B.mode_univariate("wass").value,
            "lower": B.wass_lower_bound(Kind.MODE),
            "oracle": posterior_oracles(ctx, B.std(Kind.MODE), ("Wass",))["Wass"].value,
        }
        rel = max(abs(v - exact) / exact for v in vals.values())
        out.append(CheckResult("bounds", f"normal-precision-wass-coincide-n{n}", rel < 5e-3,
                               _round({"exact": exact, **vals, "max_rel": rel})))

    pois = PRESETS["fig1b-poisson"]
    ctx = pois.context(pois.generate(make_rng(seed, "data"), 100))
    B = Bounds(ctx, BoundConfig(seed=seed))
    wass = B.mode_tv_wass()[1].value
    lower = B.wass_lower_bound(Kind.MODE)
    out.append(CheckResult("bounds", "poisson-lower-equals-upper", abs(wass - lower) <= 1e-6 * wass,
                           _round({"upper": wass, "lower": lower})))

    std = B.std(Kind.MODE)
    kernel = UpsilonKernel(ctx, std)
    at_zero = kernel.tensor(np.zeros((1, 1)))[0][0]
    half = 0.5 * ctx.log_posterior.third(std.center)
    out.append(CheckResult("bounds", "upsilon-at-zero", bool(np.allclose(at_zero, half, rtol=1e-12, atol=0.0)),
                           _round({"upsilon0": float(at_zero.ravel()[0]), "half_third": float(np.ravel(half)[0])})))
    w = np.linspace(-4.0, 4.0, 9)[:, None]
    red = kernel.tensor(w)[0]
    ten = UpsilonKernel(ctx, std, form="tensor").tensor(w)[0]
    diff = float(np.max(np.abs(red - ten)) / np.max(np.abs(ten)))
    out.append(CheckResult("bounds", "upsilon-forms-agree", diff < 1e-8, _round({"max_rel": diff})))

    uni = B.mode_univariate("wass").value
    out.append(CheckResult("bounds", "univariate-matches-generic", abs(uni - wass) <= 1e-8 * wass,
                           _round({"univariate": uni, "generic": wass})))

    for test in (linear_test_function(), quadratic_test_function()):
        res = B.stein_residual(Kind.MODE, test, n_samples=200_000)
        out.append(CheckResult("bounds", f"stein-residual-poisson-{test.name}",
                               abs(res.value) <= 4.0 * res.std_error,
                               _round({"residual": res.value, "std_error": res.std_error})))
    return out


def check_oracles(seed: int) -> list[CheckResult]:
    out = []
    for alpha, b in ((2.0, 1.0), (10.0, 2.0), (51.5, 12.0)):
        mean, sd = (alpha - 1.0) / b, math.sqrt(alpha - 1.0) / b
        g = stats.gamma(alpha, scale=1.0 / b)
        nrm = stats.norm(mean, sd)
        lo = min(g.ppf(1e-12), nrm.ppf(1e-12))
        hi = max(g.ppf(1 - 1e-12), nrm.ppf(1 - 1e-12))
        est = wass_1d(g.cdf, nrm.cdf, (lo, hi), [0.0])
        expected = gamma_normal_exact_wass(alpha, b)
        rel = abs(est.value - expected) / expected
        out.append(CheckResult("oracles", f"gamma-normal-wass-a{alpha:g}-b{b:g}", rel < 1e-3,
                               _round({"oracle": est.value, "exact": expected, "rel": rel})))

    shift = stats.norm(1.0, 1.0)
    w = wass_1d(stats.norm.cdf, shift.cdf, (-12.0, 13.0))
    tv = tv_quadrature(stats.norm.pdf, shift.pdf, 1, (-12.0, 13.0))
    kol = kolmogorov_1d(stats.norm.cdf, shift.cdf, (-12.0, 13.0))
    tv_exact = 2.0 * stats.norm.cdf(0.5) - 1.0
    out.append(CheckResult("oracles", "normal-shift", abs(w.value - 1.0) < 1e-8 and abs(tv.value - tv_exact) < 1e-8
                           and abs(kol.value - tv_exact) < 1e-8,
                           _round({"wass": w.value, "tv": tv.value, "kol": kol.value})))

    for name, spec in PRESETS.items():
        ctx = spec.context(spec.generate(make_rng(seed, "data"), 100))
        if ctx.k != 1:
            continue
        B = Bounds(ctx, BoundConfig(seed=seed))
        for kind in (Kind.MODE, Kind.MLE):
            o = posterior_oracles(ctx, B.std(kind), ("TV", "Kol"))
            ok = o["Kol"].value <= o["TV"].value + o["Kol"].error_bar + o["TV"].error_bar + 1e-12
            out.append(CheckResult("oracles", f"kol-below-tv-{name}-{kind.value}", ok,
                                   _round({"kol": o["Kol"].value, "tv": o["TV"].value})))
    return out


_RUNNERS = {
    "linalg": check_linalg_chain,
    "derivs": check_derivatives,
    "bounds": check_bounds,
    "oracles": check_oracles,
}


def run(suite: str = "all", seed: int = 0) -> list[CheckResult]:
    names = SUITES if suite == "all" else (suite,)
    results = []
    for name in names:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
        results.extend(_RUNNERS[name](seed))
    return results


def report(results: list[CheckResult], seed: int) -> str:
    body = {
        "seed": seed,
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
        "failures": sorted(f"{r.suite}/{r.name}" for r in results if not r.passed),
    }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
