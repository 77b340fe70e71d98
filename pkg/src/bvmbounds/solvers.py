"""Posterior mode and maximum likelihood estimate by damped Newton iteration.

The mode solves ``grad lambda(theta) = T`` and the MLE solves
``n grad beta(theta) = T``. Both are minimisers of a convex-near-the-solution
objective ``phi(theta) - theta . T``; the iteration takes Newton steps when the
Hessian is positive definite, falls back to scaled gradient steps when it is
not, and backtracks whenever a step leaves the parameter space or fails to
make progress.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import HessianNotPD, HyperparameterOutOfRange, LeftSupport, NonConvergence, NotPositiveDefinite
from .expfam import CanonicalModel, DataSummary, LogPosterior, PriorSpec, Smoothness
from .linalg import SpdFactorization, SymMatrix, eigen_sym, inf_norm, spd_sqrt

MAX_ITER = 200
ARMIJO = 1e-4
MIN_STEP = 2.0**-60


@dataclass(frozen=True, eq=False)
class SolveResult:
    theta: np.ndarray
    hessian: SpdFactorization
    iterations: int
    residuals: tuple[float, ...]

    def __iter__(self):
        yield self.theta
        yield self.hessian

    @property
    def residual(self) -> float:
        return self.residuals[-1]


def default_tol(summary: DataSummary) -> float:
    return 1e-10 * (1.0 + float(np.max(np.abs(summary.T_array), initial=0.0)))


def _default_start(model: CanonicalModel, summary: DataSummary) -> np.ndarray:
    if model.key == "multinomial" and summary.n > 0:
        counts = summary.T_array
        last = summary.n - counts.sum()
        return np.log((counts + 0.5) / (last + 0.5))
    return model.start()


def newton_minimize(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    hessian: Callable[[np.ndarray], np.ndarray],
    in_support: Callable[[np.ndarray], bool],
    x0: np.ndarray,
    tol: float,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, int, list[float]]:
    """Damped Newton with backtracking; returns ``(x, iterations, residuals)``."""
    x = np.array(x0, dtype=float)
    if not in_support(x):
        raise LeftSupport(f"starting point {x.tolist()} is outside the parameter space")
    residuals: list[float] = []
    for it in range(max_iter + 1):
        g = gradient(x)
        res = float(np.max(np.abs(g)))
        residuals.append(res)
        if not math.isfinite(res):
            raise NonConvergence("gradient became non-finite", it, res)
        if res <= tol:
            return x, it, residuals
        if it == max_iter:
            break
        h = np.asarray(hessian(x), dtype=float)
        w, v = eigen_sym(SymMatrix(h))
        if w[0] > 1e-12 * max(inf_norm(h), 1e-300):
            step = -(v @ ((v.T @ g) / w))
        else:
            # Not positive definite here: scaled steepest descent until it is.
            step = -g / max(inf_norm(h), float(np.max(np.abs(g))), 1.0)
        f0 = objective(x)
        slope = float(g @ step)
        t = 1.0
        feasible_seen = False
        while t >= MIN_STEP:
            xn = x + t * step
            if in_support(xn):
                feasible_seen = True
                fn = objective(xn)
                if math.isfinite(fn) and (
                    fn <= f0 + ARMIJO * t * slope or float(np.max(np.abs(gradient(xn)))) < res
                ):
                    break
            t *= 0.5
        else:
            if not feasible_seen:
                raise LeftSupport(f"no feasible step from {x.tolist()}")
            raise NonConvergence("line search failed", it, res)
        x = xn
    raise NonConvergence("Newton iteration limit reached", max_iter, residuals[-1])


def _factor(h: np.ndarray, label: str) -> SpdFactorization:
    try:
        return spd_sqrt(SymMatrix(h))
    except NotPositiveDefinite as err:
        raise HessianNotPD(f"Hessian of {label} is not positive definite at the solution", err.lambda_min) from err


def find_mode(
    model: CanonicalModel,
    prior: PriorSpec,
    summary: DataSummary,
    init=None,
    tol: float | None = None,
) -> SolveResult:
    """Posterior mode and the factorised Hessian of ``lambda`` there."""
    lp = LogPosterior(model, prior, summary)
    T = summary.T_array
    tol = default_tol(summary) if tol is None else tol
    x0 = _default_start(model, summary) if init is None else np.asarray(init, dtype=float)
    x, it, res = newton_minimize(
        lambda th: float(lp.value(th, strict=False) - th @ T),
        lambda th: lp.grad(th, strict=False) - T,
        lambda th: lp.hess(th, strict=False),
        model.support_check,
        x0,
        tol,
    )
    return SolveResult(x, _factor(lp.hess(x, strict=False), "lambda"), it, tuple(res))


def find_mle(model: CanonicalModel, summary: DataSummary, init=None, tol: float | None = None) -> SolveResult:
    """MLE and the factorised Hessian of ``beta`` (not ``n beta``) there."""
    if summary.n < 1 or not model.mle_exists(summary):
        raise LeftSupport(f"the MLE of the {model.key} model does not exist in the interior for this sample")
    n = summary.n
    T = summary.T_array
    tol = default_tol(summary) if tol is None else tol
    x0 = _default_start(model, summary) if init is None else np.asarray(init, dtype=float)
    x, it, res = newton_minimize(
        lambda th: float(n * model.beta(th) - th @ T),
        lambda th: n * model.beta_grad(th) - T,
        lambda th: n * model.beta_hess(th),
        model.support_check,
        x0,
        tol,
    )
    return SolveResult(x, _factor(model.beta_hess(x), "beta"), it, tuple(res))


@dataclass(frozen=True)
class AssumptionFlags:
    which: str
    flags: dict[str, bool]
    details: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.flags.items() if not v]


@dataclass(frozen=True, eq=False)
class PosteriorContext:
    """A model, prior and sample, with the mode and MLE solved lazily."""

    model: CanonicalModel
    prior: PriorSpec
    summary: DataSummary

    def __post_init__(self):
        if self.summary.n < self.prior.min_n:
            raise HyperparameterOutOfRange(
                f"prior {self.prior.name} with tau={self.prior.tau} needs n >= {self.prior.min_n}"
            )
        LogPosterior(self.model, self.prior, self.summary)

    @property
    def n(self) -> int:
        return self.summary.n

    @property
    def k(self) -> int:
        return self.model.k

    @cached_property
    def log_posterior(self) -> LogPosterior:
        return LogPosterior(self.model, self.prior, self.summary)

    @cached_property
    def mode_result(self) -> SolveResult:
        return find_mode(self.model, self.prior, self.summary)

    @cached_property
    def mle_result(self) -> SolveResult:
        return find_mle(self.model, self.summary)

    @property
    def mode(self) -> np.ndarray:
        return self.mode_result.theta

    @property
    def mle(self) -> np.ndarray:
        return self.mle_result.theta

    @property
    def hess_lambda_at_mode(self) -> SpdFactorization:
        return self.mode_result.hessian

    @property
    def hess_beta_at_mle(self) -> SpdFactorization:
        return self.mle_result.hessian

    @cached_property
    def law(self):
        return self.prior.posterior_law(self.summary)


def check_assumptions(ctx: PosteriorContext, which: str) -> AssumptionFlags:
    """Evaluate the standing assumptions of the mode, MLE or weak-prior bounds.

    Solver failures are recorded as failed flags, never raised.
    """
    flags: dict[str, bool] = {}
    details: dict[str, float] = {}
    T = ctx.summary.T_array
    scale = 1e-9 * (1.0 + float(np.max(np.abs(T), initial=0.0)))
    flags["n_floor"] = ctx.n >= ctx.prior.min_n
    smooth = ctx.prior.smoothness

    def solved(getter, key_solve, key_pd):
        try:
            res = getter()
        except NotPositiveDefinite as err:
            flags[key_solve] = True
            flags[key_pd] = False
            details[f"{key_pd}_lambda_min"] = err.lambda_min
            return None
        except (NonConvergence, LeftSupport) as err:
            flags[key_solve] = False
            flags[key_pd] = False
            details[f"{key_solve}_error"] = float(getattr(err, "last_residual", math.nan))
            return None
        flags[key_solve] = res.residual <= scale
        flags[key_pd] = res.hessian.lambda_min > 0
        details[f"{key_solve}_residual"] = res.residual
        details[f"{key_pd}_lambda_min"] = res.hessian.lambda_min
        return res

    if which == "mode":
        flags["A1"] = ctx.model.k == ctx.summary.k
        solved(lambda: ctx.mode_result, "A2", "A4")
        flags["A3"] = smooth >= Smoothness.C3
    elif which == "mle":
        flags["A1"] = ctx.model.k == ctx.summary.k
        solved(lambda: ctx.mle_result, "A2'", "A4'")
        flags["A3"] = smooth >= Smoothness.C3
    elif which == "weak_prior":
        flags["A1"] = ctx.model.k == ctx.summary.k
        solved(lambda: ctx.mle_result, "A2'", "A4'")
        flags["A3dagger"] = smooth >= Smoothness.C1
    else:
        raise ValueError(f"unknown assumption set {which!r}")
    details["smoothness"] = float(int(smooth))
    return AssumptionFlags(which, flags, details)
