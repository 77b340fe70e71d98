"""Canonical exponential families, prior exponents and the log-posterior.

A model is ``p(x | theta) = exp(theta . h(x) - g(x) - beta(theta))`` and a
prior is ``exp(-eta(theta))``. With ``T = sum_i h(x_i)`` the posterior
density is proportional to ``exp(theta . T - lambda(theta))`` where
``lambda = n beta + eta``.

All derivative callables are vectorised: they take ``theta`` of shape
``(..., k)`` and return arrays of shape ``(...)``, ``(..., k)``,
``(..., k, k)`` and ``(..., k, k, k)`` for orders 0 to 3. Every derivative is
written out by hand; finite differences are used only in the test-suite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import special

from . import laws
from .errors import (
    AssumptionFailure,
    DimensionMismatch,
    EmptyData,
    HyperparameterOutOfRange,
    ObservationOutOfSupport,
    SmoothnessViolation,
)
from .linalg import SymMatrix

ArrayFn = Callable[[np.ndarray], np.ndarray]


class Smoothness(enum.IntEnum):
    """Highest derivative order of ``eta`` that the bounds may rely on."""

    C1 = 1
    C2 = 2
    C3 = 3


@dataclass(frozen=True)
class DataSummary:
    """Sufficient statistics of an i.i.d. sample.

    ``extras`` holds statistics beyond ``T`` needed by closed-form formulas:
    ``"s2_times_n"`` is ``sum (x_i - m)^2`` for the normal-precision model and
    ``"sum_sq"`` is ``sum x_i^2`` for the normal mean+variance model.
    """

    n: int
    T: tuple[float, ...]
    extras: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise EmptyData("sample size must be non-negative")
        if not all(math.isfinite(t) for t in self.T):
            raise ValueError("sufficient statistics must be finite")
        object.__setattr__(self, "T", tuple(float(t) for t in self.T))
        object.__setattr__(self, "extras", dict(self.extras))

    @property
    def k(self) -> int:
        return len(self.T)

    @property
    def T_array(self) -> np.ndarray:
        return np.asarray(self.T, dtype=float)

    @property
    def mean(self) -> np.ndarray:
        return self.T_array / self.n


@dataclass(frozen=True, eq=False)
class CanonicalModel:
    key: str
    k: int
    d: int
    beta: ArrayFn
    beta_grad: ArrayFn
    beta_hess: ArrayFn
    beta_third_tensor: ArrayFn
    suff_stat: ArrayFn
    carrier: ArrayFn
    in_support: ArrayFn
    obs_ok: ArrayFn
    mle_exists: Callable[[DataSummary], bool]
    extras: Callable[[np.ndarray], dict] = lambda x: {}
    params: Mapping[str, float] = field(default_factory=dict)
    # Feasible point used to start solvers when nothing better is known.
    interior_point: tuple[float, ...] | None = None

    def beta_third(self, theta, l: int, u: int, v: int) -> float:
        return float(self.beta_third_tensor(np.asarray(theta, dtype=float))[..., l, u, v])

    def hess_matrix(self, theta) -> SymMatrix:
        return SymMatrix(self.beta_hess(np.asarray(theta, dtype=float)))

    def support_check(self, theta) -> bool:
        return bool(self.in_support(np.asarray(theta, dtype=float)))

    def start(self) -> np.ndarray:
        if self.interior_point is not None:
            return np.asarray(self.interior_point, dtype=float)
        return np.zeros(self.k)


@dataclass(frozen=True, eq=False)
class PriorSpec:
    name: str
    k: int
    smoothness: Smoothness
    eta: ArrayFn
    eta_grad: ArrayFn
    eta_hess: ArrayFn
    eta_third_tensor: ArrayFn
    eta_grad_sup: float | None = None
    tau: tuple[float, ...] = ()
    # Smallest n for which the posterior is proper (improper settings only).
    min_n: int = 0
    # Factory for the exact posterior law, or None when there is none.
    law: Callable[[DataSummary], laws.ExactLaw] | None = None

    def derivative(self, order: int, theta, strict: bool = True) -> np.ndarray:
        if strict and order > int(self.smoothness):
            raise SmoothnessViolation(
                f"prior {self.name} is declared {self.smoothness.name}; order {order} derivative requested"
            )
        fn = (self.eta, self.eta_grad, self.eta_hess, self.eta_third_tensor)[order]
        return fn(np.asarray(theta, dtype=float))

    def eta_third(self, theta, l: int, u: int, v: int) -> float:
        return float(self.derivative(3, theta)[..., l, u, v])

    def posterior_law(self, summary: DataSummary) -> laws.ExactLaw | None:
        return None if self.law is None else self.law(summary)


@dataclass(frozen=True, eq=False)
class LogPosterior:
    """``lambda = n beta + eta`` and its derivatives for a fixed sample."""

    model: CanonicalModel
    prior: PriorSpec
    summary: DataSummary

    def __post_init__(self):
        if self.model.k != self.prior.k or self.summary.k != self.model.k:
            raise DimensionMismatch(
                f"model k={self.model.k}, prior k={self.prior.k}, summary k={self.summary.k}"
            )

    @property
    def n(self) -> int:
        return self.summary.n

    def derivative(self, order: int, theta, strict: bool = True) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        model_fn = (self.model.beta, self.model.beta_grad, self.model.beta_hess, self.model.beta_third_tensor)[order]
        eta = self.prior.derivative(order, theta, strict=strict)
        if self.n == 0:
            return eta
        return self.n * model_fn(theta) + eta

    def value(self, theta, strict: bool = True):
        return self.derivative(0, theta, strict)

    def grad(self, theta, strict: bool = True):
        return self.derivative(1, theta, strict)

    def hess(self, theta, strict: bool = True):
        return self.derivative(2, theta, strict)

    def third(self, theta, strict: bool = True):
        return self.derivative(3, theta, strict)

    def log_kernel(self, theta, strict: bool = False) -> np.ndarray:
        """Unnormalised log posterior density ``theta . T - lambda(theta)``."""
        theta = np.asarray(theta, dtype=float)
        inside = self.model.in_support(theta)
        safe = np.where(inside[..., None], theta, self.model.start())
        out = safe @ self.summary.T_array - self.value(safe, strict)
        return np.where(inside, out, -np.inf)


def lambda_derivs(ctx, theta, order: int, strict: bool = True):
    """Value, gradient, Hessian or third-derivative accessor of ``lambda``.

    ``ctx`` is anything with ``model``, ``prior`` and ``summary`` attributes.
    Order 2 returns a ``SymMatrix``; order 3 returns a callable
    ``(l, u, v) -> float`` so that callers never need the full tensor.
    """
    lp = ctx if isinstance(ctx, LogPosterior) else LogPosterior(ctx.model, ctx.prior, ctx.summary)
    theta = np.asarray(theta, dtype=float)
    if order == 0:
        return float(lp.value(theta, strict))
    if order == 1:
        return np.asarray(lp.grad(theta, strict))
    if order == 2:
        return SymMatrix(lp.hess(theta, strict))
    if order == 3:
        tensor = lp.third(theta, strict)
        return lambda l, u, v: float(tensor[l, u, v])
    raise ValueError(f"order must be 0..3, got {order}")


def summarize(model: CanonicalModel, data) -> DataSummary:
    """Compensated sums of the sufficient statistics."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise EmptyData("no observations")
    if model.d == 1:
        x = x.reshape(-1)
    elif x.ndim != 2 or x.shape[1] != model.d:
        raise DimensionMismatch(f"expected observations of dimension {model.d}, got shape {x.shape}")
    ok = np.asarray(model.obs_ok(x), dtype=bool)
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise ObservationOutOfSupport(f"observation {bad} ({x[bad]!r}) is outside the support of {model.key}")
    h = np.asarray(model.suff_stat(x), dtype=float).reshape(len(x), model.k)
    T = tuple(math.fsum(h[:, u]) for u in range(model.k))
    return DataSummary(n=len(x), T=T, extras=model.extras(x))


# --------------------------------------------------------------------------
# helpers for scalar-parameter families


def _t(theta):
    return np.asarray(theta, dtype=float)[..., 0]


def _g(v):
    return np.asarray(v)[..., None]


def _h(v):
    return np.asarray(v)[..., None, None]


def _c(v):
    return np.asarray(v)[..., None, None, None]


def _scalar_bundle(f0, f1, f2, f3):
    return (
        lambda th: f0(_t(th)),
        lambda th: _g(f1(_t(th))),
        lambda th: _h(f2(_t(th))),
        lambda th: _c(f3(_t(th))),
    )


def _whole_real(theta):
    return np.all(np.isfinite(np.asarray(theta, dtype=float)), axis=-1)


def _positive(theta):
    t = _t(theta)
    return np.isfinite(t) & (t > 0)


def _negative(theta):
    t = _t(theta)
    return np.isfinite(t) & (t < 0)


def _is_int(x):
    return np.isfinite(x) & (np.floor(x) == x)


def _sig(t):
    return special.expit(t)


def _check(cond: bool, message: str):
    if not cond:
        raise HyperparameterOutOfRange(message)


# --------------------------------------------------------------------------
# models


def bernoulli_model() -> CanonicalModel:
    b0, b1, b2, b3 = _scalar_bundle(
        lambda t: np.logaddexp(0.0, t),
        _sig,
        lambda t: _sig(t) * _sig(-t),
        lambda t: _sig(t) * _sig(-t) * (1.0 - 2.0 * _sig(t)),
    )
    return CanonicalModel(
        key="bernoulli",
        k=1,
        d=1,
        beta=b0,
        beta_grad=b1,
        beta_hess=b2,
        beta_third_tensor=b3,
        suff_stat=lambda x: x,
        carrier=lambda x: np.zeros_like(x),
        in_support=_whole_real,
        obs_ok=lambda x: (x == 0) | (x == 1),
        mle_exists=lambda s: 0 < s.T[0] < s.n,
    )


def poisson_model() -> CanonicalModel:
    e = np.exp
    b0, b1, b2, b3 = _scalar_bundle(e, e, e, e)
    return CanonicalModel(
        key="poisson",
        k=1,
        d=1,
        beta=b0,
        beta_grad=b1,
        beta_hess=b2,
        beta_third_tensor=b3,
        suff_stat=lambda x: x,
        carrier=lambda x: special.gammaln(x + 1.0),
        in_support=_whole_real,
        obs_ok=lambda x: _is_int(x) & (x >= 0),
        mle_exists=lambda s: s.T[0] > 0,
    )


def normal_precision_model(m: float = 0.0) -> CanonicalModel:
    """Normal with known mean ``m``; the parameter is the precision."""
    with_pos = lambda f: (lambda t: f(np.where(t > 0, t, np.nan)))  # noqa: E731
    b0, b1, b2, b3 = _scalar_bundle(
        with_pos(lambda t: -0.5 * np.log(t)),
        with_pos(lambda t: -0.5 / t),
        with_pos(lambda t: 0.5 / t**2),
        with_pos(lambda t: -1.0 / t**3),
    )
    return CanonicalModel(
        key="normal-precision",
        k=1,
        d=1,
        beta=b0,
        beta_grad=b1,
        beta_hess=b2,
        beta_third_tensor=b3,
        suff_stat=lambda x: -0.5 * (x - m) ** 2,
        carrier=lambda x: np.full_like(x, 0.5 * math.log(2.0 * math.pi)),
        in_support=_positive,
        obs_ok=np.isfinite,
        mle_exists=lambda s: s.T[0] < 0,
        extras=lambda x: {"s2_times_n": math.fsum((x - m) ** 2)},
        params={"m": float(m)},
        interior_point=(1.0,),
    )


def weibull_model(shape: float = 2.0) -> CanonicalModel:
    """Weibull with known shape; the parameter is ``ell^(-shape)``."""
    if not shape > 0:
        raise HyperparameterOutOfRange(f"Weibull shape must be > 0, got {shape}")
    with_pos = lambda f: (lambda t: f(np.where(t > 0, t, np.nan)))  # noqa: E731
    b0, b1, b2, b3 = _scalar_bundle(
        with_pos(lambda t: -np.log(t)),
        with_pos(lambda t: -1.0 / t),
        with_pos(lambda t: 1.0 / t**2),
        with_pos(lambda t: -2.0 / t**3),
    )
    return CanonicalModel(
        key="weibull",
        k=1,
        d=1,
        beta=b0,
        beta_grad=b1,
        beta_hess=b2,
        beta_third_tensor=b3,
        suff_stat=lambda x: -(x**shape),
        carrier=lambda x: -math.log(shape) - (shape - 1.0) * np.log(x),
        in_support=_positive,
        obs_ok=lambda x: np.isfinite(x) & (x > 0),
        mle_exists=lambda s: s.T[0] < 0,
        params={"shape": float(shape)},
        interior_point=(1.0,),
    )


def negbin_model(r: float = 5.0) -> CanonicalModel:
    """Negative binomial with known number of failures ``r``; ``theta = log p``."""
    if not r > 0:
        raise HyperparameterOutOfRange(f"negative binomial r must be > 0, got {r}")

    def neg(f):
        return lambda t: f(np.where(t < 0, t, np.nan))

    b0, b1, b2, b3 = _scalar_bundle(
        neg(lambda t: -r * np.log(-np.expm1(t))),
        neg(lambda t: r * np.exp(t) / -np.expm1(t)),
        neg(lambda t: r * np.exp(t) / np.expm1(t) ** 2),
        neg(lambda t: r * np.exp(t) * (1.0 + np.exp(t)) / (-np.expm1(t)) ** 3),
    )
    return CanonicalModel(
        key="negbin",
        k=1,
        d=1,
        beta=b0,
        beta_grad=b1,
        beta_hess=b2,
        beta_third_tensor=b3,
        suff_stat=lambda x: x,
        carrier=lambda x: -(special.gammaln(x + r) - special.gammaln(r) - special.gammaln(x + 1.0)),
        in_support=_negative,
        obs_ok=lambda x: _is_int(x) & (x >= 0),
        mle_exists=lambda s: s.T[0] > 0,
        params={"r": float(r)},
        interior_point=(-1.0,),
    )


def _softmax_tail(theta):
    """Probabilities ``p_u = e^theta_u / (1 + sum e^theta)`` for ``u < K``."""
    t = np.asarray(theta, dtype=float)
    full = np.concatenate([t, np.zeros(t.shape[:-1] + (1,))], axis=-1)
    p = special.softmax(full, axis=-1)
    return p[..., :-1]


def _multinomial_third(p):
    k = p.shape[-1]
    eye = np.eye(k)
    d3 = np.zeros((k, k, k))
    for i in range(k):
        d3[i, i, i] = 1.0
    out = np.einsum("...u,uvw->...uvw", p, d3)
    out -= np.einsum("uv,...u,...w->...uvw", eye, p, p)
    out -= np.einsum("uw,...u,...v->...uvw", eye, p, p)
    out -= np.einsum("vw,...u,...v->...uvw", eye, p, p)
    out += 2.0 * np.einsum("...u,...v,...w->...uvw", p, p, p)
    return out


def multinomial_model(categories: int = 3) -> CanonicalModel:
    """Single-trial multinomial with ``categories`` outcomes, one-hot data."""
    if categories < 2:
        raise HyperparameterOutOfRange("multinomial needs at least two categories")
    k = categories - 1

    def b0(th):
        t = np.asarray(th, dtype=float)
        return special.logsumexp(np.concatenate([t, np.zeros(t.shape[:-1] + (1,))], axis=-1), axis=-1)

    def b2(th):
        p = _softmax_tail(th)
        return np.einsum("...u,uv->...uv", p, np.eye(k)) - p[..., :, None] * p[..., None, :]

    def obs_ok(x):
        return np.all((x == 0) | (x == 1), axis=1) & (x.sum(axis=1) == 1)

    return CanonicalModel(
        key="multinomial",
        k=k,
        d=categories,
        beta=b0,
        beta_grad=_softmax_tail,
        beta_hess=b2,
        beta_third_tensor=lambda th: _multinomial_third(_softmax_tail(th)),
        suff_stat=lambda x: x[:, :k],
        carrier=lambda x: np.zeros(len(x)),
        in_support=_whole_real,
        obs_ok=obs_ok,
        mle_exists=lambda s: all(t > 0 for t in s.T) and math.fsum(s.T) < s.n,
        params={"categories": float(categories)},
    )


def _nmv_parts(theta):
    t = np.asarray(theta, dtype=float)
    t1 = t[..., 0]
    t2 = np.where(t[..., 1] > 0, t[..., 1], np.nan)
    return t1, t2


def _nmv_A(theta):
    """Derivatives of ``A = theta_1^2 / (2 theta_2)`` through order 3."""
    t1, t2 = _nmv_parts(theta)
    shape = t1.shape
    a0 = t1**2 / (2.0 * t2)
    a1 = np.stack([t1 / t2, -(t1**2) / (2.0 * t2**2)], axis=-1)
    a2 = np.empty(shape + (2, 2))
    a2[..., 0, 0] = 1.0 / t2
    a2[..., 0, 1] = a2[..., 1, 0] = -t1 / t2**2
    a2[..., 1, 1] = t1**2 / t2**3
    a3 = np.empty(shape + (2, 2, 2))
    a3[..., 0, 0, 0] = 0.0
    for idx in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
        a3[(Ellipsis,) + idx] = -1.0 / t2**2
    for idx in ((0, 1, 1), (1, 0, 1), (1, 1, 0)):
        a3[(Ellipsis,) + idx] = 2.0 * t1 / t2**3
    a3[..., 1, 1, 1] = -3.0 * t1**2 / t2**4
    return a0, a1, a2, a3


def _nmv_B(theta):
    """Derivatives of ``B = log(2 pi / theta_2) / 2`` through order 3."""
    t1, t2 = _nmv_parts(theta)
    shape = t1.shape
    z = np.zeros(shape)
    b0 = 0.5 * np.log(2.0 * math.pi / t2)
    b1 = np.stack([z, -0.5 / t2], axis=-1)
    b2 = np.zeros(shape + (2, 2))
    b2[..., 1, 1] = 0.5 / t2**2
    b3 = np.zeros(shape + (2, 2, 2))
    b3[..., 1, 1, 1] = -1.0 / t2**3
    return b0, b1, b2, b3


def normal_meanvar_model() -> CanonicalModel:
    """Normal with unknown mean and variance; ``theta = (mu / s2, 1 / s2)``."""

    def part(order):
        return lambda th: _nmv_A(th)[order] + _nmv_B(th)[order]

    def in_support(theta):
        t = np.asarray(theta, dtype=float)
        return np.isfinite(t[..., 0]) & np.isfinite(t[..., 1]) & (t[..., 1] > 0)

    return CanonicalModel(
        key="normal-meanvar",
        k=2,
        d=1,
        beta=part(0),
        beta_grad=part(1),
        beta_hess=part(2),
        beta_third_tensor=part(3),
        suff_stat=lambda x: np.column_stack([x, -0.5 * x**2]),
        carrier=lambda x: np.zeros_like(x),
        in_support=in_support,
        obs_ok=np.isfinite,
        mle_exists=lambda s: s.n >= 2 and (-2.0 * s.T[1]) / s.n - (s.T[0] / s.n) ** 2 > 0,
        extras=lambda x: {"sum_sq": math.fsum(x**2)},
        interior_point=(0.0, 1.0),
    )


# --------------------------------------------------------------------------
# priors


def flat_prior(k: int) -> PriorSpec:
    """``eta = 0``: the improper flat prior on the natural parameter."""

    def zeros(extra):
        return lambda th: np.zeros(np.asarray(th).shape[:-1] + (k,) * extra)

    return PriorSpec("flat", k, Smoothness.C3, zeros(0), zeros(1), zeros(2), zeros(3), eta_grad_sup=0.0)


def bernoulli_beta_prior(tau1: float, tau2: float) -> PriorSpec:
    _check(tau1 > 0, f"bernoulli-beta needs tau1 > 0, got {tau1}")
    _check(tau2 - tau1 > 0, f"bernoulli-beta needs tau2 - tau1 > 0, got tau1={tau1}, tau2={tau2}")
    e0, e1, e2, e3 = _scalar_bundle(
        lambda t: -tau1 * t + tau2 * np.logaddexp(0.0, t),
        lambda t: -tau1 + tau2 * _sig(t),
        lambda t: tau2 * _sig(t) * _sig(-t),
        lambda t: tau2 * _sig(t) * _sig(-t) * (1.0 - 2.0 * _sig(t)),
    )

    def law(s: DataSummary):
        a, b = s.T[0] + tau1, s.n + tau2 - s.T[0] - tau1
        if not (a > 0 and b > 0):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.LogitBeta(a, b)

    return PriorSpec(
        "bernoulli-beta", 1, Smoothness.C3, e0, e1, e2, e3,
        eta_grad_sup=max(tau1, tau2 - tau1), tau=(tau1, tau2), law=law,
    )


def hyperbolic_prior() -> PriorSpec:
    """Improper prior ``pi_0 = cosh(theta)`` on the log-odds.

    Tagged C1: only the bounded first derivative ``|eta'| <= 1`` is used by
    the weak-prior bound. Higher derivatives are available to the solver.
    """
    e0, e1, e2, e3 = _scalar_bundle(
        lambda t: -(np.logaddexp(t, -t) - math.log(2.0)),
        lambda t: -np.tanh(t),
        lambda t: -1.0 / np.cosh(t) ** 2,
        lambda t: 2.0 * np.tanh(t) / np.cosh(t) ** 2,
    )

    def law(s: DataSummary):
        T, n = s.T[0], s.n
        if not (1 < T < n - 1):
            raise AssumptionFailure("hyperbolic-prior posterior needs 1 < sum x < n - 1", {"A0": False})
        la = special.betaln(T + 1, n - T - 1)
        lb = special.betaln(T - 1, n - T + 1)
        top = max(la, lb)
        wa, wb = math.exp(la - top), math.exp(lb - top)
        return laws.Mixture1D(
            (wa / (wa + wb), wb / (wa + wb)),
            (laws.LogitBeta(T + 1, n - T - 1), laws.LogitBeta(T - 1, n - T + 1)),
        )

    return PriorSpec("bernoulli-hyperbolic", 1, Smoothness.C1, e0, e1, e2, e3, eta_grad_sup=1.0, law=law, min_n=3)


def poisson_gamma_prior(tau1: float, tau2: float) -> PriorSpec:
    _check(tau1 > 0, f"poisson-gamma needs tau1 > 0, got {tau1}")
    _check(tau2 >= 0, f"poisson-gamma needs tau2 > 0 (tau2 = 0 only for the Jeffreys prior), got {tau2}")
    e0, e1, e2, e3 = _scalar_bundle(
        lambda t: -tau1 * t + tau2 * np.exp(t),
        lambda t: -tau1 + tau2 * np.exp(t),
        lambda t: tau2 * np.exp(t),
        lambda t: tau2 * np.exp(t),
    )

    def law(s: DataSummary):
        if not s.n + tau2 > 0:
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.LogGamma(s.T[0] + tau1, s.n + tau2)

    return PriorSpec(
        "poisson-gamma", 1, Smoothness.C3, e0, e1, e2, e3,
        eta_grad_sup=None if tau2 > 0 else tau1, tau=(tau1, tau2), law=law, min_n=1 if tau2 == 0 else 0,
    )


def _gamma_exponent(tau1: float, tau2: float, key: str, jeffreys_n: int):
    """``eta = tau1 theta - tau2 log theta`` on ``theta > 0``."""
    jeffreys = tau1 == 0 and tau2 == -1
    _check(
        jeffreys or (tau1 > 0 and tau2 > -1),
        f"{key} needs tau1 > 0 and tau2 > -1 (or the Jeffreys point tau1=0, tau2=-1), got ({tau1}, {tau2})",
    )

    def pos(f):
        return lambda t: f(np.where(t > 0, t, np.nan))

    bundle = _scalar_bundle(
        pos(lambda t: tau1 * t - tau2 * np.log(t)),
        pos(lambda t: tau1 - tau2 / t),
        pos(lambda t: tau2 / t**2),
        pos(lambda t: -2.0 * tau2 / t**3),
    )
    return bundle, (jeffreys_n if jeffreys else 0)


def normal_precision_gamma_prior(tau1: float, tau2: float) -> PriorSpec:
    (e0, e1, e2, e3), min_n = _gamma_exponent(tau1, tau2, "normal-precision-gamma", 3)

    def law(s: DataSummary):
        shape = s.n / 2.0 + tau2 + 1.0
        rate = -s.T[0] + tau1
        if not (shape > 0 and rate > 0):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.GammaLaw(shape, rate)

    return PriorSpec("normal-precision-gamma", 1, Smoothness.C3, e0, e1, e2, e3, tau=(tau1, tau2), law=law, min_n=min_n)


def weibull_gamma_prior(tau1: float, tau2: float) -> PriorSpec:
    (e0, e1, e2, e3), min_n = _gamma_exponent(tau1, tau2, "weibull-gamma", 2)

    def law(s: DataSummary):
        shape = s.n + tau2 + 1.0
        rate = -s.T[0] + tau1
        if not (shape > 0 and rate > 0):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.GammaLaw(shape, rate)

    return PriorSpec("weibull-gamma", 1, Smoothness.C3, e0, e1, e2, e3, tau=(tau1, tau2), law=law, min_n=min_n)


def negbin_prior(tau1: float, tau2: float, r: float) -> PriorSpec:
    jeffreys = tau1 == 0.5 and tau2 == -1
    _check(tau1 > 0, f"negbin-conjugate needs tau1 > 0, got {tau1}")
    _check(jeffreys or tau2 > -1, f"negbin-conjugate needs tau2 > -1 (or the Jeffreys point 1/2, -1), got {tau2}")

    def neg(f):
        return lambda t: f(np.where(t < 0, t, np.nan))

    e0, e1, e2, e3 = _scalar_bundle(
        neg(lambda t: -tau1 * t - tau2 * np.log(-np.expm1(t))),
        neg(lambda t: -tau1 + tau2 * np.exp(t) / -np.expm1(t)),
        neg(lambda t: tau2 * np.exp(t) / np.expm1(t) ** 2),
        neg(lambda t: tau2 * np.exp(t) * (1.0 + np.exp(t)) / (-np.expm1(t)) ** 3),
    )

    def law(s: DataSummary):
        a, b = s.T[0] + tau1, s.n * r + tau2 + 1.0
        if not (a > 0 and b > 0):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.LogBeta(a, b)

    return PriorSpec("negbin-conjugate", 1, Smoothness.C3, e0, e1, e2, e3, tau=(tau1, tau2), law=law)


def dirichlet_prior(tau: tuple[float, ...]) -> PriorSpec:
    """``eta = -sum_{u<K} tau_u theta_u + tau_K log(1 + sum e^theta)``."""
    tau = tuple(float(t) for t in tau)
    if len(tau) < 2:
        raise HyperparameterOutOfRange("multinomial-dirichlet needs at least two hyperparameters")
    head = np.asarray(tau[:-1])
    tail = tau[-1]
    k = len(head)
    _check(bool(np.all(head > -1)), f"multinomial-dirichlet needs tau_j > -1 for j < K, got {tau}")
    _check(tail > head.sum() - 1, f"multinomial-dirichlet needs tau_K > sum_j tau_j - 1, got {tau}")
    mm = multinomial_model(k + 1)

    def law(s: DataSummary):
        alpha = [t + h for t, h in zip(s.T, head)]
        alpha.append(s.n + tail - math.fsum(alpha))
        if not all(a > 0 for a in alpha):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.LogRatioDirichlet(tuple(alpha))

    return PriorSpec(
        "multinomial-dirichlet", k, Smoothness.C3,
        lambda th: -(np.asarray(th) @ head) + tail * mm.beta(th),
        lambda th: -head + tail * mm.beta_grad(th),
        lambda th: tail * mm.beta_hess(th),
        lambda th: tail * mm.beta_third_tensor(th),
        tau=tau, law=law,
    )


def normal_meanvar_prior(tau1: float, tau2: float, tau3: float, tau4: float) -> PriorSpec:
    """``eta = 2 tau1 B + 2 tau2 A - tau3 theta_1 + tau4 theta_2``."""
    jeffreys = (tau1, tau2, tau3, tau4) == (3.0, 0.0, 0.0, 0.0)
    if not jeffreys:
        _check(tau4 > 0, f"normal-meanvar-conjugate needs tau4 > 0, got {tau4}")
        _check(tau1 > -1.5, f"normal-meanvar-conjugate needs tau1 > -3/2, got {tau1}")
        _check(4 * tau4 * tau2 > tau3**2, f"normal-meanvar-conjugate needs 4*tau4*tau2 > tau3^2, got {(tau1, tau2, tau3, tau4)}")
    lin = np.array([-tau3, tau4])

    def part(order):
        def fn(th):
            out = 2.0 * tau2 * _nmv_A(th)[order] + 2.0 * tau1 * _nmv_B(th)[order]
            if order == 0:
                out = out + np.asarray(th) @ lin
            elif order == 1:
                out = out + lin
            return out

        return fn

    def law(s: DataSummary):
        kappa = s.n + 2.0 * tau2
        S = s.T[0] + tau3
        shape = s.n / 2.0 + tau1 + 1.5
        rate = -s.T[1] + tau4 - S**2 / (2.0 * kappa)
        if not (kappa > 0 and shape > 0 and rate > 0):
            raise AssumptionFailure("posterior is improper", {"A0": False})
        return laws.NormalGamma(shape, rate, S / kappa, kappa)

    return PriorSpec(
        "normal-meanvar-conjugate", 2, Smoothness.C3, part(0), part(1), part(2), part(3),
        tau=(tau1, tau2, tau3, tau4), law=law, min_n=2 if jeffreys else 0,
    )


# --------------------------------------------------------------------------
# catalogue


@dataclass(frozen=True)
class ModelEntry:
    """A model/prior pair addressable by a CLI key."""

    key: str
    make_model: Callable[..., CanonicalModel]
    make_prior: Callable[..., PriorSpec]
    model_params: tuple[str, ...] = ()
    n_tau: int | None = None
    jeffreys: tuple[float, ...] | None = None

    def build(self, tau=(), **model_params) -> tuple[CanonicalModel, PriorSpec]:
        params = {p: model_params[p] for p in self.model_params if p in model_params}
        tau = tuple(float(t) for t in tau)
        if self.key == "multinomial-dirichlet":
            params.setdefault("categories", len(tau))
            if int(params["categories"]) != len(tau):
                raise DimensionMismatch(f"{int(params['categories'])} categories but {len(tau)} hyperparameters")
            params["categories"] = int(params["categories"])
        model = self.make_model(**params)
        if self.n_tau is not None and len(tau) != self.n_tau:
            raise HyperparameterOutOfRange(f"{self.key} takes {self.n_tau} hyperparameters, got {len(tau)}")
        return model, self.make_prior(model, tau)


def builtin_models() -> dict[str, ModelEntry]:
    return {
        "bernoulli-beta": ModelEntry(
            "bernoulli-beta", bernoulli_model, lambda m, t: bernoulli_beta_prior(*t), n_tau=2, jeffreys=(0.5, 1.0)
        ),
        "bernoulli-hyperbolic": ModelEntry(
            "bernoulli-hyperbolic", bernoulli_model, lambda m, t: hyperbolic_prior(), n_tau=0
        ),
        "poisson-gamma": ModelEntry(
            "poisson-gamma", poisson_model, lambda m, t: poisson_gamma_prior(*t), n_tau=2, jeffreys=(0.5, 0.0)
        ),
        "normal-precision-gamma": ModelEntry(
            "normal-precision-gamma", normal_precision_model, lambda m, t: normal_precision_gamma_prior(*t),
            model_params=("m",), n_tau=2, jeffreys=(0.0, -1.0),
        ),
        "weibull-gamma": ModelEntry(
            "weibull-gamma", weibull_model, lambda m, t: weibull_gamma_prior(*t),
            model_params=("shape",), n_tau=2, jeffreys=(0.0, -1.0),
        ),
        "negbin-conjugate": ModelEntry(
            "negbin-conjugate", negbin_model, lambda m, t: negbin_prior(*t, r=m.params["r"]),
            model_params=("r",), n_tau=2, jeffreys=(0.5, -1.0),
        ),
        "multinomial-dirichlet": ModelEntry(
            "multinomial-dirichlet", lambda categories=3: multinomial_model(categories),
            lambda m, t: dirichlet_prior(t), model_params=("categories",),
        ),
        "normal-meanvar-conjugate": ModelEntry(
            "normal-meanvar-conjugate", normal_meanvar_model, lambda m, t: normal_meanvar_prior(*t),
            n_tau=4, jeffreys=(3.0, 0.0, 0.0, 0.0),
        ),
    }
