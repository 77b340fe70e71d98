"""Worked examples: presets, data generators, closed forms and exact laws.

Each example bundles a model/prior pair from ``expfam`` with hyperparameters
and a data-generating configuration. Closed-form bounds come in two flavours:

* ``*-displayed`` values evaluate a published closed-form expression as
  written;
* ``*-corrected`` values re-assemble the same bound from its ingredients
  where the two disagree (see the README for the list).

Moments such as ``E[(theta*)^2]`` are taken from the expectation engine, so a
closed form and the generic engine always see the same posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import SQRT_PI_8, TAIL_CONST, TV_CONST, BoundReport, Bounds, BoundConfig
from .errors import HyperparameterOutOfRange, ShapeTooSmall
from .expfam import CanonicalModel, DataSummary, PriorSpec, builtin_models, summarize
from .laws import ExactLaw
from .linalg import inf_norm, spd_sqrt
from .solvers import PosteriorContext
from .standardize import Kind

SQRT_PI = math.sqrt(math.pi)

# Leading coefficient of the Poisson local bound as it is displayed.
POISSON_EPS_COEFFICIENT_DISPLAYED = 0.5 * ((3.0 + math.sqrt(5.0)) / 2.0 + math.e)


def gamma_normal_exact_wass(alpha: float, b: float) -> float:
    """W1 between Gamma(alpha, rate b) and the normal with the same mode and mean/variance ratio."""
    if not alpha > 1.0:
        raise ShapeTooSmall(f"shape alpha={alpha} must exceed 1")
    if not b > 0.0:
        raise HyperparameterOutOfRange(f"rate b={b} must be positive")
    return 1.0 / b


def poisson_eps_coefficient(eps_ratio: float = 1.0) -> float:
    """Coefficient of ``E|theta*| / sqrt(tau1 + n xbar)`` in the Poisson local bound.

    Assembled from the local theorem on ``{|theta*| <= eps}`` with a Markov
    tail, for ``eps = eps_ratio * sqrt(tau1 + n xbar)``: on the region the
    kernel satisfies ``Upsilon(w) <= (a/2) exp(|w|/sqrt(a))``, so the
    conditional term contributes ``exp(eps_ratio)/2`` and the tail
    ``(3 + sqrt 5)/2 / eps_ratio``.
    """
    return math.exp(eps_ratio) / 2.0 + TAIL_CONST / eps_ratio


def multinomial_b_matrix(summary: DataSummary, tau) -> np.ndarray:
    """``B_k = H_lambda(mode) / n`` for the multinomial/Dirichlet posterior."""
    n = summary.n
    tau = np.asarray(tau, dtype=float)
    c = summary.T_array + tau[:-1]  # n xbar_u + tau_u
    tk = tau[-1]
    B = -np.outer(c, c) / (n * (n + tk))
    np.fill_diagonal(B, c * (n + tk - c) / (n * (n + tk)))
    return B


def multinomial_lambda_min_display(summary: DataSummary, tau) -> float:
    """Smallest eigenvalue of ``B_3`` by the quadratic-root formula."""
    n = summary.n
    t1, t2, t3 = (float(t) for t in tau)
    a1, a2 = summary.T_array + np.array([t1, t2])
    d1 = a1 * (n + t3 - a1)
    d2 = a2 * (n + t3 - a2)
    return (d1 + d2 - math.sqrt((d1 - d2) ** 2 + 4.0 * a1**2 * a2**2)) / (2.0 * n * (n + t3))


def normal_meanvar_lambda_min_display(summary: DataSummary, tau) -> float:
    """Smallest eigenvalue of the mode Hessian for the normal mean/variance posterior."""
    n = summary.n
    t1, t2, t3, t4 = (float(t) for t in tau)
    sx = summary.T[0]
    sxx = -2.0 * summary.T[1]
    N = n + 2.0 * t2
    lead = (N * (2.0 * t4 + sxx) - (t3 + sx) ** 2) / (4.0 * (n + 2.0 * t1) * N**2)
    trace_part = (
        2.0 * n**2 + n * (8.0 * t2 + 2.0 * t4 + sxx) + 8.0 * t2**2 + 4.0 * t2 * t4 + 2.0 * t2 * sxx
        + t3**2 + 2.0 * t3 * sx + sx**2
    )
    disc = (N * (2.0 * n + 4.0 * t2 + 2.0 * t4 + sxx) + (t3 + sx) ** 2) ** 2 \
        + 8.0 * N**2 * (t3 + sx) ** 2 - 8.0 * N**3 * (2.0 * t4 + sxx)
    return lead * (trace_part - math.sqrt(disc))


# --------------------------------------------------------------------------
# closed-form mode and MLE


def _mode_bernoulli(tau, params, s):
    t1, t2 = tau
    return np.array([math.log((t1 + s.T[0]) / (s.n - s.T[0] + t2 - t1))])


def _mle_bernoulli(tau, params, s):
    xb = s.T[0] / s.n
    return np.array([math.log(xb / (1.0 - xb))])


def _mode_poisson(tau, params, s):
    t1, t2 = tau
    return np.array([math.log((t1 + s.T[0]) / (s.n + t2))])


def _mle_poisson(tau, params, s):
    return np.array([math.log(s.T[0] / s.n)])


def _mode_normal_precision(tau, params, s):
    t1, t2 = tau
    return np.array([(s.n + 2.0 * t2) / (-2.0 * s.T[0] + 2.0 * t1)])


def _mle_normal_precision(tau, params, s):
    return np.array([s.n / (-2.0 * s.T[0])])


def _mode_weibull(tau, params, s):
    t1, t2 = tau
    return np.array([(s.n + t2) / (-s.T[0] + t1)])


def _mle_weibull(tau, params, s):
    return np.array([s.n / (-s.T[0])])


def _mode_negbin(tau, params, s):
    t1, t2 = tau
    r = params["r"]
    a = s.T[0] + t1
    return np.array([math.log(a / (a + t2 + s.n * r))])


def _mle_negbin(tau, params, s):
    xb = s.T[0] / s.n
    return np.array([math.log(xb / (xb + params["r"]))])


def _mode_multinomial(tau, params, s):
    tau = np.asarray(tau, dtype=float)
    last = s.n - s.T_array.sum() + tau[-1] - tau[:-1].sum()
    return np.log((s.T_array + tau[:-1]) / last)


def _mle_multinomial(tau, params, s):
    return np.log(s.T_array / (s.n - s.T_array.sum()))


def _mode_normal_meanvar(tau, params, s):
    t1, t2, t3, t4 = tau
    sx, sxx = s.T[0], -2.0 * s.T[1]
    D = (s.n + 2.0 * t2) * (sxx + 2.0 * t4) - (sx + t3) ** 2
    return np.array([(s.n + 2.0 * t1) * (sx + t3) / D, (s.n + 2.0 * t1) * (s.n + 2.0 * t2) / D])


def _mle_normal_meanvar(tau, params, s):
    xb = s.T[0] / s.n
    v = -2.0 * s.T[1] / s.n - xb**2
    return np.array([xb / v, 1.0 / v])


# --------------------------------------------------------------------------
# closed-form bounds


def _report(ctx, B: Bounds, theorem, metric, kind, value, **knobs) -> BoundReport:
    return BoundReport(theorem=theorem, metric=metric, standardization=Kind(kind).value, n=ctx.n,
                       value=float(value), seed=B.config.seed, knobs=knobs)


def _moment(B: Bounds, kind, f) -> np.ndarray:
    return B.engine(kind).expect_array(f)[0]


def _sq(B, kind):
    return _moment(B, kind, lambda w: w * w)


def _abs(B, kind):
    return _moment(B, kind, np.abs)


def _bounds_bernoulli(spec, ctx, B):
    n, T = ctx.n, ctx.summary.T[0]
    out = []
    if spec.key == "bernoulli-beta":
        t1, t2 = spec.tau
        d = (n + t2) ** 2.5 / ((t1 + T) ** 1.5 * (n - T + t2 - t1) ** 1.5) / (12.0 * math.sqrt(3.0))
        d *= float(_sq(B, Kind.MODE)[0])
        out += [_report(ctx, B, "bernoulli-closed", "Wass", Kind.MODE, d),
                _report(ctx, B, "bernoulli-closed", "TV", Kind.MODE, SQRT_PI_8 * d)]
    if 0 < T < n:
        xb = T / n
        sup = spec.prior.eta_grad_sup
        q = xb * (1.0 - xb)
        dh = (float(_sq(B, Kind.MLE)[0]) / (12.0 * math.sqrt(3.0) * q) + sup) / math.sqrt(n * q)
        out += [_report(ctx, B, "bernoulli-mle-weak-prior-closed", "Wass", Kind.MLE, dh, eta_sup=sup),
                _report(ctx, B, "bernoulli-mle-weak-prior-closed", "TV", Kind.MLE, SQRT_PI_8 * dh, eta_sup=sup)]
    return out


def _bounds_poisson(spec, ctx, B):
    a = spec.tau[0] + ctx.summary.T[0]
    ra = math.sqrt(a)
    e = lambda w: np.exp(np.abs(w) / ra)  # noqa: E731
    wass = _moment(B, Kind.MODE, lambda w: w * w * e(w))[0] / (2.0 * ra)
    tv = _moment(B, Kind.MODE, lambda w: np.minimum(SQRT_PI_8 * w * w, np.abs(w)) * e(w))[0] / (2.0 * ra)
    m1 = float(_abs(B, Kind.MODE)[0])
    return [
        _report(ctx, B, "poisson-closed", "Wass", Kind.MODE, wass),
        _report(ctx, B, "poisson-closed", "TV", Kind.MODE, tv),
        _report(ctx, B, "poisson-eps-displayed", "TV", Kind.MODE, POISSON_EPS_COEFFICIENT_DISPLAYED * m1 / ra),
        _report(ctx, B, "poisson-eps-corrected", "TV", Kind.MODE, poisson_eps_coefficient(1.0) * m1 / ra),
    ]


def normal_precision_bn(n: int, s2: float, tau, corrected: bool = False) -> float:
    """The MLE-standardised TV bound ``B_n`` for the normal-precision example.

    ``s2`` is ``sum (x_i - m)^2 / n``. The corrected version uses
    ``|E eta'(theta)| = n |tau1 - tau2 s2| / (n + 2 tau2)`` for the prior term.
    """
    t1, t2 = tau
    N = n + 2.0 * t2
    ns2 = n * s2
    phi = ns2 + 2.0 * t1
    first = (2.0 * (t2 * ns2 - n * t1) ** 2 + N * ns2**2) / (n * N * phi)
    if corrected:
        second = n * abs(t1 - t2 * s2) / N
    else:
        second = math.sqrt(2.0 * n) * abs(t2) * phi / (N * ns2)
    return SQRT_PI / (2.0 * s2 * math.sqrt(n)) * (first + second)


def normal_precision_wass_lower_mle(n: int, s2: float, tau) -> float:
    t1, t2 = tau
    return math.sqrt(2.0 * n) * abs((t2 + 1.0) * s2 - t1) / (n * s2 + 2.0 * t1)


def _bounds_normal_precision(spec, ctx, B):
    t1, t2 = spec.tau
    n = ctx.n
    s2 = -2.0 * ctx.summary.T[0] / n
    out = [
        _report(ctx, B, "normal-precision-closed", "TV", Kind.MODE, SQRT_PI / 2.0 / math.sqrt(n + 2.0 * t2)),
        _report(ctx, B, "normal-precision-closed", "Wass", Kind.MODE, math.sqrt(2.0) / math.sqrt(n + 2.0 * t2)),
    ]
    for tag, corr in (("displayed", False), ("corrected", True)):
        bn = normal_precision_bn(n, s2, spec.tau, corrected=corr)
        out += [_report(ctx, B, f"normal-precision-mle-{tag}", "TV", Kind.MLE, bn),
                _report(ctx, B, f"normal-precision-mle-{tag}", "Wass", Kind.MLE, math.sqrt(8.0 / math.pi) * bn)]
    return out


def _bounds_weibull(spec, ctx, B):
    t2 = spec.tau[1]
    r = 1.0 / math.sqrt(ctx.n + t2)
    return [
        _report(ctx, B, "weibull-closed", "TV", Kind.MODE, math.sqrt(2.0 * math.pi) / 4.0 * r),
        _report(ctx, B, "weibull-closed", "Wass", Kind.MODE, r),
    ]


def _bounds_negbin(spec, ctx, B):
    t1, t2 = spec.tau
    r = spec.model.params["r"]
    n = ctx.n
    P = ctx.summary.T[0] + t1
    Q = P + t2 + n * r
    M = n * r + t2
    m1 = float(_abs(B, Kind.MODE)[0])
    brace = 2.0 * (3.0 + math.sqrt(5.0)) / math.log(Q / P) \
        + M**2 * (Q**3 - P**3) / (P**1.5 * Q**1.5 * (math.sqrt(Q) - math.sqrt(P)) ** 4)
    value = math.sqrt(M) * m1 / (2.0 * math.sqrt(P * Q)) * brace
    return [_report(ctx, B, "negbin-closed", "TV", Kind.MODE, value)]


def _bounds_multinomial(spec, ctx, B):
    tau = spec.tau
    n = ctx.n
    K = len(tau)
    C = spd_sqrt(multinomial_b_matrix(ctx.summary, tau)).inv_sqrt
    cinf = inf_norm(C)
    e2 = float(np.sum(_sq(B, Kind.MODE)))
    delta = (K - 1) ** 2 * cinf**3 * (n + tau[-1]) / n**1.5 * e2
    tv_c = 2.0 * math.sqrt(2.0 * math.pi) / 3.0
    out = [_report(ctx, B, "multinomial-closed", "Wass", Kind.MODE, delta, c_inf=cinf),
           _report(ctx, B, "multinomial-closed", "TV", Kind.MODE, tv_c * delta, c_inf=cinf)]
    if K == 3:
        lam = multinomial_lambda_min_display(ctx.summary, tau)
        cbound = math.sqrt(2.0 / lam)
        d3 = (K - 1) ** 2 * cbound**3 * (n + tau[-1]) / n**1.5 * e2
        out += [_report(ctx, B, "multinomial-eigen-closed", "Wass", Kind.MODE, d3, lambda_min=lam),
                _report(ctx, B, "multinomial-eigen-closed", "TV", Kind.MODE, tv_c * d3, lambda_min=lam)]
    return out


def _bounds_normal_meanvar(spec, ctx, B):
    t1, t2, _, _ = spec.tau
    n = ctx.n
    th1, th2 = ctx.mode
    lam = normal_meanvar_lambda_min_display(ctx.summary, spec.tau)
    lt = lam / n
    e2 = float(np.sum(_sq(B, Kind.MODE)))
    e1 = float(np.sum(_abs(B, Kind.MODE)))
    shape = (n + 2.0 * (t1 + t2)) / n**1.5 * (1.0 + 3.5 * th1**2 + 0.625 * th2**2) * (1.0 / th2**2 + 4.0 / th2**4) * e2
    tail = (3.0 + math.sqrt(5.0)) / (th2 * math.sqrt(n * lt)) * e1
    out = []
    for tag, const in (("displayed", 32.0), ("corrected", 64.0)):
        value = const * SQRT_PI / (3.0 * lt**1.5) * shape + tail
        out.append(_report(ctx, B, f"normal-meanvar-{tag}", "TV", Kind.MODE, value, epsilon=th2 / 2.0))
    return out


# --------------------------------------------------------------------------
# data generators


def _gen_bernoulli(rng, size, p=0.3):
    return rng.binomial(1, p, size).astype(float)


def _gen_poisson(rng, size, mu=1.0):
    return rng.poisson(mu, size).astype(float)


def _gen_normal(rng, size, m=0.0, sigma2=1.0):
    return rng.normal(m, math.sqrt(sigma2), size)


def _gen_weibull(rng, size, scale=1.0, shape=2.0):
    return scale * rng.weibull(shape, size)


def _gen_negbin(rng, size, r=5, p=0.4):
    # numpy counts failures before r successes with success probability 1 - p
    return rng.negative_binomial(r, 1.0 - p, size).astype(float)


def _gen_multinomial(rng, size, probs=(0.2, 0.2)):
    probs = np.append(np.asarray(probs, dtype=float), 1.0 - float(np.sum(probs)))
    cats = rng.choice(len(probs), size=size, p=probs)
    return np.eye(len(probs))[cats]


@dataclass(frozen=True)
class _Family:
    mode: Callable | None
    mle: Callable
    closed: Callable
    generate: Callable


FAMILIES: dict[str, _Family] = {
    "bernoulli-beta": _Family(_mode_bernoulli, _mle_bernoulli, _bounds_bernoulli, _gen_bernoulli),
    # no closed-form mode under the hyperbolic prior
    "bernoulli-hyperbolic": _Family(None, _mle_bernoulli, _bounds_bernoulli, _gen_bernoulli),
    "poisson-gamma": _Family(_mode_poisson, _mle_poisson, _bounds_poisson, _gen_poisson),
    "normal-precision-gamma": _Family(_mode_normal_precision, _mle_normal_precision, _bounds_normal_precision, _gen_normal),
    "weibull-gamma": _Family(_mode_weibull, _mle_weibull, _bounds_weibull, _gen_weibull),
    "negbin-conjugate": _Family(_mode_negbin, _mle_negbin, _bounds_negbin, _gen_negbin),
    "multinomial-dirichlet": _Family(_mode_multinomial, _mle_multinomial, _bounds_multinomial, _gen_multinomial),
    "normal-meanvar-conjugate": _Family(_mode_normal_meanvar, _mle_normal_meanvar, _bounds_normal_meanvar, _gen_normal),
}


@dataclass(frozen=True, eq=False)
class ExampleSpec:
    key: str
    tau: tuple[float, ...]
    model_params: dict = field(default_factory=dict)
    data_params: dict = field(default_factory=dict)
    # closed-form theorem ids plotted by the simulation harness
    figure_theorems: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.key not in FAMILIES:
            raise HyperparameterOutOfRange(f"unknown example {self.key!r}")
        model, prior = builtin_models()[self.key].build(self.tau, **self.model_params)
        object.__setattr__(self, "_model", model)
        object.__setattr__(self, "_prior", prior)

    @property
    def model(self) -> CanonicalModel:
        return self._model

    @property
    def prior(self) -> PriorSpec:
        return self._prior

    @property
    def family(self) -> _Family:
        return FAMILIES[self.key]

    def with_tau(self, tau) -> "ExampleSpec":
        return ExampleSpec(self.key, tuple(tau), dict(self.model_params), dict(self.data_params),
                           self.figure_theorems, self.name)

    def generate(self, rng: np.random.Generator, size: int) -> np.ndarray:
        params = dict(self.data_params)
        if self.key == "weibull-gamma":
            params["shape"] = self.model.params.get("shape", 2.0)
        if self.key == "negbin-conjugate":
            params["r"] = self.model.params["r"]
        return self.family.generate(rng, size, **params)

    def summarize(self, data) -> DataSummary:
        return summarize(self.model, np.asarray(data, dtype=float))

    def context(self, data) -> PosteriorContext:
        return PosteriorContext(self.model, self.prior, self.summarize(data))

    def closed_form_mode(self, summary: DataSummary) -> np.ndarray | None:
        fn = self.family.mode
        return None if fn is None else fn(self.tau, self.model.params, summary)

    def closed_form_mle(self, summary: DataSummary) -> np.ndarray:
        return self.family.mle(self.tau, self.model.params, summary)

    def exact_posterior(self, summary: DataSummary) -> ExactLaw | None:
        return self.prior.posterior_law(summary)

    def closed_bounds(self, ctx: PosteriorContext, bounds: Bounds | None = None) -> list[BoundReport]:
        return self.family.closed(self, ctx, bounds or Bounds(ctx, BoundConfig()))

    def lower_bounds(self, ctx: PosteriorContext) -> list[tuple[str, str, float]]:
        """Closed-form Wasserstein lower bounds as ``(theorem, standardization, value)``."""
        if self.key == "normal-precision-gamma":
            s2 = -2.0 * ctx.summary.T[0] / ctx.n
            return [
                ("normal-precision-lower", "mode", math.sqrt(2.0) / math.sqrt(ctx.n + 2.0 * self.tau[1])),
                ("normal-precision-lower", "mle", normal_precision_wass_lower_mle(ctx.n, s2, self.tau)),
            ]
        return []


PRESETS: dict[str, ExampleSpec] = {
    "fig1a-bernoulli": ExampleSpec("bernoulli-beta", (1.0, 3.0), data_params={"p": 0.3},
                                   figure_theorems=("bernoulli-closed",), name="fig1a-bernoulli"),
    "fig1b-poisson": ExampleSpec("poisson-gamma", (1.0, 3.0), data_params={"mu": 1.0},
                                 figure_theorems=("poisson-closed",), name="fig1b-poisson"),
    "fig1c-normal": ExampleSpec("normal-precision-gamma", (2.0, 0.5), {"m": 0.0}, {"m": 0.0, "sigma2": 3.0},
                                figure_theorems=("normal-precision-closed", "normal-precision-mle-displayed"),
                                name="fig1c-normal"),
    "fig1d-multinomial": ExampleSpec("multinomial-dirichlet", (0.2, 0.2, 1.5), data_params={"probs": (0.2, 0.2)},
                                     figure_theorems=("multinomial-closed",), name="fig1d-multinomial"),
    "bernoulli-hyperbolic": ExampleSpec("bernoulli-hyperbolic", (), data_params={"p": 0.3},
                                        figure_theorems=("bernoulli-mle-weak-prior-closed",), name="bernoulli-hyperbolic"),
    "weibull": ExampleSpec("weibull-gamma", (1.0, 2.0), {"shape": 2.0}, {"scale": 1.5},
                           figure_theorems=("weibull-closed",), name="weibull"),
    "negbin": ExampleSpec("negbin-conjugate", (1.0, 2.0), {"r": 5}, {"p": 0.4},
                          figure_theorems=("negbin-closed",), name="negbin"),
    "normal-meanvar": ExampleSpec("normal-meanvar-conjugate", (1.0, 1.0, 0.0, 1.0), data_params={"m": 1.0, "sigma2": 2.0},
                                  figure_theorems=("normal-meanvar-displayed",), name="normal-meanvar"),
}


def preset(name: str) -> ExampleSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise HyperparameterOutOfRange(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
