"""Exact posterior laws, expressed directly in the natural parameter.

Each conjugate pair in the catalogue has a posterior that is the pushforward
of a textbook distribution (beta, gamma, Dirichlet, normal-gamma, or a
two-component beta mixture) under the map to the canonical parameter. The
classes here give densities, CDFs (one-dimensional case), quantiles and
samplers on that scale, so no kernel density estimate is needed anywhere.

Arrays of parameter values always carry the parameter axis last, shape
``(..., k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats


def _col(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    return t[..., 0] if t.ndim and t.shape[-1] == 1 else t


class ExactLaw:
    """Common interface; subclasses fill in the family-specific pieces."""

    dim: int = 1
    name: str = "law"

    def logpdf(self, theta) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, theta) -> np.ndarray:
        return np.exp(self.logpdf(theta))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    # One-dimensional laws only.
    def cdf(self, t) -> np.ndarray:
        raise NotImplementedError

    def ppf(self, q) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple[tuple[float, float], ...]:
        return tuple((-math.inf, math.inf) for _ in range(self.dim))


@dataclass(frozen=True)
class LogitBeta(ExactLaw):
    """theta = log(p / (1 - p)) with p ~ Beta(a, b)."""

    a: float
    b: float
    name: str = "logit-beta"

    def logpdf(self, theta):
        t = _col(theta)
        return -self.a * np.logaddexp(0.0, -t) - self.b * np.logaddexp(0.0, t) - special.betaln(self.a, self.b)

    def cdf(self, t):
        return special.betainc(self.a, self.b, special.expit(np.asarray(t, dtype=float)))

    def ppf(self, q):
        return special.logit(stats.beta.ppf(q, self.a, self.b))

    def sample(self, rng, size):
        return (np.log(rng.gamma(self.a, size=size)) - np.log(rng.gamma(self.b, size=size)))[:, None]

    def mean(self):
        return np.array([special.digamma(self.a) - special.digamma(self.b)])


@dataclass(frozen=True)
class LogGamma(ExactLaw):
    """theta = log(mu) with mu ~ Gamma(shape, rate)."""

    shape: float
    rate: float
    name: str = "log-gamma"

    def logpdf(self, theta):
        t = _col(theta)
        return self.shape * t - self.rate * np.exp(t) + self.shape * math.log(self.rate) - special.gammaln(self.shape)

    def cdf(self, t):
        return special.gammainc(self.shape, self.rate * np.exp(np.asarray(t, dtype=float)))

    def ppf(self, q):
        return np.log(stats.gamma.ppf(q, self.shape, scale=1.0 / self.rate))

    def sample(self, rng, size):
        return np.log(rng.gamma(self.shape, 1.0 / self.rate, size=size))[:, None]

    def mean(self):
        return np.array([special.digamma(self.shape) - math.log(self.rate)])


@dataclass(frozen=True)
class GammaLaw(ExactLaw):
    """theta ~ Gamma(shape, rate) on (0, inf)."""

    shape: float
    rate: float
    name: str = "gamma"

    def logpdf(self, theta):
        t = _col(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                (self.shape - 1.0) * np.log(np.where(t > 0, t, 1.0))
                - self.rate * t
                + self.shape * math.log(self.rate)
                - special.gammaln(self.shape)
            )
        return np.where(t > 0, out, -np.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return special.gammainc(self.shape, self.rate * np.maximum(t, 0.0))

    def ppf(self, q):
        return stats.gamma.ppf(q, self.shape, scale=1.0 / self.rate)

    def sample(self, rng, size):
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)[:, None]

    def mean(self):
        return np.array([self.shape / self.rate])

    def support(self):
        return ((0.0, math.inf),)


@dataclass(frozen=True)
class LogBeta(ExactLaw):
    """theta = log(p) with p ~ Beta(a, b); support (-inf, 0)."""

    a: float
    b: float
    name: str = "log-beta"

    def logpdf(self, theta):
        t = _col(theta)
        neg = np.where(t < 0, t, -1.0)
        out = self.a * neg + (self.b - 1.0) * np.log(-np.expm1(neg)) - special.betaln(self.a, self.b)
        return np.where(t < 0, out, -np.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return special.betainc(self.a, self.b, np.exp(np.minimum(t, 0.0)))

    def ppf(self, q):
        return np.log(stats.beta.ppf(q, self.a, self.b))

    def sample(self, rng, size):
        ga = rng.gamma(self.a, size=size)
        gb = rng.gamma(self.b, size=size)
        return (np.log(ga) - np.log(ga + gb))[:, None]

    def mean(self):
        return np.array([special.digamma(self.a) - special.digamma(self.a + self.b)])

    def support(self):
        return ((-math.inf, 0.0),)


@dataclass(frozen=True)
class Mixture1D(ExactLaw):
    """Finite mixture of one-dimensional laws."""

    weights: tuple[float, ...]
    components: tuple[ExactLaw, ...]
    name: str = "mixture"

    def logpdf(self, theta):
        parts = np.stack([math.log(w) + c.logpdf(theta) for w, c in zip(self.weights, self.components)])
        return special.logsumexp(parts, axis=0)

    def cdf(self, t):
        return sum(w * c.cdf(t) for w, c in zip(self.weights, self.components))

    def ppf(self, q):
        q = np.atleast_1d(np.asarray(q, dtype=float))
        out = np.empty_like(q)
        for i, qi in enumerate(q):
            lo = min(float(c.ppf(qi)) for c in self.components)
            hi = max(float(c.ppf(qi)) for c in self.components)
            if hi - lo < 1e-14:
                out[i] = lo
                continue
            out[i] = optimize.brentq(lambda t: float(self.cdf(t)) - qi, lo, hi, xtol=1e-13)
        return out if out.size > 1 else out[0]

    def sample(self, rng, size):
        idx = rng.choice(len(self.weights), size=size, p=np.asarray(self.weights))
        out = np.empty((size, 1))
        for j, comp in enumerate(self.components):
            mask = idx == j
            count = int(mask.sum())
            if count:
                out[mask] = comp.sample(rng, count)
        return out

    def mean(self):
        return sum(w * c.mean() for w, c in zip(self.weights, self.components))

    def support(self):
        return self.components[0].support()


@dataclass(frozen=True)
class LogRatioDirichlet(ExactLaw):
    """theta_u = log(p_u / p_K), u < K, with p ~ Dirichlet(alpha)."""

    alpha: tuple[float, ...]
    name: str = "log-ratio-dirichlet"
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", len(self.alpha) - 1)

    def logpdf(self, theta):
        t = np.asarray(theta, dtype=float)
        al = np.asarray(self.alpha, dtype=float)
        lse = special.logsumexp(np.concatenate([t, np.zeros(t.shape[:-1] + (1,))], axis=-1), axis=-1)
        norm = special.gammaln(al.sum()) - special.gammaln(al).sum()
        return t @ al[:-1] - al.sum() * lse + norm

    def sample(self, rng, size):
        g = np.log(rng.gamma(np.asarray(self.alpha), size=(size, len(self.alpha))))
        return g[:, :-1] - g[:, -1:]

    def mean(self):
        al = np.asarray(self.alpha, dtype=float)
        return special.digamma(al[:-1]) - special.digamma(al[-1])


@dataclass(frozen=True)
class NormalGamma(ExactLaw):
    """theta_2 ~ Gamma(shape, rate) and theta_1 | theta_2 ~ N(loc * theta_2, theta_2 / kappa)."""

    shape: float
    rate: float
    loc: float
    kappa: float
    name: str = "normal-gamma"
    dim: int = 2

    def logpdf(self, theta):
        t = np.asarray(theta, dtype=float)
        t1, t2 = t[..., 0], t[..., 1]
        pos = t2 > 0
        s2 = np.where(pos, t2, 1.0)
        lg = (self.shape - 1.0) * np.log(s2) - self.rate * s2 + self.shape * math.log(self.rate) - special.gammaln(self.shape)
        ln = -0.5 * np.log(2.0 * math.pi * s2 / self.kappa) - self.kappa * (t1 - self.loc * s2) ** 2 / (2.0 * s2)
        return np.where(pos, lg + ln, -np.inf)

    def sample(self, rng, size):
        t2 = rng.gamma(self.shape, 1.0 / self.rate, size=size)
        t1 = self.loc * t2 + np.sqrt(t2 / self.kappa) * rng.standard_normal(size)
        return np.column_stack([t1, t2])

    def mean(self):
        m2 = self.shape / self.rate
        return np.array([self.loc * m2, m2])

    def support(self):
        return ((-math.inf, math.inf), (0.0, math.inf))
