"""Normal-approximation bounds for the standardised posterior.

Notation follows the rest of the package: ``w`` is the standardised
variable, ``A`` the inverse scale of the standardisation (so that
``theta = center + A w``), ``R``/``R~`` the row-sum scalars of ``A`` for the
mode standardisation and ``S``/``S~`` those of ``H_beta(mle)^{-1/2}``.

The Taylor-remainder kernel is

    Upsilon_{luv}(w) = E[Y2 d^3_{luv} f(center + Y1 Y2 A w)],  Y1, Y2 ~ U(0, 1),

for ``f`` one of ``lambda`` or ``beta``. Substituting ``s = y1 y2`` gives the
one-dimensional form ``int_0^1 (1 - s) d^3 f(center + s A w) ds``; both forms
are implemented and agree to rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import AssumptionFailure, DimensionMismatch, EmptyRegion, NonFinite, PreconditionFail
from .linalg import row_sum_scalars
from .posterior import KINK, ExpectationEngine, ExpectationEstimate, window_1d
from .solvers import PosteriorContext, check_assumptions
from .standardize import Kind, Standardization, StandardizedLaw, mle_standardization, mode_standardization

TV_CONST = math.sqrt(8.0 * math.pi) / 3.0
TAIL_CONST = (3.0 + math.sqrt(5.0)) / 2.0
SQRT_PI_8 = math.sqrt(math.pi / 8.0)
UNRELIABLE_MASS = 1e-3


class Variant(str, enum.Enum):
    LAMBDA = "lambda"  # third derivatives of lambda around the mode
    BETA_ETA = "beta_eta"  # third derivatives of lambda around the MLE
    BETA_ONLY = "beta_only"  # third derivatives of beta around the MLE
    LAMBDA_BETA = "lambda_beta"  # n times third derivatives of beta around the mode


@dataclass(frozen=True)
class BoundConfig:
    G: int = 32
    n_mc: int = 200_000
    seed: int = 0
    method: str = "auto"
    form: str = "reduced"
    experimental: bool = False


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    metric: str
    standardization: str
    n: int
    value: float
    std_error: float = 0.0
    epsilon: float | None = None
    r: float | None = None
    seed: int | None = None
    knobs: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    skipped_mass: float = 0.0

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise NonFinite(f"bound {self.theorem} evaluated to {self.value}")

    @property
    def clamped(self) -> float:
        return min(self.value, 1.0) if self.metric == "TV" else self.value

    @property
    def unreliable(self) -> bool:
        return self.skipped_mass > UNRELIABLE_MASS

    def to_record(self) -> dict:
        return {
            "theorem": self.theorem,
            "metric": self.metric,
            "standardization": self.standardization,
            "n": self.n,
            "value": self.value,
            "clamped": self.clamped,
            "stderr": self.std_error,
            "epsilon": self.epsilon,
            "r": self.r,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PolySpec:
    """Derivative growth ``|d_j h(w)| <= A + sum_m B_m |w_m|^{r_m}``."""

    A: float
    B: tuple[float, ...]
    r: tuple[float, ...]

    def __post_init__(self):
        if self.A < 0 or any(b < 0 for b in self.B) or any(q < 0 for q in self.r) or len(self.B) != len(self.r):
            raise ValueError("polynomial growth spec needs A, B_m, r_m >= 0 with matching lengths")

    def chi(self, w: np.ndarray) -> np.ndarray:
        """``chi_m(w_m)`` for every coordinate, shape ``(N, k)``."""
        k = w.shape[-1]
        if len(self.B) != k:
            raise DimensionMismatch(f"polynomial spec has {len(self.B)} terms for k={k}")
        B = np.asarray(self.B, dtype=float)
        r = np.asarray(self.r, dtype=float)
        mu = np.array([normal_abs_moment(q) for q in r])
        return self.A / k + 2.0 ** (r / 2.0) * B * (np.abs(w) ** r + mu)


def normal_abs_moment(r: float) -> float:
    """``E|Z|^r`` for a standard normal ``Z``."""
    return 2.0 ** (r / 2.0) * math.gamma((r + 1.0) / 2.0) / math.sqrt(math.pi)


# --------------------------------------------------------------------------
# the Upsilon kernel


def _segment_rule(G: int, form: str) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``s`` and weights so that ``sum wt f(s) = E[Y2 f(Y1 Y2)]``."""
    x, w = leggauss(G)
    y, wy = 0.5 * (x + 1.0), 0.5 * w
    if form == "reduced":
        return y, wy * (1.0 - y)
    if form == "tensor":
        s = np.outer(y, y).ravel()  # y1 * y2
        wt = np.outer(wy, wy * y).ravel()  # weight carries the Y2 factor
        return s, wt
    raise ValueError(f"unknown kernel form {form!r}")


@dataclass(eq=False)
class UpsilonKernel:
    ctx: PosteriorContext
    std: Standardization
    variant: Variant = Variant.LAMBDA
    G: int = 32
    form: str = "reduced"

    def __post_init__(self):
        self.variant = Variant(self.variant)
        self._s, self._wt = _segment_rule(self.G, self.form)

    def third(self, theta: np.ndarray) -> np.ndarray:
        lp = self.ctx.log_posterior
        if self.variant in (Variant.LAMBDA, Variant.BETA_ETA):
            return lp.third(theta, strict=True)
        if self.variant is Variant.BETA_ONLY:
            return self.ctx.model.beta_third_tensor(theta)
        return self.ctx.n * self.ctx.model.beta_third_tensor(theta)

    def tensor(self, w: np.ndarray, chunk: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``Upsilon_{luv}`` at each row of ``w``; returns ``(values, valid)``.

        Rows whose segment leaves the parameter space are returned as zero and
        flagged invalid.
        """
        w = np.atleast_2d(np.asarray(w, dtype=float))
        N, k = w.shape
        d = w @ self.std.inv_scale.entries
        c = self.std.center
        out = np.empty((N, k, k, k))
        m = len(self._s)
        chunk = chunk or max(1, int(4_000_000 // (m * k**3)))
        for start in range(0, N, chunk):
            stop = min(N, start + chunk)
            pts = c + self._s[None, :, None] * d[start:stop, None, :]
            with np.errstate(invalid="ignore", over="ignore"):
                vals = self.third(pts)
            out[start:stop] = np.einsum("g,ngijk->nijk", self._wt, vals)
        valid = np.all(np.isfinite(out.reshape(N, -1)), axis=1)
        out[~valid] = 0.0
        return out, valid

    def upsilon(self, l: int, u: int, v: int, w) -> float:
        return float(self.tensor(np.asarray(w, dtype=float)[None, :])[0][0, l, u, v])

    def refinement(self, w) -> float:
        """Relative change of the kernel when the segment rule is doubled."""
        fine = replace_kernel(self, G=2 * self.G)
        a, _ = self.tensor(np.atleast_2d(w))
        b, _ = fine.tensor(np.atleast_2d(w))
        scale = max(float(np.max(np.abs(b))), 1e-300)
        return float(np.max(np.abs(a - b))) / scale


def replace_kernel(kernel: UpsilonKernel, **changes) -> UpsilonKernel:
    fields = dict(ctx=kernel.ctx, std=kernel.std, variant=kernel.variant, G=kernel.G, form=kernel.form)
    fields.update(changes)
    return UpsilonKernel(**fields)


def eta_hessian_segment(ctx: PosteriorContext, std: Standardization, w: np.ndarray, G: int = 32) -> np.ndarray:
    """``E[d^2_{lu} eta(center + Y1 A w)]`` at each row of ``w``."""
    x, wt = leggauss(G)
    s, wt = 0.5 * (x + 1.0), 0.5 * wt
    d = np.atleast_2d(w) @ std.inv_scale.entries
    pts = std.center + s[None, :, None] * d[:, None, :]
    vals = ctx.prior.derivative(2, pts, strict=True)
    return np.einsum("g,ngij->nij", wt, vals)


# --------------------------------------------------------------------------
# the evaluator


def _require(ctx: PosteriorContext, which: str) -> dict:
    flags = check_assumptions(ctx, which)
    if not flags.ok:
        raise AssumptionFailure(f"assumptions for {which} bounds fail: {', '.join(flags.failed())}", flags.flags)
    return dict(flags.flags)


def default_epsilon(ctx: PosteriorContext, center: np.ndarray | None = None) -> float:
    """Radius in parameter units for the local and Markov-tail bounds.

    Half the distance from the centre to the boundary of the parameter space
    when that boundary is finite (for a positive or negative parameter), and
    one otherwise.
    """
    c = np.asarray(ctx.mode if center is None else center, dtype=float)
    dists = []
    for u in range(ctx.k):
        for sign in (1.0, -1.0):
            probe = c.copy()
            probe[u] = c[u] + sign * (abs(c[u]) + 1e-300) * (1.0 + 1e-12)
            # The boundary sits at zero for every bounded coordinate in the catalogue.
            if not ctx.model.support_check(probe):
                dists.append(abs(c[u]))
    return 0.5 * min(dists) if dists else 1.0


class Bounds:
    """All bounds for one posterior, sharing node sets and kernel evaluations."""

    def __init__(self, ctx: PosteriorContext, config: BoundConfig | None = None):
        self.ctx = ctx
        self.config = config or BoundConfig()
        self._engines: dict = {}
        self._kernels: dict = {}

    # ---- shared machinery --------------------------------------------------
    def std(self, kind: Kind | str) -> Standardization:
        kind = Kind(kind)
        key = ("std", kind)
        if key not in self._engines:
            self._engines[key] = mode_standardization(self.ctx) if kind is Kind.MODE else mle_standardization(self.ctx)
        return self._engines[key]

    def engine(self, kind: Kind | str, breaks: Sequence[float] = ()) -> ExpectationEngine:
        kind = Kind(kind)
        key = ("engine", kind, tuple(sorted(breaks)))
        if key not in self._engines:
            cfg = self.config
            self._engines[key] = ExpectationEngine(
                self.ctx, self.std(kind), method=cfg.method, n_mc=cfg.n_mc, seed=cfg.seed,
                stream=f"posterior-{kind.value}", breaks=tuple(breaks),
            )
        return self._engines[key]

    def kernel_values(self, engine: ExpectationEngine, variant: Variant) -> tuple[np.ndarray, np.ndarray]:
        key = (id(engine.nodes), Variant(variant))
        if key not in self._kernels:
            kern = UpsilonKernel(self.ctx, engine.std, variant, self.config.G, self.config.form)
            self._kernels[key] = kern.tensor(engine.nodes.w)
        return self._kernels[key]

    def _skipped(self, engine, valid) -> float:
        return float(np.sum(engine.nodes.weights[~valid]))

    def _mean(self, engine: ExpectationEngine, values: np.ndarray) -> ExpectationEstimate:
        """Expectation of precomputed per-node values on the engine's node set."""
        vals = np.asarray(values, dtype=float)
        wts = engine.nodes.weights
        mean = float(np.sum(wts * vals))
        if engine.nodes.is_mc and len(vals) > 1:
            se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        else:
            se = 0.0
        return ExpectationEstimate(mean, se, engine.method, engine.nodes.size)

    def _triple(self, engine, variant, R_tilde, R, extra: np.ndarray | None = None):
        """Per-node ``sum_luv R~_l R_u R_v |w_u w_v Upsilon_luv(w)|``."""
        U, valid = self.kernel_values(engine, variant)
        w = engine.nodes.w
        vals = np.einsum("l,u,v,nu,nv,nluv->n", R_tilde, R, R, np.abs(w), np.abs(w), np.abs(U))
        if extra is not None:
            vals = vals * extra
        return vals, valid

    def _mode_scalars(self):
        rs = row_sum_scalars(self.ctx.hess_lambda_at_mode.inv_sqrt)
        return np.asarray(rs.R_tilde), np.asarray(rs.R)

    def _mle_scalars(self):
        rs = row_sum_scalars(self.ctx.hess_beta_at_mle.inv_sqrt)
        return np.asarray(rs.R_tilde), np.asarray(rs.R)

    def _report(self, theorem, metric, kind, value, se=0.0, **kw) -> BoundReport:
        return BoundReport(
            theorem=theorem, metric=metric, standardization=Kind(kind).value, n=self.ctx.n,
            value=float(value), std_error=float(se), seed=self.config.seed, **kw,
        )

    # ---- mode-centred bounds ----------------------------------------------
    def delta_tilde(self, region: Callable | None = None, breaks: Sequence[float] = ()):
        """``Delta~`` (or its conditional version on ``region``) and the skipped mass."""
        eng = self.engine(Kind.MODE, breaks)
        Rt, R = self._mode_scalars()
        vals, valid = self._triple(eng, Variant.LAMBDA, Rt, R)
        skipped = self._skipped(eng, valid)
        if region is None:
            return self._mean(eng, vals), skipped, None
        inside = np.asarray(region(eng.nodes.w), dtype=bool)
        if not inside.any():
            raise EmptyRegion("no evaluation point falls in the region")
        p = self._mean(eng, inside.astype(float))
        joint = self._mean(eng, np.where(inside, vals, 0.0))
        cond = ExpectationEstimate(joint.value / p.value, joint.std_error / p.value, eng.method, int(inside.sum()))
        return cond, skipped, p

    def mode_tv_wass(self) -> tuple[BoundReport, BoundReport]:
        flags = _require(self.ctx, "mode")
        d, skipped, _ = self.delta_tilde()
        knobs = {"G": self.config.G, "nodes": d.samples_or_nodes}
        tv = self._report("mode-tv-wass", "TV", Kind.MODE, TV_CONST * d.value, TV_CONST * d.std_error,
                          knobs=knobs, flags=flags, skipped_mass=skipped)
        wass = self._report("mode-tv-wass", "Wass", Kind.MODE, d.value, d.std_error,
                            knobs=knobs, flags=flags, skipped_mass=skipped)
        return tv, wass

    def mode_tv_local(self, region: Callable[[np.ndarray], np.ndarray], breaks: Sequence[float] = (),
                      theorem: str = "mode-local", **kw) -> BoundReport:
        flags = _require(self.ctx, "mode")
        d, skipped, p = self.delta_tilde(region, breaks)
        value = TV_CONST * d.value + TAIL_CONST * (1.0 - p.value)
        se = math.hypot(TV_CONST * d.std_error, TAIL_CONST * p.std_error)
        return self._report(theorem, "TV", Kind.MODE, value, se, flags=flags, skipped_mass=skipped,
                            knobs={"G": self.config.G, "p_region": p.value}, **kw)

    def mode_tv_corollary(self, eps: float | None = None, r: float = 1.0) -> BoundReport:
        """Local bound on ``{||A w||_2 <= eps}`` with a Markov tail of order ``r``."""
        flags = _require(self.ctx, "mode")
        eps = default_epsilon(self.ctx) if eps is None else float(eps)
        std = self.std(Kind.MODE)
        A = std.inv_scale.entries

        def region(w):
            return np.linalg.norm(w @ A, axis=-1) <= eps

        breaks = (-eps / A[0, 0], eps / A[0, 0]) if self.ctx.k == 1 else ()
        d, skipped, p = self.delta_tilde(region, breaks)
        if 1.0 - p.value > 0.5:
            raise PreconditionFail(f"P[||A w|| > eps] = {1.0 - p.value:.4f} exceeds 1/2 for eps={eps}")
        eng = self.engine(Kind.MODE, breaks)
        moment = self._mean(eng, np.linalg.norm(eng.nodes.w, axis=-1) ** r)
        tail = TAIL_CONST * std.inv_scale_spectral**r * moment.value / eps**r
        value = TV_CONST * d.value + tail
        se = math.hypot(TV_CONST * d.std_error, TAIL_CONST * std.inv_scale_spectral**r * moment.std_error / eps**r)
        return self._report("mode-corollary", "TV", Kind.MODE, value, se, epsilon=eps, r=r, flags=flags,
                            skipped_mass=skipped, knobs={"G": self.config.G, "p_region": p.value})

    def mode_smooth(self, poly: PolySpec) -> BoundReport:
        flags = _require(self.ctx, "mode")
        eng = self.engine(Kind.MODE)
        Rt, R = self._mode_scalars()
        chi_sum = poly.chi(eng.nodes.w).sum(axis=1)
        vals, valid = self._triple(eng, Variant.LAMBDA, Rt, R, extra=chi_sum)
        est = self._mean(eng, vals)
        return self._report("mode-smooth", "SmoothH", Kind.MODE, est.value, est.std_error, flags=flags,
                            skipped_mass=self._skipped(eng, valid),
                            knobs={"A": poly.A, "B": poly.B, "r": poly.r, "G": self.config.G})

    def mode_beta_eta_experimental(self) -> tuple[BoundReport, BoundReport]:
        """Mode-centred bound needing only two derivatives of ``eta``."""
        if not self.config.experimental:
            raise AssumptionFailure("the twice-differentiable-prior mode bound is experimental; enable it explicitly")
        if self.ctx.prior.smoothness < 2:
            raise AssumptionFailure("this bound needs a C2 prior", {"A3": False})
        eng = self.engine(Kind.MODE)
        Rt, R = self._mode_scalars()
        w = eng.nodes.w
        t1, valid = self._triple(eng, Variant.LAMBDA_BETA, Rt, R)
        H = eta_hessian_segment(self.ctx, eng.std, w, self.config.G)
        t2 = np.einsum("l,u,nu,nlu->n", Rt, R, np.abs(w), np.abs(H))
        t3 = float(Rt @ np.abs(self.ctx.prior.derivative(1, self.ctx.mode, strict=True)))
        est = self._mean(eng, t1 + t2)
        value = est.value + t3
        return (
            self._report("mode-beta-eta-experimental", "TV", Kind.MODE, TV_CONST * value, TV_CONST * est.std_error,
                         skipped_mass=self._skipped(eng, valid)),
            self._report("mode-beta-eta-experimental", "Wass", Kind.MODE, value, est.std_error,
                         skipped_mass=self._skipped(eng, valid)),
        )

    # ---- univariate improved bounds (independent quadrature path) ----------
    def _univariate_integral(self, kind: Kind, integrand: Callable[[float], float], lo=None, hi=None):
        """``int integrand(w) p(w) dw`` by adaptive quadrature with kink breakpoints."""
        ctx = self.ctx
        std = self.std(kind)
        wlo, whi = window_1d(ctx, std)
        a = wlo if lo is None else max(lo, wlo)
        b = whi if hi is None else min(hi, whi)
        pts = sorted({p for p in (0.0, KINK, -KINK) if a < p < b})
        law = ctx.law
        if law is not None:
            sl = StandardizedLaw(law, std)
            dens = lambda x: float(sl.pdf(np.array([[x]]))[0])  # noqa: E731
            norm = 1.0
        else:
            lp = ctx.log_posterior
            shift = float(lp.log_kernel(std.inverse(np.zeros((1, 1))))[0])
            dens = lambda x: math.exp(float(lp.log_kernel(std.inverse(np.array([[x]])))[0]) - shift)  # noqa: E731
            norm, _ = integrate.quad(dens, wlo, whi, points=sorted({p for p in (0.0,) if wlo < p < whi}) or None,
                                     limit=400, epsabs=0.0, epsrel=1e-12)
        val, err = integrate.quad(lambda x: integrand(x) * dens(x), a, b, points=pts or None,
                                  limit=400, epsabs=0.0, epsrel=1e-11)
        return val / norm, err / norm

    def _scalar_kernel(self, kind: Kind, variant: Variant) -> Callable[[float], float]:
        kern = UpsilonKernel(self.ctx, self.std(kind), variant, self.config.G, "tensor")

        def ups(x: float) -> float:
            vals, valid = kern.tensor(np.array([[x]]))
            if not valid[0]:
                raise NonFinite(f"Upsilon undefined at w={x}")
            return float(vals[0, 0, 0, 0])

        return ups

    def mode_univariate(self, variant: str = "wass", eps: float | None = None) -> BoundReport:
        if self.ctx.k != 1:
            raise DimensionMismatch("univariate bounds need k = 1")
        flags = _require(self.ctx, "mode")
        lam2 = float(self.ctx.hess_lambda_at_mode.source.entries[0, 0])
        a = lam2**-1.5
        ups = self._scalar_kernel(Kind.MODE, Variant.LAMBDA)
        if variant == "wass":
            val, err = self._univariate_integral(Kind.MODE, lambda x: x * x * abs(ups(x)))
            return self._report("mode-univariate-wass", "Wass", Kind.MODE, a * val,
                                knobs={"quad_err": a * err}, flags=flags)
        weight = lambda x: min(SQRT_PI_8 * x * x, abs(x)) * abs(ups(x))  # noqa: E731
        if variant == "tv":
            val, err = self._univariate_integral(Kind.MODE, weight)
            return self._report("mode-univariate-tv", "TV", Kind.MODE, a * val,
                                knobs={"quad_err": a * err}, flags=flags)
        if variant == "tv_eps":
            eps_w = default_epsilon(self.ctx) * math.sqrt(lam2) if eps is None else float(eps)
            joint, err = self._univariate_integral(Kind.MODE, weight, -eps_w, eps_w)
            p, _ = self._univariate_integral(Kind.MODE, lambda x: 1.0, -eps_w, eps_w)
            value = a * joint / p + TAIL_CONST * max(0.0, 1.0 - p)
            return self._report("mode-univariate-tv-eps", "TV", Kind.MODE, value, epsilon=eps_w,
                                knobs={"quad_err": a * err / p, "p_region": p}, flags=flags)
        raise ValueError(f"unknown univariate variant {variant!r}")

    # ---- MLE-centred bounds -----------------------------------------------
    def _mle_common(self):
        ctx = self.ctx
        n = ctx.n
        b = ctx.hess_beta_at_mle.inv_sqrt.entries
        St, S = self._mle_scalars()
        return n, b, St, S

    def mle_full(self) -> tuple[BoundReport, BoundReport]:
        flags = _require(self.ctx, "mle")
        n, b, St, S = self._mle_common()
        eng = self.engine(Kind.MLE)
        vals, valid = self._triple(eng, Variant.BETA_ETA, St, S)
        t1 = self._mean(eng, vals)
        mle = self.ctx.mle
        grad = self.ctx.prior.derivative(1, mle)
        c = self.ctx.prior.derivative(2, mle)
        cb = np.abs(c) @ np.abs(b)  # sum_m |c_lm b_mu|
        m1 = eng.expect_array(lambda w: np.abs(w))[0]
        value = t1.value / n**1.5 + float(St @ np.abs(grad)) / math.sqrt(n) + float(St @ cb @ m1) / n
        se = t1.std_error / n**1.5
        skipped = self._skipped(eng, valid)
        return (
            self._report("mle-full", "TV", Kind.MLE, TV_CONST * value, TV_CONST * se, flags=flags, skipped_mass=skipped),
            self._report("mle-full", "Wass", Kind.MLE, value, se, flags=flags, skipped_mass=skipped),
        )

    def mle_smooth(self, poly: PolySpec) -> BoundReport:
        flags = _require(self.ctx, "mle")
        n, b, St, S = self._mle_common()
        eng = self.engine(Kind.MLE)
        w = eng.nodes.w
        chi = poly.chi(w)
        chi_sum = chi.sum(axis=1)
        vals, valid = self._triple(eng, Variant.BETA_ETA, St, S, extra=chi_sum)
        t1 = self._mean(eng, vals)
        mle = self.ctx.mle
        grad = self.ctx.prior.derivative(1, mle)
        c = self.ctx.prior.derivative(2, mle)
        cb = np.abs(c) @ np.abs(b)
        e_chi = float(self._mean(eng, chi_sum).value)
        e_abs_chi = eng.expect_array(lambda x: np.abs(x) * poly.chi(x).sum(axis=1)[:, None])[0]
        value = (t1.value / n + float(St @ np.abs(grad)) * e_chi + float(St @ cb @ e_abs_chi) / math.sqrt(n)) / math.sqrt(n)
        return self._report("mle-smooth", "SmoothH", Kind.MLE, value, t1.std_error / n**1.5, flags=flags,
                            skipped_mass=self._skipped(eng, valid), knobs={"A": poly.A, "B": poly.B, "r": poly.r})

    def mle_univariate(self, variant: str = "wass") -> BoundReport:
        if self.ctx.k != 1:
            raise DimensionMismatch("univariate bounds need k = 1")
        flags = _require(self.ctx, "mle")
        n = self.ctx.n
        mle = self.ctx.mle
        s = math.sqrt(n * float(self.ctx.hess_beta_at_mle.source.entries[0, 0]))
        e1 = float(self.ctx.prior.derivative(1, mle)[0])
        e2 = float(self.ctx.prior.derivative(2, mle)[0, 0])
        ups = self._scalar_kernel(Kind.MLE, Variant.BETA_ETA)

        def core(x: float) -> float:
            return abs(e1 + e2 * x / s + x * x / (s * s) * ups(x))

        if variant == "wass":
            val, err = self._univariate_integral(Kind.MLE, core)
            return self._report("mle-univariate-wass", "Wass", Kind.MLE, val / s, knobs={"quad_err": err / s}, flags=flags)
        if variant == "tv":
            def weighted(x: float) -> float:
                wt = SQRT_PI_8 if abs(x) <= 1.0 / SQRT_PI_8 else 1.0 / abs(x)
                return wt * core(x)

            val, err = self._univariate_integral(Kind.MLE, weighted)
            return self._report("mle-univariate-tv", "TV", Kind.MLE, val / s, knobs={"quad_err": err / s}, flags=flags)
        raise ValueError(f"unknown univariate variant {variant!r}")

    def mle_weak_prior(self, use_sup: bool | None = None) -> tuple[BoundReport, BoundReport]:
        """Bound needing only first derivatives of ``eta``.

        ``use_sup`` replaces ``|E[d_l eta(theta)]|`` by the prior's
        ``sup |d eta|``; by default the supremum is used when it is known.
        """
        flags = _require(self.ctx, "weak_prior")
        n, b, St, S = self._mle_common()
        eng = self.engine(Kind.MLE)
        vals, valid = self._triple(eng, Variant.BETA_ONLY, St, S)
        t1 = self._mean(eng, vals)
        sup = self.ctx.prior.eta_grad_sup
        if use_sup is None:
            use_sup = sup is not None
        if use_sup:
            if sup is None:
                raise AssumptionFailure("prior has no finite bound on its gradient")
            eta_term = float(St.sum()) * sup
            eta_se = 0.0
        else:
            g_mean, g_se, _ = eng.expect_array(lambda w: self.ctx.prior.derivative(1, eng.std.inverse(w)))
            eta_term = float(St @ np.abs(g_mean))
            eta_se = float(St @ g_se)
        value = (t1.value + eta_term) / math.sqrt(n)
        se = math.hypot(t1.std_error, eta_se) / math.sqrt(n)
        skipped = self._skipped(eng, valid)
        knobs = {"eta_sup": bool(use_sup)}
        return (
            self._report("mle-weak-prior", "TV", Kind.MLE, TV_CONST * value, TV_CONST * se, flags=flags,
                         skipped_mass=skipped, knobs=knobs),
            self._report("mle-weak-prior", "Wass", Kind.MLE, value, se, flags=flags, skipped_mass=skipped, knobs=knobs),
        )

    # ---- lower bound and diagnostics ----------------------------------------
    def wass_lower_bound(self, kind: Kind | str = Kind.MODE) -> float:
        std = self.std(kind)
        law = self.ctx.law
        if law is not None:
            m = std.forward(law.mean())
        else:
            m = self.engine(kind).expect_array(lambda w: w)[0]
        return float(np.linalg.norm(np.atleast_1d(m)))

    def stein_residual(self, kind: Kind | str, test: "TestFunction", n_samples: int = 1_000_000,
                       stream: str = "stein") -> ExpectationEstimate:
        """Monte Carlo mean of the Stein density operator applied to ``test``."""
        from .rng import make_rng

        std = self.std(kind)
        law = self.ctx.law
        if law is None:
            raise NonFinite("the Stein diagnostic samples from the exact posterior law")
        rng = make_rng(self.config.seed, stream)
        theta = law.sample(rng, n_samples)
        w = std.forward(theta)
        score = (self.ctx.summary.T_array - self.ctx.log_posterior.grad(theta, strict=False)) @ std.inv_scale.entries
        vals = test.laplacian(w) + np.sum(score * test.grad(w), axis=1)
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
        return ExpectationEstimate(mean, se, "mc", n_samples)


@dataclass(frozen=True)
class TestFunction:
    """A smooth function on the standardised scale with its gradient and Laplacian."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]

    __test__ = False  # keep pytest from collecting this class


def linear_test_function() -> TestFunction:
    return TestFunction(
        "linear",
        lambda w: np.sum(w, axis=1),
        lambda w: np.ones_like(w),
        lambda w: np.zeros(len(w)),
    )


def quadratic_test_function() -> TestFunction:
    return TestFunction(
        "quadratic",
        lambda w: np.sum(w * w, axis=1),
        lambda w: 2.0 * w,
        lambda w: np.full(len(w), 2.0 * w.shape[1]),
    )


def constant_test_function() -> TestFunction:
    return TestFunction(
        "constant",
        lambda w: np.ones(len(w)),
        lambda w: np.zeros_like(w),
        lambda w: np.zeros(len(w)),
    )


# --------------------------------------------------------------------------
# function-style entry points


def upsilon(kernel: UpsilonKernel, l: int, u: int, v: int, w) -> float:
    return kernel.upsilon(l, u, v, w)


def delta_tilde(ctx: PosteriorContext, config: BoundConfig | None = None) -> ExpectationEstimate:
    return Bounds(ctx, config).delta_tilde()[0]


def bound_mode_tv_wass(ctx, config=None):
    return Bounds(ctx, config).mode_tv_wass()


def bound_mode_tv_local(ctx, region, breaks=(), config=None):
    return Bounds(ctx, config).mode_tv_local(region, breaks)


def bound_mode_tv_corollary(ctx, eps=None, r=1.0, config=None):
    return Bounds(ctx, config).mode_tv_corollary(eps, r)


def bound_mode_smooth(ctx, poly: PolySpec, config=None):
    return Bounds(ctx, config).mode_smooth(poly)


def bound_mode_univariate(ctx, variant="wass", eps=None, config=None):
    return Bounds(ctx, config).mode_univariate(variant, eps)


def bound_mle(ctx, variant="full", poly: PolySpec | None = None, config=None, use_sup=None):
    b = Bounds(ctx, config)
    if variant == "full":
        return b.mle_full()
    if variant == "smooth":
        if poly is None:
            raise ValueError("smooth variant needs a polynomial growth spec")
        return b.mle_smooth(poly)
    if variant == "univariate_tv":
        return b.mle_univariate("tv")
    if variant == "univariate_wass":
        return b.mle_univariate("wass")
    if variant == "weak_prior":
        return b.mle_weak_prior(use_sup)
    raise ValueError(f"unknown MLE bound variant {variant!r}")


def wass_lower_bound(ctx, kind="mode", config=None) -> float:
    return Bounds(ctx, config).wass_lower_bound(kind)


def stein_residual(ctx, kind, test: TestFunction, n_samples=1_000_000, config=None) -> ExpectationEstimate:
    return Bounds(ctx, config).stein_residual(kind, test, n_samples)
