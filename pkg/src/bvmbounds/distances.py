"""Reference distances between a standardised posterior and the standard normal.

These are the oracles the bounds are checked against, so they avoid the bound
engine's machinery: one-dimensional integrals go through
``scipy.integrate.quad`` with a composite Gauss-Legendre cross-check, and the
empirical transport distance uses an exact assignment solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, optimize, stats
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import AssignmentOverflow, DimensionMismatch, WindowTooSmall
from .rng import make_rng

WINDOW_Q = 1e-9
MASS_TOL = 1e-6
MAX_ASSIGNMENT = 600
MAX_EMPIRICAL_DIM = 4


@dataclass(frozen=True)
class DistanceEstimate:
    metric: str
    value: float
    error_bar: float
    method: str
    samples: int = 0

    def __post_init__(self):
        if not (self.value >= -self.error_bar - 1e-15):
            raise ValueError(f"negative {self.metric} estimate {self.value}")


def _check_window(cdfs: Sequence[Callable], lo: float, hi: float):
    for cdf in cdfs:
        outside = float(cdf(lo)) + 1.0 - float(cdf(hi))
        if outside > MASS_TOL:
            raise WindowTooSmall(f"window [{lo:.4g}, {hi:.4g}] leaves mass {outside:.3g} outside")


def _gl_composite(f: Callable[[np.ndarray], np.ndarray], edges: Sequence[float], panels: int, m: int = 16) -> float:
    x0, w0 = leggauss(m)
    edges = np.unique(np.asarray(edges, dtype=float))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        count = max(1, int(round(panels * (b - a) / (edges[-1] - edges[0]))))
        grid = np.linspace(a, b, count + 1)
        half = 0.5 * np.diff(grid)
        mid = 0.5 * (grid[:-1] + grid[1:])
        x = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        w = (half[:, None] * w0[None, :]).ravel()
        total += float(np.sum(w * f(x)))
    return total


def _integrate_1d(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, points: Sequence[float]) -> tuple[float, float]:
    """Adaptive quadrature with a fixed-rule cross-check; returns ``(value, error_bar)``."""
    pts = sorted(p for p in set(points) if lo < p < hi)
    val, err = integrate.quad(lambda t: float(f(np.array([t]))[0]), lo, hi, points=pts or None,
                              limit=1000, epsabs=1e-14, epsrel=1e-11)
    check = _gl_composite(f, [lo, hi, *pts], panels=800)
    return val, max(err, abs(val - check))


def _crossings(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, grid: int = 4001) -> list[float]:
    """Sign changes of ``g`` located by bracketing on a grid."""
    t = np.linspace(lo, hi, grid)
    v = g(t)
    out = []
    for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
        out.append(optimize.brentq(lambda s: float(g(np.array([s]))[0]), t[i], t[i + 1], xtol=1e-14))
    return out


def wass_1d(cdf_a: Callable, cdf_b: Callable, window: tuple[float, float], points: Sequence[float] = ()) -> DistanceEstimate:
    """``int |F_a - F_b| dt`` over a window holding all but ``1e-6`` of both laws."""
    lo, hi = window
    _check_window((cdf_a, cdf_b), lo, hi)
    diff = lambda t: np.asarray(cdf_a(t), dtype=float) - np.asarray(cdf_b(t), dtype=float)  # noqa: E731
    pts = list(points) + _crossings(diff, lo, hi)
    val, err = _integrate_1d(lambda t: np.abs(diff(t)), lo, hi, pts)
    return DistanceEstimate("Wass", val, err, "quad-cdf")


def tv_quadrature(pdf_a: Callable, pdf_b: Callable, dim: int, window, points: Sequence[float] = (),
                  panels: int = 60) -> DistanceEstimate:
    """Half the L1 distance between two densities on a window (``dim`` 1 or 2).

    For ``dim = 2`` the window is ``((lo1, hi1), (lo2, hi2))`` and the integral
    is a tensor Gauss-Legendre rule; the error bar is the change when the
    number of panels is halved.
    """
    if dim == 1:
        lo, hi = window
        diff = lambda t: np.asarray(pdf_a(t), dtype=float) - np.asarray(pdf_b(t), dtype=float)  # noqa: E731
        pts = list(points) + _crossings(diff, lo, hi)
        val, err = _integrate_1d(lambda t: 0.5 * np.abs(diff(t)), lo, hi, pts)
        # mass the window cuts off can change the distance by half its total
        missing = sum(max(0.0, 1.0 - _integrate_1d(pdf, lo, hi, pts)[0]) for pdf in (pdf_a, pdf_b))
        return DistanceEstimate("TV", val, err + 0.5 * missing, "quad-density")
    if dim != 2:
        raise DimensionMismatch("density quadrature supports one or two dimensions")

    def tensor(p):
        x0, w0 = leggauss(8)
        axes = []
        for lo, hi in window:
            grid = np.linspace(lo, hi, p + 1)
            half = 0.5 * np.diff(grid)
            mid = 0.5 * (grid[:-1] + grid[1:])
            axes.append(((mid[:, None] + half[:, None] * x0).ravel(), (half[:, None] * w0).ravel()))
        (x1, w1), (x2, w2) = axes
        g1, g2 = np.meshgrid(x1, x2, indexing="ij")
        pts = np.column_stack([g1.ravel(), g2.ravel()])
        wts = (w1[:, None] * w2[None, :]).ravel()
        pa, pb = np.asarray(pdf_a(pts)), np.asarray(pdf_b(pts))
        return 0.5 * float(np.sum(wts * np.abs(pa - pb))), float(np.sum(wts * pa)), float(np.sum(wts * pb))

    val, ma, mb = tensor(panels)
    coarse, _, _ = tensor(panels // 2)
    if max(1.0 - ma, 1.0 - mb) > MASS_TOL:
        raise WindowTooSmall(f"2-D window holds mass {min(ma, mb):.9f}")
    return DistanceEstimate("TV", val, abs(val - coarse), "tensor-gl")


def kolmogorov_1d(cdf_a: Callable, cdf_b: Callable, window: tuple[float, float], grid: int = 4001) -> DistanceEstimate:
    """``sup_t |F_a(t) - F_b(t)|`` by a grid search refined with a bounded scalar search."""
    lo, hi = window
    t = np.linspace(lo, hi, grid)
    g = lambda s: np.abs(np.asarray(cdf_a(s), dtype=float) - np.asarray(cdf_b(s), dtype=float))  # noqa: E731
    v = g(t)
    best = float(v.max())
    h = t[1] - t[0]
    for i in np.argsort(v)[-3:]:
        res = optimize.minimize_scalar(lambda s: -float(g(np.array([s]))[0]), bounds=(t[i] - h, t[i] + h),
                                       method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return DistanceEstimate("Kol", best, 1e-12, "grid-golden")


def wass_empirical(sampler_a: Callable, sampler_b: Callable, m: int = 500, reps: int = 100, seed: int = 0,
                   stream: str = "empirical") -> DistanceEstimate:
    """Mean optimal-assignment cost between ``m``-point samples, over ``reps`` repetitions.

    Samplers are ``(rng, size) -> (size, d)`` arrays. The empirical distance is
    biased upwards; treat it as an estimate, not an oracle.
    """
    if m > MAX_ASSIGNMENT:
        raise AssignmentOverflow(f"batch size {m} exceeds the exact-assignment limit {MAX_ASSIGNMENT}")
    vals = []
    for rep in range(reps):
        xa = np.atleast_2d(np.asarray(sampler_a(make_rng(seed, f"{stream}-a-{rep}"), m), dtype=float))
        xb = np.atleast_2d(np.asarray(sampler_b(make_rng(seed, f"{stream}-b-{rep}"), m), dtype=float))
        if xa.shape[0] != m:
            xa, xb = xa.T, xb.T
        if xa.shape[1] > MAX_EMPIRICAL_DIM or xa.shape != xb.shape:
            raise DimensionMismatch(f"empirical transport needs matching samples of dimension <= {MAX_EMPIRICAL_DIM}")
        cost = cdist(xa, xb)
        r, c = linear_sum_assignment(cost)
        vals.append(float(cost[r, c].mean()))
    vals = np.asarray(vals)
    spread = float(vals.std(ddof=1)) if reps > 1 else 0.0
    return DistanceEstimate("Wass", float(vals.mean()), spread, "assignment", samples=m * reps)


# --------------------------------------------------------------------------
# standardised posterior versus N(0, I)


def _normal_sampler(k: int):
    return lambda rng, size: rng.standard_normal((size, k))


def _pdf_1d(sl):
    slo, shi = sl.support()[0]

    def pdf(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        inside = (t > slo) & (t < shi)
        out[inside] = np.exp(sl.logpdf(t[inside][:, None]))
        return out

    return pdf


def posterior_oracles(ctx, std, metrics: Sequence[str] = ("Wass", "TV", "Kol"), empirical_reps: int = 20,
                      empirical_m: int = 500, seed: int = 0) -> dict[str, DistanceEstimate]:
    """Reference distances between the standardised exact posterior and ``N(0, I_k)``.

    One dimension: CDF and density quadrature. Two dimensions: density
    quadrature for TV and the empirical assignment estimate for Wasserstein.
    """
    from .standardize import StandardizedLaw

    law = ctx.law
    if law is None:
        raise WindowTooSmall("no exact posterior law is available for this prior")
    sl = StandardizedLaw(law, std)
    k = sl.dim
    out: dict[str, DistanceEstimate] = {}
    if k == 1:
        lo = min(float(sl.ppf(WINDOW_Q)), stats.norm.ppf(WINDOW_Q))
        hi = max(float(sl.ppf(1.0 - WINDOW_Q)), stats.norm.ppf(1.0 - WINDOW_Q))
        slo, shi = sl.support()[0]
        edges = [p for p in (slo, shi) if lo < p < hi]
        cdf = lambda t: sl.cdf(np.asarray(t, dtype=float))  # noqa: E731
        pdf = _pdf_1d(sl)
        if "Wass" in metrics:
            out["Wass"] = wass_1d(cdf, stats.norm.cdf, (lo, hi), edges)
        if "TV" in metrics:
            out["TV"] = tv_quadrature(pdf, stats.norm.pdf, 1, (lo, hi), edges)
        if "Kol" in metrics:
            out["Kol"] = kolmogorov_1d(cdf, stats.norm.cdf, (lo, hi))
        return out
    if k == 2:
        pdf = lambda w: np.exp(np.nan_to_num(sl.logpdf(w), nan=-np.inf))  # noqa: E731
        npdf = lambda w: np.exp(-0.5 * np.sum(w * w, axis=1)) / (2.0 * math.pi)  # noqa: E731
        if "TV" in metrics:
            for half in (8.0, 12.0, 16.0):
                try:
                    out["TV"] = tv_quadrature(pdf, npdf, 2, ((-half, half), (-half, half)))
                    break
                except WindowTooSmall:
                    continue
            else:
                raise WindowTooSmall("2-D TV window of half-width 16 is too small")
        if "Wass" in metrics:
            out["Wass"] = wass_empirical(lambda rng, size: sl.sample(rng, size), _normal_sampler(2),
                                         m=empirical_m, reps=empirical_reps, seed=seed)
        return out
    raise DimensionMismatch("reference distances are available for k <= 2 only")
