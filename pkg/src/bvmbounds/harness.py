"""Bound collection and n-sweeps with reference distances."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence, TextIO

from .bounds import BoundConfig, BoundReport, Bounds
from .distances import DistanceEstimate, posterior_oracles
from .errors import BvmError
from .examples import ExampleSpec
from .rng import make_rng
from .standardize import Kind

DEFAULT_GRID = (100, 200, 300, 400, 500)
CSV_HEADER = ("n", "theorem", "metric", "standardization", "bound", "clamped", "oracle", "rel_err",
              "bound_se", "oracle_se", "seed")


def generic_bounds(ctx, B: Bounds, epsilon: float | None = None,
                   r: float | None = None) -> tuple[list[BoundReport], dict[str, str]]:
    """Every applicable engine bound; theorems whose assumptions fail are listed as skipped.

    ``epsilon`` and ``r`` feed the local TV bound, with ``epsilon`` in
    parameter units.
    """
    reports: list[BoundReport] = []
    skipped: dict[str, str] = {}

    def attempt(label, fn):
        try:
            out = fn()
        except BvmError as err:
            skipped[label] = f"{type(err).__name__}: {err}"
            return
        reports.extend(out if isinstance(out, (list, tuple)) else [out])

    attempt("mode-tv-wass", B.mode_tv_wass)
    attempt("mode-corollary", lambda: B.mode_tv_corollary(epsilon, 1.0 if r is None else r))
    if ctx.k == 1:
        for v in ("wass", "tv", "tv_eps"):
            attempt(f"mode-univariate-{v.replace('_', '-')}", lambda v=v: B.mode_univariate(v))
        for v in ("tv", "wass"):
            attempt(f"mle-univariate-{v}", lambda v=v: B.mle_univariate(v))
    attempt("mle-full", B.mle_full)
    attempt("mle-weak-prior", B.mle_weak_prior)
    return reports, skipped


def collect_bounds(spec: ExampleSpec, ctx, B: Bounds, which: str = "all") -> list[BoundReport]:
    """Closed-form bounds (``figure`` keeps only the plotted ones) plus, for ``all``, the engine bounds."""
    closed = spec.closed_bounds(ctx, B)
    if which == "figure":
        return [r for r in closed if r.theorem in spec.figure_theorems]
    if which == "closed":
        return closed
    if which != "all":
        raise ValueError(f"unknown theorem selection {which!r}")
    return closed + generic_bounds(ctx, B)[0]


@dataclass(frozen=True)
class SweepRow:
    n: int
    theorem: str
    metric: str
    standardization: str
    bound: float
    clamped: float
    oracle: float
    rel_err: float
    bound_se: float
    oracle_se: float
    seed: int

    def as_strings(self) -> list[str]:
        return [repr(v) if isinstance(v, float) else str(v) for v in (getattr(self, f.name) for f in fields(self))]


def relative_error(bound: float, oracle: float) -> float:
    return abs(bound - oracle) / oracle if oracle > 0 else math.nan


def _rows_for(n, reports, oracles: dict[str, dict[str, DistanceEstimate]], seed) -> list[SweepRow]:
    rows = []
    for r in reports:
        est = oracles.get(r.standardization, {}).get(r.metric)
        if est is None:
            continue
        rows.append(SweepRow(n, r.theorem, r.metric, r.standardization, r.value, r.clamped, est.value,
                             relative_error(r.value, est.value), r.std_error, est.error_bar, seed))
    return rows


def sweep(spec: ExampleSpec, n_grid: Sequence[int] = DEFAULT_GRID, seed: int = 0, theorems: str = "figure",
          config: BoundConfig | None = None, empirical_reps: int = 20, out: TextIO | None = None) -> list[SweepRow]:
    """Bounds and reference distances on nested prefixes of one seeded sample.

    Rows are written to ``out`` as they are produced; if a grid point fails,
    a ``# FAILED`` trailer line is written before the error propagates.
    """
    grid = sorted(int(n) for n in n_grid)
    if not grid:
        raise ValueError("empty n grid")
    data = spec.generate(make_rng(seed, "data"), grid[-1])
    cfg = config or BoundConfig(seed=seed)
    writer = None
    if out is not None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
    rows: list[SweepRow] = []
    for n in grid:
        try:
            ctx = spec.context(data[:n])
            B = Bounds(ctx, cfg)
            reports = collect_bounds(spec, ctx, B, theorems)
            oracles = {}
            for kind in {r.standardization for r in reports}:
                oracles[kind] = posterior_oracles(ctx, B.std(Kind(kind)), ("Wass", "TV"),
                                                  empirical_reps=empirical_reps, seed=seed)
            new = _rows_for(n, reports, oracles, seed)
        except Exception as err:
            if out is not None:
                out.write(f"# FAILED at n={n}: {type(err).__name__}: {err}\n")
                out.flush()
            raise
        rows.extend(new)
        if writer is not None:
            for row in new:
                writer.writerow(row.as_strings())
            out.flush()
    return rows


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_strings())
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for rec in reader:
        rec = dict(rec)
        rec["n"] = int(rec["n"])
        for key in ("bound", "clamped", "oracle", "rel_err", "bound_se", "oracle_se"):
            rec[key] = float(rec[key])
        out.append(rec)
    return out


def validity_margin(report: BoundReport, oracle: DistanceEstimate) -> tuple[float, float]:
    """``(bound - oracle, combined error)`` for an upper-bound check."""
    return report.value - oracle.value, math.hypot(report.std_error, oracle.error_bar)
