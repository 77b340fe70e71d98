"""``bvm`` command line: bound, simulate, plot and verify.

Configuration comes from flags, optionally on top of a ``key = value`` file
given with ``--config``; flags win. Recognised file keys::

    preset, model, tau, data_file, n, n_grid, seed, theorems, epsilon, r,
    G, n_mc, method, format, out, plot, log_y, empirical_reps,
    model_param.<name>, data_param.<name>

Lists (``tau``, ``n_grid``) are comma separated; ``n_grid`` also accepts
``start:stop:step``. The seed falls back to ``BVM_SEED`` and then to 0.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or a
failed theorem assumption.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .bounds import BoundConfig, BoundReport, Bounds
from .errors import BvmError, ConfigError
from .examples import FAMILIES, PRESETS, ExampleSpec, preset
from .harness import DEFAULT_GRID, collect_bounds, generic_bounds, read_sweep_csv, sweep
from .rng import make_rng
from .svgplot import sweep_chart

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
RECORD_FIELDS = ("theorem", "metric", "standardization", "n", "value", "clamped", "stderr", "epsilon", "r", "seed")


@dataclass
class RunConfig:
    preset: str | None = None
    model: str | None = None
    tau: tuple[float, ...] | None = None
    model_params: dict = field(default_factory=dict)
    data_params: dict = field(default_factory=dict)
    data_file: str | None = None
    n: int | None = None
    n_grid: tuple[int, ...] = DEFAULT_GRID
    seed: int | None = None
    theorems: str = ""
    epsilon: float | None = None
    r: float = 1.0
    G: int = 32
    n_mc: int = 200_000
    method: str = "auto"
    format: str = "text"
    out: str | None = None
    plot: str | None = None
    log_y: bool = False
    empirical_reps: int = 20

    def __post_init__(self):
        self.n_grid = tuple(sorted(int(n) for n in self.n_grid))
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid entries must be positive")

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get("BVM_SEED")
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"BVM_SEED={env!r} is not an integer") from None
        return 0

    def bound_config(self) -> BoundConfig:
        return BoundConfig(G=self.G, n_mc=self.n_mc, seed=self.resolved_seed(), method=self.method)

    def example(self) -> ExampleSpec:
        if self.preset:
            base = preset(self.preset)
            if self.model and self.model != base.key:
                raise ConfigError(f"preset {self.preset} uses model {base.key}, not {self.model}")
            tau = base.tau if self.tau is None else self.tau
            return ExampleSpec(base.key, tuple(tau), {**base.model_params, **self.model_params},
                               {**base.data_params, **self.data_params}, base.figure_theorems, base.name)
        if not self.model:
            raise ConfigError("give --preset or --model")
        if self.model not in FAMILIES:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(FAMILIES)}")
        return ExampleSpec(self.model, tuple(self.tau or ()), dict(self.model_params), dict(self.data_params),
                           name=self.model)


# --------------------------------------------------------------------------
# parsing


def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_grid(text: str) -> tuple[int, ...]:
    try:
        if ":" in text:
            start, stop, step = (int(t) for t in text.split(":"))
            return tuple(range(start, stop + 1, step))
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"n_grid: cannot parse {text!r}") from None


def _scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if "," in text:
        return _floats(text, "parameter")
    return text


def _pairs(items, what: str) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"{what}: expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _scalar(v.strip())
    return out


_CASTS = {
    "n": int, "seed": int, "G": int, "n_mc": int, "empirical_reps": int,
    "epsilon": float, "r": float,
    "tau": lambda v: _floats(v, "tau"), "n_grid": parse_grid,
    "log_y": lambda v: v.lower() in ("1", "true", "yes", "on"),
}


def read_config_file(path: str) -> dict:
    """Parse a ``key = value`` file; errors name the offending line."""
    known = {f.name for f in fields(RunConfig)}
    values: dict = {"model_params": {}, "data_params": {}}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                if key.startswith("model_param.") or key.startswith("data_param."):
                    group, name = key.split(".", 1)
                    values[group + "s"][name] = _scalar(value)
                elif key in known:
                    values[key] = _CASTS.get(key, str)(value)
                else:
                    raise ConfigError(f"unknown key {key!r}")
            except (ConfigError, ValueError) as err:
                raise ConfigError(f"{path}:{lineno}: {key}: {err}") from None
    return values


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--model", help="model key, e.g. bernoulli-beta")
    p.add_argument("--tau", help="comma-separated prior hyperparameters")
    p.add_argument("--model-param", action="append", metavar="NAME=VALUE")
    p.add_argument("--data-param", action="append", metavar="NAME=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--theorems", help="all, closed, figure, or a comma-separated list of theorem ids")
    p.add_argument("--G", type=int, help="segment quadrature nodes of the kernel")
    p.add_argument("--n-mc", type=int, dest="n_mc", help="Monte Carlo sample size when quadrature is not used")
    p.add_argument("--method", choices=("auto", "gl", "gl2d", "mc"))
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvm", description="Non-asymptotic normal approximation bounds for posteriors.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="compute bounds for one data set")
    _add_common(b)
    b.add_argument("--data-file", help="CSV of observations, one per row")
    b.add_argument("--n", type=int, help="sample size to simulate, or prefix length of the data file")
    b.add_argument("--epsilon", type=float, help="radius of the local TV bound, in parameter units")
    b.add_argument("--r", type=float, help="moment order of the local TV bound tail")
    b.add_argument("--format", choices=("text", "csv", "json"))

    s = sub.add_parser("simulate", help="sweep n and compare bounds with reference distances")
    _add_common(s)
    s.add_argument("--n-grid", help="comma list or start:stop:step")
    s.add_argument("--plot", help="also write the relative-error chart to this SVG file")
    s.add_argument("--log-y", action="store_true", default=None)
    s.add_argument("--empirical-reps", type=int, dest="empirical_reps")

    p = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p.add_argument("csv_file")
    p.add_argument("--out", help="SVG path (default stdout)")
    p.add_argument("--log-y", action="store_true")
    p.add_argument("--title", default="")

    v = sub.add_parser("verify", help="run the self-check suites")
    v.add_argument("suite", nargs="?", default="all", choices=("linalg", "derivs", "bounds", "oracles", "all"))
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    return parser


def config_from_args(args: argparse.Namespace, default_theorems: str) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {"model_params": {}, "data_params": {}}
    direct = {
        "preset": args.preset, "model": args.model, "seed": args.seed, "theorems": args.theorems, "G": args.G,
        "n_mc": args.n_mc, "method": args.method, "out": args.out,
        "data_file": getattr(args, "data_file", None), "n": getattr(args, "n", None),
        "epsilon": getattr(args, "epsilon", None), "r": getattr(args, "r", None),
        "format": getattr(args, "format", None), "plot": getattr(args, "plot", None),
        "log_y": getattr(args, "log_y", None), "empirical_reps": getattr(args, "empirical_reps", None),
    }
    if args.tau is not None:
        direct["tau"] = _floats(args.tau, "--tau")
    if getattr(args, "n_grid", None):
        direct["n_grid"] = parse_grid(args.n_grid)
    values.update({k: v for k, v in direct.items() if v is not None})
    values["model_params"].update(_pairs(args.model_param, "--model-param"))
    values["data_params"].update(_pairs(args.data_param, "--data-param"))
    values.setdefault("theorems", default_theorems)
    if not values["theorems"]:
        values["theorems"] = default_theorems
    return RunConfig(**values)


# --------------------------------------------------------------------------
# commands


def load_data(spec: ExampleSpec, path: str) -> np.ndarray:
    try:
        x = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read data file {path}: {err}") from None
    if spec.model.d == 1:
        return x.reshape(-1)
    if x.shape[1] == 1 and spec.key == "multinomial-dirichlet":
        cats = x[:, 0].astype(int)
        if np.any(cats != x[:, 0]) or cats.min() < 0 or cats.max() >= spec.model.d:
            raise ConfigError(f"category indices must be integers in 0..{spec.model.d - 1}")
        return np.eye(spec.model.d)[cats]
    return x


def _select(spec, ctx, B, cfg: RunConfig) -> tuple[list[BoundReport], dict[str, str]]:
    sel = cfg.theorems
    if sel in ("figure", "closed"):
        return collect_bounds(spec, ctx, B, sel), {}
    closed = spec.closed_bounds(ctx, B)
    generic, skipped = generic_bounds(ctx, B, epsilon=cfg.epsilon, r=cfg.r)
    if sel == "all":
        return closed + generic, skipped
    wanted = [t.strip() for t in sel.split(",") if t.strip()]
    pool = closed + generic
    known = {r.theorem for r in pool}
    missing = [t for t in wanted if t not in known]
    for t in missing:
        reasons = [msg for label, msg in skipped.items() if t.startswith(label) or label.startswith(t)]
        if reasons:
            raise ConfigError(f"theorem {t}: {reasons[0]}")
        raise ConfigError(f"theorem {t!r} is not available here; available: {', '.join(sorted(known))}")
    return [r for r in pool if r.theorem in wanted], skipped


def _render_reports(reports: list[BoundReport], fmt: str) -> str:
    recs = [r.to_record() for r in reports]
    if fmt == "json":
        return json.dumps(recs, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for rec in recs:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in rec.items()})
        return buf.getvalue()
    lines = [f"{'theorem':36s} {'metric':6s} {'std':5s} {'n':>6s} {'value':>14s} {'clamped':>10s} {'stderr':>10s}"]
    for rec in recs:
        lines.append(f"{rec['theorem']:36s} {rec['metric']:6s} {rec['standardization']:5s} {rec['n']:6d} "
                     f"{rec['value']:14.6g} {rec['clamped']:10.6g} {rec['stderr']:10.3g}")
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bound(cfg: RunConfig) -> int:
    spec = cfg.example()
    seed = cfg.resolved_seed()
    if cfg.data_file:
        data = load_data(spec, cfg.data_file)
        if cfg.n is not None:
            data = data[: cfg.n]
    else:
        if cfg.n is None:
            raise ConfigError("give --n to simulate data, or --data-file")
        data = spec.generate(make_rng(seed, "data"), cfg.n)
    ctx = spec.context(data)
    B = Bounds(ctx, cfg.bound_config())
    reports, skipped = _select(spec, ctx, B, cfg)
    for label, msg in sorted(skipped.items()):
        print(f"skipped {label}: {msg}", file=sys.stderr)
    if not reports:
        raise ConfigError("no theorem applies to this configuration")
    _emit(_render_reports(reports, cfg.format), cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    spec = cfg.example()
    seed = cfg.resolved_seed()
    theorems = cfg.theorems if cfg.theorems in ("figure", "closed", "all") else "figure"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            rows = sweep(spec, cfg.n_grid, seed, theorems, cfg.bound_config(), cfg.empirical_reps, out=fh)
    else:
        rows = sweep(spec, cfg.n_grid, seed, theorems, cfg.bound_config(), cfg.empirical_reps, out=sys.stdout)
    if cfg.plot:
        recs = [{"n": r.n, "theorem": r.theorem, "metric": r.metric, "rel_err": r.rel_err} for r in rows]
        with open(cfg.plot, "w", encoding="utf-8") as fh:
            fh.write(sweep_chart(recs, title=spec.name or spec.key, log_y=cfg.log_y))
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        with open(args.csv_file, encoding="utf-8") as fh:
            recs = read_sweep_csv(fh.read())
    except (OSError, ValueError) as err:
        raise ConfigError(str(err)) from None
    _emit(sweep_chart(recs, title=args.title, log_y=args.log_y), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    seed = args.seed if args.seed is not None else RunConfig().resolved_seed()
    results = verify.run(args.suite, seed)
    _emit(verify.report(results, seed), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bound":
            return cmd_bound(config_from_args(args, "all"))
        if args.command == "simulate":
            return cmd_simulate(config_from_args(args, "figure"))
        if args.command == "plot":
            return cmd_plot(args)
        return cmd_verify(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (BvmError, ArithmeticError, RuntimeError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
