"""Relative-error sweeps for the four figure presets.

Writes ``<preset>.csv`` and ``<preset>.svg`` into the output directory
(default ``figures/``). Sizes run over nested prefixes of one seeded sample.

    python3 scripts/fig1_sweep.py --seed 7 --out figures
"""

import argparse
from pathlib import Path

from bvmbounds.examples import preset
from bvmbounds.harness import read_sweep_csv, sweep
from bvmbounds.svgplot import sweep_chart

FIGURES = ("fig1a-bernoulli", "fig1b-poisson", "fig1c-normal", "fig1d-multinomial")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--n-grid", default="100,150,200,250,300,350,400,450,500")
    ap.add_argument("--empirical-reps", type=int, default=100)
    ap.add_argument("--log-y", action="store_true")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = [int(n) for n in args.n_grid.split(",")]
    for name in FIGURES:
        csv_path = out / f"{name}.csv"
        with open(csv_path, "w", newline="") as fh:
            sweep(preset(name), grid, seed=args.seed, empirical_reps=args.empirical_reps, out=fh)
        recs = read_sweep_csv(csv_path.read_text())
        (out / f"{name}.svg").write_text(sweep_chart(recs, title=name, log_y=args.log_y))
        worst = max(r["rel_err"] for r in recs)
        print(f"{name}: {len(recs)} rows, largest relative error {worst:.3g}")


if __name__ == "__main__":
    main()
