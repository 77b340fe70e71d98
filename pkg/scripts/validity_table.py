"""Every applicable bound next to its reference distance, for each preset.

    python3 scripts/validity_table.py --n 100 500 --seed 7
"""

import argparse
import math

from bvmbounds.bounds import BoundConfig, Bounds
from bvmbounds.distances import posterior_oracles
from bvmbounds.examples import PRESETS
from bvmbounds.harness import generic_bounds
from bvmbounds.rng import make_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[100, 500])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    print(f"{'preset':20s} {'n':>4s} {'theorem':34s} {'metric':6s} {'std':4s} {'bound':>11s} {'oracle':>11s} ok")
    for name, spec in PRESETS.items():
        for n in args.n:
            ctx = spec.context(spec.generate(make_rng(args.seed, "data"), n))
            B = Bounds(ctx, BoundConfig(seed=args.seed))
            generic, skipped = generic_bounds(ctx, B)
            reports = spec.closed_bounds(ctx, B) + generic
            oracles = {k: posterior_oracles(ctx, B.std(k), ("Wass", "TV"), seed=args.seed)
                       for k in {r.standardization for r in reports}}
            for r in reports:
                o = oracles[r.standardization].get(r.metric)
                if o is None:
                    continue
                ok = r.value >= o.value - 3 * math.hypot(r.std_error, o.error_bar)
                print(f"{name:20s} {n:4d} {r.theorem:34s} {r.metric:6s} {r.standardization:4s} "
                      f"{r.value:11.4g} {o.value:11.4g} {'yes' if ok else 'NO'}")
            for label in sorted(skipped):
                print(f"{name:20s} {n:4d} {label:34s} skipped: {skipped[label]}")


if __name__ == "__main__":
    main()
