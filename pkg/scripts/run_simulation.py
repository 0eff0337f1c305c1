#!/usr/bin/env python3
"""Run the random-polygon F1-ratio study and print per-vertex-count quartiles.

Full scale (vertex counts 5..30, 20 polygons each, 600 samples) trains 32
models on each of 520 polygons; use --jobs to spread polygons over processes.
The --desk preset runs the reduced version used by the acceptance suite.
"""

import argparse
import logging
import sys
import time

import numpy as np

from svddbw.polygon import run_simulation


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--desk", action="store_true", help="vertex counts 5,15,30 x 5 polygons x 300 samples")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--f", type=float, default=0.001)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)

    if args.desk:
        counts, per, n = [5, 15, 30], 5, 300
    else:
        counts, per, n = list(range(5, 31)), 20, 600

    def progress(i, total):
        if i % 10 == 0 or i == total:
            print(f"  {i}/{total} polygons", file=sys.stderr)

    start = time.perf_counter()
    rep = run_simulation(counts, polygons_per_count=per, n_sample=n, f=args.f, seed=args.seed,
                         n_jobs=args.jobs, progress=progress)
    elapsed = time.perf_counter() - start

    print(f"{'verts':>5} {'used':>4}  {'mean: min':>9} {'q1':>6} {'med':>6}   {'median: min':>11} {'q1':>6} {'med':>6}")
    for a in rep.aggregates:
        m, d = a.ratio_mean, a.ratio_median
        print(f"{a.n_vertices:5d} {a.n_used:4d}  {m.minimum:9.3f} {m.q1:6.3f} {m.median:6.3f}   "
              f"{d.minimum:11.3f} {d.q1:6.3f} {d.median:6.3f}")
    rm, rd = rep.ratios("mean"), rep.ratios("median")
    print(f"overall: ratio_mean min {rm.min():.3f} median {np.median(rm):.3f}; "
          f"ratio_median min {rd.min():.3f} median {np.median(rd):.3f}; "
          f"{len(rep.failures)} excluded; {elapsed:.0f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
