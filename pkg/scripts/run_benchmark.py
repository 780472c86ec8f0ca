"""Time the interface inversions of LM-SSS against classical SSS.

    python3 scripts/run_benchmark.py [--njs 1,2,6,12] [--trials 10000] [--out bench.json]
"""

import argparse
import json

from dynsub import bench_inversions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--njs", default="1,2,6,12")
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    rep = bench_inversions([int(x) for x in args.njs.split(",")], args.trials, seed=args.seed)
    print("solves per coupling:", rep["coupling_solve_counts"])
    print(f"{'n_J':>4s} {'LM-SSS median':>14s} {'classical median':>17s} {'ratio':>6s}")
    for r in rep["results"]:
        print(f"{r['n_J']:4d} {r['lmsss']['median_s']:14.3e} "
              f"{r['classical']['median_s']:17.3e} {r['ratio_median']:6.2f}")
    if rep.get("trend_spearman_rho") is not None:
        print(f"Spearman rho (ratio vs n_J): {rep['trend_spearman_rho']:.2f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep, fh, indent=2)


if __name__ == "__main__":
    main()
