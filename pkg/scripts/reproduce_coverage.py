"""Hybrid vs PSO vs LF coverage on the random-start and corner-start scenarios.

    python scripts/reproduce_coverage.py --trials 20 --out results/coverage
"""
import argparse
import time

from lfpso.experiments import Scenario, load_scenario, run_experiment
from lfpso.io import write_outputs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None, help="write CSV/PGM/JSON outputs under this directory")
    args = ap.parse_args()

    print(f"{'scenario':<14}{'algorithm':<9}{'mean':>8}{'std':>8}{'min':>8}{'max':>8}")
    for name in ("random-start", "corner-start"):
        base = load_scenario(name)
        scen = Scenario(name, base.params, base.arena_template, n_trials=args.trials, base_seed=args.seed)
        t0 = time.perf_counter()
        summary = run_experiment(scen, ["hybrid", "pso", "lf"], threads=args.threads)
        elapsed = time.perf_counter() - t0
        for algo, s in summary.algorithms.items():
            print(f"{name:<14}{algo:<9}{s.mean:8.4f}{s.std:8.4f}{s.min:8.4f}{s.max:8.4f}")
        pv = ", ".join(f"{k} p={v:.2g}" for k, v in summary.pvalues.items() if v is not None)
        print(f"  rank-sum: {pv or 'n/a'}  ({elapsed:.1f} s)")
        if args.out:
            write_outputs(summary, f"{args.out}/{name}")


if __name__ == "__main__":
    main()
