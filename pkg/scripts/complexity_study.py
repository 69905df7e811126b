"""Hybrid controller across the built-in arena scenarios: coverage, victims, collisions, energy.

Energy uses the placeholder idle + per-meter model, so kWh figures are only
comparable between scenarios of this simulator.
"""
import argparse
import statistics

from lfpso.experiments import Scenario, load_scenario, run_experiment

SCENARIOS = ("small", "large", "low-complexity", "high-complexity")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print(f"{'scenario':<17}{'robots':>7}{'coverage':>10}{'victims':>9}{'collisions':>12}{'kWh':>9}")
    for name in SCENARIOS:
        base = load_scenario(name)
        scen = Scenario(name, base.params, base.arena_template, n_trials=args.trials, base_seed=base.base_seed)
        s = run_experiment(scen, ["hybrid"], threads=args.threads).algorithms["hybrid"]
        kwh = statistics.fmean(s.energy_joules) / 3.6e6
        print(f"{name:<17}{base.params.n_robots:>7}{s.mean:10.4f}{statistics.fmean(s.victims_found):9.2f}"
              f"{statistics.fmean(s.collisions):12.2f}{kwh:9.4f}")


if __name__ == "__main__":
    main()
