"""Seeded trial ensembles, built-in scenarios and algorithm comparison."""
from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import mannwhitneyu

from .core import ALGORITHMS, Arena, ConfigError, SimParams, trial_streams
from .engine import TrialResult, place_robots, run_trial

MIN_TRIALS_FOR_TEST = 3


@dataclass
class Scenario:
    name: str
    params: SimParams
    arena_template: Arena
    n_trials: int = 20
    base_seed: int = 0
    description: str = ""
    # Config keys the scenario file sets explicitly (used for conflict checks).
    explicit: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError(f"n_trials: must be >= 1 (got {self.n_trials})")

    def seed(self, trial: int) -> int:
        return self.base_seed + trial


@dataclass
class AlgorithmSummary:
    algorithm: str
    seeds: list[int]
    final_coverage: list[float]
    mean: float
    std: float
    min: float
    max: float
    mean_coverage_series: list[float]
    victims_found: list[int]
    collisions: list[int]
    energy_joules: list[float]

    @property
    def n_trials(self) -> int:
        return len(self.seeds)

    @classmethod
    def from_results(cls, algorithm: str, results: Sequence[TrialResult]) -> "AlgorithmSummary":
        cov = [r.final_coverage for r in results]
        series = np.mean(np.array([r.coverage_series for r in results]), axis=0)
        return cls(
            algorithm=algorithm,
            seeds=[r.seed for r in results],
            final_coverage=cov,
            mean=statistics.fmean(cov),
            std=statistics.stdev(cov) if len(cov) > 1 else 0.0,
            min=min(cov),
            max=max(cov),
            mean_coverage_series=series.tolist(),
            victims_found=[len(r.victims_found) for r in results],
            collisions=[len(r.collisions) for r in results],
            energy_joules=[math.fsum(r.energy_joules) for r in results],
        )

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "victims_found_mean": statistics.fmean(self.victims_found),
            "collisions_mean": statistics.fmean(self.collisions),
            "energy_joules_mean": statistics.fmean(self.energy_joules),
            "trials": [
                {"trial": i, "seed": s, "final_coverage": c, "victims_found": v,
                 "collisions": k, "energy_joules": e}
                for i, (s, c, v, k, e) in enumerate(zip(self.seeds, self.final_coverage,
                                                        self.victims_found, self.collisions,
                                                        self.energy_joules))
            ],
            "mean_coverage_series": self.mean_coverage_series,
        }


@dataclass
class ExperimentSummary:
    scenario: str
    base_seed: int
    params: SimParams
    algorithms: dict[str, AlgorithmSummary]
    pvalues: dict[str, Optional[float]]
    results: dict[str, list[TrialResult]] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "base_seed": self.base_seed,
            "params": self.params.to_dict(),
            "params_digest": self.params.digest(),
            "algorithms": {a: s.to_dict() for a, s in self.algorithms.items()},
            "rank_sum_pvalues": self.pvalues,
        }


def _run_one(args) -> TrialResult:
    params, arena, seed = args
    return run_trial(params, arena, seed)


def run_trials(params: SimParams, arena: Arena, seeds: Sequence[int], threads: int = 1) -> list[TrialResult]:
    """Run one trial per seed; results come back in seed order whatever the pool does."""
    jobs = [(params, arena, s) for s in seeds]
    try:
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_run_one, jobs))
        else:
            results = [_run_one(j) for j in jobs]
    except ConfigError as exc:
        raise ConfigError(f"{exc} (while running seeds {seeds[0]}..{seeds[-1]})") from exc
    for r in results:
        # Grids are only needed for output writing; drop the trace bulk.
        r.traces = None
    return results


def run_experiment(scenario: Scenario, algorithms: Iterable[str] | None = None,
                   threads: int = 1) -> ExperimentSummary:
    """Run ``scenario.n_trials`` trials per algorithm (trial i uses base_seed + i)."""
    algos = list(algorithms) if algorithms is not None else [scenario.params.algorithm]
    for a in algos:
        if a not in ALGORITHMS:
            raise ConfigError(f"algorithm: must be one of {', '.join(ALGORITHMS)} (got {a!r})")
    seeds = [scenario.seed(i) for i in range(scenario.n_trials)]
    results = {}
    for a in algos:
        params = scenario.params.replace(algorithm=a)
        for s in seeds:
            _check_seed(params, scenario.arena_template, s)
        results[a] = run_trials(params, scenario.arena_template, seeds, threads)
    return summarize(scenario.name, scenario.base_seed, scenario.params, results)


def _check_seed(params, arena, seed):
    # Fixed starts are validated up-front so a bad layout fails before any run.
    if params.start_mode == "fixed":
        place_robots(params, arena.fresh(), trial_streams(seed, params.n_robots)[0])


def summarize(name: str, base_seed: int, params: SimParams,
              results: dict[str, list[TrialResult]]) -> ExperimentSummary:
    algos = {a: AlgorithmSummary.from_results(a, rs) for a, rs in results.items()}
    pvalues = {}
    names = list(algos)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            try:
                pvalues[f"{a}_vs_{b}"] = rank_sum_pvalue(algos[a].final_coverage, algos[b].final_coverage)
            except ValueError:
                pvalues[f"{a}_vs_{b}"] = None
    return ExperimentSummary(name, base_seed, params, algos, pvalues, results)


def rank_sum_pvalue(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Mann-Whitney p-value (midranks for ties; exact for small tie-free samples)."""
    if min(len(a), len(b)) < MIN_TRIALS_FOR_TEST:
        raise ValueError(f"need at least {MIN_TRIALS_FOR_TEST} trials per algorithm for a rank-sum test")
    if len(set(a) | set(b)) == 1:
        return 1.0
    return float(mannwhitneyu(a, b, alternative="two-sided", method="auto").pvalue)


def compare(summary: ExperimentSummary, algo_a: str, algo_b: str) -> tuple[float, float]:
    """Mean final-coverage difference (a - b) and the rank-sum p-value."""
    try:
        sa, sb = summary.algorithms[algo_a], summary.algorithms[algo_b]
    except KeyError as exc:
        raise ValueError(f"algorithm {exc.args[0]!r} not in summary") from None
    if sa.n_trials != sb.n_trials:
        raise ValueError("algorithms have different trial counts")
    return sa.mean - sb.mean, rank_sum_pvalue(sa.final_coverage, sb.final_coverage)


# ------------------------------------------------------------------ scenarios


BUILTIN_SCENARIOS = ("random-start", "corner-start", "small", "large", "low-complexity", "high-complexity")


def scenario_names() -> list[str]:
    return list(BUILTIN_SCENARIOS)


def load_scenario(name: str) -> Scenario:
    from .io import scenario_from_text

    path = resources.files("lfpso").joinpath("scenarios", f"{name}.yaml")
    if name not in BUILTIN_SCENARIOS or not path.is_file():
        raise ConfigError(f"scenario: unknown name {name!r} (available: {', '.join(scenario_names())})")
    return scenario_from_text(path.read_text())


def builtin_scenarios() -> list[Scenario]:
    return [load_scenario(n) for n in scenario_names()]
