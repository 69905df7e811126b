"""Command-line entry point: ``lfpso {run,compare,scenarios,validate}``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .core import ALGORITHMS, ConfigError
from .experiments import Scenario, compare, load_scenario, run_experiment, scenario_names
from .io import config_from_mapping, ensure_writable, serialize_config, write_outputs, _load_mapping


@dataclass
class RunRequest:
    command: str
    config_path: Optional[str] = None
    scenario: Optional[str] = None
    algorithm: Optional[str] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    steps: Optional[int] = None
    out_dir: str = "results"
    threads: int = 1


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _non_negative(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfpso", description="Multi-robot Lévy/PSO exploration simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--scenario", metavar="NAME")
    common.add_argument("--algo", choices=ALGORITHMS)
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--trials", type=_positive, metavar="N")
    common.add_argument("--steps", type=_non_negative, metavar="N")
    common.add_argument("--out", default="results", metavar="DIR")
    common.add_argument("--threads", type=_positive, default=1, metavar="N")
    sub.add_parser("run", parents=[common], help="run one scenario with one algorithm")
    sub.add_parser("compare", parents=[common], help="run all three algorithms on one scenario")
    sub.add_parser("scenarios", help="list built-in scenarios")
    sub.add_parser("validate", parents=[common], help="print the effective parameters and exit")
    return parser


def resolve_scenario(req: RunRequest) -> Scenario:
    """Merge built-in scenario, config file and flag overrides into one scenario."""
    if req.scenario is not None:
        scenario = load_scenario(req.scenario)
    else:
        scenario = None
    config: dict = {}
    if req.config_path is not None:
        try:
            text = Path(req.config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {req.config_path!r} ({exc.strerror})") from None
        config = _load_mapping(text, "config")
    if scenario is not None:
        clashes = sorted(k for k, v in config.items() if k in scenario.explicit and scenario.explicit[k] != v)
        if clashes:
            raise ConfigError("--config contradicts --scenario "
                              f"{scenario.name} on: {', '.join(clashes)}")
        merged = {**scenario.explicit, **config}
        name, n_trials, base_seed = scenario.name, scenario.n_trials, scenario.base_seed
    else:
        merged = config
        name, n_trials, base_seed = (Path(req.config_path).stem if req.config_path else "default"), 1, 0
    if req.steps is not None:
        merged["n_steps"] = req.steps
    if req.algorithm is not None:
        merged["algorithm"] = req.algorithm
    params, arena = config_from_mapping(merged)
    return Scenario(
        name=name,
        params=params,
        arena_template=arena,
        n_trials=req.trials if req.trials is not None else n_trials,
        base_seed=req.seed if req.seed is not None else base_seed,
        explicit=merged,
    )


def execute(req: RunRequest) -> int:
    if req.command == "scenarios":
        for name in scenario_names():
            s = load_scenario(name)
            print(f"{name}\t{s.description}")
        return 0
    scenario = resolve_scenario(req)
    if req.command == "validate":
        sys.stdout.write(serialize_config(scenario.params, scenario.arena_template))
        return 0
    ensure_writable(req.out_dir)
    if req.command == "run":
        summary = run_experiment(scenario, threads=req.threads)
    else:
        summary = run_experiment(scenario, ALGORITHMS, threads=req.threads)
    write_outputs(summary, req.out_dir)
    for algo, s in summary.algorithms.items():
        print(f"{algo}: mean coverage {s.mean:.4f} (std {s.std:.4f}, n={s.n_trials})")
    if req.command == "compare" and scenario.n_trials >= 3:
        for other in ("pso", "lf"):
            diff, p = compare(summary, "hybrid", other)
            print(f"hybrid - {other}: {diff:+.4f} (rank-sum p = {p:.3g})")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    req = RunRequest(
        command=args.command,
        config_path=getattr(args, "config", None),
        scenario=getattr(args, "scenario", None),
        algorithm=getattr(args, "algo", None),
        seed=getattr(args, "seed", None),
        trials=getattr(args, "trials", None),
        steps=getattr(args, "steps", None),
        out_dir=getattr(args, "out", "results"),
        threads=getattr(args, "threads", 1),
    )
    try:
        return execute(req)
    except (ConfigError, ValueError) as exc:
        print(f"lfpso: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
