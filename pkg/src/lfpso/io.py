"""Configuration parsing/serialization and result writers.

Config files are YAML mappings with flat keys: every ``SimParams`` field plus
``obstacles`` (list of ``[x0, y0, x1, y1]``) and ``victims`` (list of
``[x, y]``). Unspecified keys take their defaults; unknown keys are errors.

Output files (all text, '.' decimal separator, newline-terminated):

- ``summary.json``: experiment summary with per-trial seeds and coverages
- ``coverage.csv``: ``trial,timestep,coverage_fraction``
- ``paths_<trial>.csv``: ``timestep,robot_id,x_m,y_m``
- ``grid_<trial>.pgm``: plain (P2) PGM, one pixel per cell, explored = 255,
  top row is the arena's top edge
- ``events_<trial>.csv``: ``timestep,event,robot_id,other_id``
"""
from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from pathlib import Path
from typing import Any

import yaml

from .core import Arena, ConfigError, ExplorationGrid, SimParams
from .engine import TrialResult
from .experiments import ExperimentSummary, Scenario

_FIELDS = {f.name: f for f in dataclasses.fields(SimParams)}
ARENA_KEYS = ("obstacles", "victims")
CONFIG_KEYS = tuple(_FIELDS) + ARENA_KEYS
SCENARIO_KEYS = ("name", "description", "layout_version", "n_trials", "base_seed", "config")

_DEFAULTS = SimParams()


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(key: str, value: Any):
    default = getattr(_DEFAULTS, key)
    if key == "levy_step_cap":
        if value is None:
            return None
        if not _is_number(value):
            raise ConfigError(f"{key}: expected a number or null (got {value!r})")
        return float(value)
    if key == "start_points":
        return tuple(_point(key, p) for p in _list(key, value))
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false (got {value!r})")
        return value
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer (got {value!r})")
        return value
    if isinstance(default, float):
        if not _is_number(value):
            raise ConfigError(f"{key}: expected a number (got {value!r})")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string (got {value!r})")
    return value


def _list(key, value) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{key}: expected a list (got {value!r})")
    return value


def _point(key, p) -> tuple[float, float]:
    if not (isinstance(p, list) and len(p) == 2 and all(map(_is_number, p))):
        raise ConfigError(f"{key}: expected [x, y] pairs (got {p!r})")
    return float(p[0]), float(p[1])


def _rect(key, r) -> list[float]:
    if not (isinstance(r, list) and len(r) == 4 and all(map(_is_number, r))):
        raise ConfigError(f"{key}: expected [x0, y0, x1, y1] rectangles (got {r!r})")
    return [float(v) for v in r]


def _load_mapping(text: str, what: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{what}: malformed YAML ({exc.__class__.__name__})") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{what}: top level must be a mapping")
    return data


def config_from_mapping(data: dict) -> tuple[SimParams, Arena]:
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    kwargs = {k: _coerce(k, v) for k, v in data.items() if k in _FIELDS}
    params = SimParams(**kwargs)
    obstacles = [_rect("obstacles", r) for r in _list("obstacles", data.get("obstacles", []))]
    victims = [_point("victims", p) for p in _list("victims", data.get("victims", []))]
    arena = Arena.build(params, obstacles, victims)
    if params.start_mode == "fixed":
        for p in params.start_points:
            if not arena.footprint_free(p, params.robot_size):
                raise ConfigError(f"start_points: {list(p)} overlaps an obstacle or the wall")
    return params, arena


def parse_config(text: str) -> tuple[SimParams, Arena]:
    return config_from_mapping(_load_mapping(text, "config"))


def config_to_mapping(params: SimParams, arena: Arena | None = None) -> dict:
    data = params.to_dict()
    data["obstacles"] = [o.as_list() for o in arena.obstacles] if arena else []
    data["victims"] = [list(v) for v in arena.victims] if arena else []
    return data


def serialize_config(params: SimParams, arena: Arena | None = None) -> str:
    return yaml.safe_dump(config_to_mapping(params, arena), sort_keys=False, default_flow_style=None)


def scenario_from_text(text: str) -> Scenario:
    data = _load_mapping(text, "scenario")
    unknown = sorted(set(data) - set(SCENARIO_KEYS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown scenario key")
    if "name" not in data:
        raise ConfigError("name: scenario file needs a name")
    config = data.get("config") or {}
    params, arena = config_from_mapping(config)
    for key in ("n_trials", "base_seed"):
        if key in data and (not isinstance(data[key], int) or isinstance(data[key], bool)):
            raise ConfigError(f"{key}: expected an integer")
    return Scenario(
        name=str(data["name"]),
        params=params,
        arena_template=arena,
        n_trials=data.get("n_trials", 20),
        base_seed=data.get("base_seed", 0),
        description=str(data.get("description", "")),
        explicit=dict(config),
    )


# -------------------------------------------------------------------- outputs


def ensure_writable(out_dir: str | os.PathLike) -> Path:
    """Create ``out_dir`` if needed and prove it is writable."""
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path, prefix=".probe-"):
            pass
    except OSError as exc:
        raise ConfigError(f"--out: directory {str(path)!r} is not writable ({exc.strerror})") from None
    return path


def _num(x: float) -> str:
    return repr(float(x))


def _write(path: Path, lines: list[str]) -> None:
    path.write_text("".join(line + "\n" for line in lines), encoding="ascii")


def pgm_lines(grid: ExplorationGrid) -> list[str]:
    lines = ["P2", f"{grid.cols} {grid.rows}", "255"]
    for row in grid.explored[::-1]:
        lines.append(" ".join("255" if v else "0" for v in row))
    return lines


def write_trial_files(result: TrialResult, trial: int, out: Path) -> None:
    rows = ["timestep,robot_id,x_m,y_m"]
    n_t = len(result.paths[0])
    for t in range(n_t):
        for rid, path in enumerate(result.paths):
            x, y = path[t]
            rows.append(f"{t},{rid},{_num(x)},{_num(y)}")
    _write(out / f"paths_{trial}.csv", rows)

    events = [(c.t, f"{c.kind}_collision", c.robot, c.other) for c in result.collisions]
    events += [(v.t, "victim_found", v.robot, v.victim) for v in result.victims_found]
    events.sort()
    _write(out / f"events_{trial}.csv",
           ["timestep,event,robot_id,other_id"] + [f"{t},{e},{r},{o}" for t, e, r, o in events])
    if result.grid is not None:
        _write(out / f"grid_{trial}.pgm", pgm_lines(result.grid))


def write_outputs(summary: ExperimentSummary, out_dir: str | os.PathLike) -> list[Path]:
    """Write summary.json plus per-algorithm CSV/PGM files.

    A single-algorithm summary writes everything into ``out_dir``; with
    several algorithms each gets an ``out_dir/<algorithm>/`` subdirectory and
    ``summary.json`` stays at the top.
    """
    root = ensure_writable(out_dir)
    written = []
    nested = len(summary.algorithms) > 1
    for algo, results in summary.results.items():
        out = root / algo if nested else root
        out.mkdir(exist_ok=True)
        rows = ["trial,timestep,coverage_fraction"]
        for i, r in enumerate(results):
            rows += [f"{i},{t},{_num(c)}" for t, c in enumerate(r.coverage_series)]
            write_trial_files(r, i, out)
        _write(out / "coverage.csv", rows)
        written.append(out / "coverage.csv")
    payload = summary.to_dict()
    payload["layout"] = "nested" if nested else "flat"
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    (root / "summary.json").write_text(text + "\n", encoding="ascii")
    written.append(root / "summary.json")
    return written
