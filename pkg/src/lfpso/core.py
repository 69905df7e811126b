"""Domain types, exploration grid, geometry and seeded random streams.

Coordinates: origin at the arena's lower-left corner, x to the right, y up,
angles measured counter-clockwise from +x, all lengths in meters.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

Point = tuple[float, float]

ALGORITHMS = ("hybrid", "pso", "lf")
START_MODES = ("random", "fixed")
REPULSION_AGGREGATES = ("sum", "mean")

BETA_MIN, BETA_MAX = 0.3, 1.99

# Absolute tolerance for contact / footprint-membership comparisons (meters).
GEOM_EPS = 1e-9
TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map an angle into [0, 2*pi); a tiny negative input must not land on 2*pi."""
    w = theta % TWO_PI
    return 0.0 if w >= TWO_PI else w


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ConfigError(f"degenerate rectangle {self.as_list()}")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def expanded(self, margin: float) -> "Rect":
        return Rect(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        return (self.x0 - tol <= p[0] <= self.x1 + tol
                and self.y0 - tol <= p[1] <= self.y1 + tol)

    def overlaps_interior(self, other: "Rect", tol: float = GEOM_EPS) -> bool:
        return (self.x0 < other.x1 - tol and other.x0 < self.x1 - tol
                and self.y0 < other.y1 - tol and other.y0 < self.y1 - tol)

    def as_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]


def footprint(center: Point, size: float) -> Rect:
    h = size / 2.0
    return Rect(center[0] - h, center[1] - h, center[0] + h, center[1] + h)


def ray_rect_distance(origin: Point, angle: float, rect: Rect) -> float:
    """Distance along the ray at ``angle`` from ``origin`` to ``rect`` (slab method).

    Returns ``0.0`` when the origin lies inside the closed rectangle and
    ``math.inf`` when the ray misses.
    """
    dx, dy = math.cos(angle), math.sin(angle)
    t_enter, t_exit = 0.0, math.inf
    for o, d, lo, hi in ((origin[0], dx, rect.x0, rect.x1), (origin[1], dy, rect.y0, rect.y1)):
        if abs(d) < 1e-12:
            if o < lo or o > hi:
                return math.inf
            continue
        t0, t1 = (lo - o) / d, (hi - o) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_enter = max(t_enter, t0)
        t_exit = min(t_exit, t1)
        if t_enter > t_exit:
            return math.inf
    return t_enter


def ray_wall_distance(origin: Point, angle: float, width: float, height: float) -> float:
    """Distance along a ray from a point inside the arena to the enclosing wall."""
    dx, dy = math.cos(angle), math.sin(angle)
    t = math.inf
    if dx > 1e-12:
        t = min(t, (width - origin[0]) / dx)
    elif dx < -1e-12:
        t = min(t, -origin[0] / dx)
    if dy > 1e-12:
        t = min(t, (height - origin[1]) / dy)
    elif dy < -1e-12:
        t = min(t, -origin[1] / dy)
    return max(t, 0.0)


@dataclass(frozen=True)
class SimParams:
    """All tunable constants of a trial. Defaults are the baseline experiment."""

    omega: float = 0.6
    p_omega: float = 2.0
    n_omega: float = 2.0
    beta: float = 1.0
    comm_range: float = 2.0
    v_max: float = 0.2
    dt: float = 1.0
    arena_width: float = 20.0
    arena_height: float = 20.0
    robot_size: float = 0.6
    cell_size: float = 0.2
    sensor_range: float = 0.5
    victim_detect_range: float = 0.5
    levy_scale: float = 1.0
    # None means the arena diagonal.
    levy_step_cap: Optional[float] = None
    n_robots: int = 10
    n_steps: int = 600
    algorithm: str = "hybrid"
    energy_idle_power: float = 9.0
    energy_move_coeff: float = 30.0
    start_mode: str = "random"
    start_points: tuple[Point, ...] = ()
    repulsion_aggregate: str = "sum"
    # Hybrid only: an avoidance episode ends the in-flight Lévy step.
    refresh_local_best_on_avoidance: bool = True

    def __post_init__(self):
        # Normalise list input (from config files) to hashable tuples.
        pts = tuple((float(p[0]), float(p[1])) for p in self.start_points)
        object.__setattr__(self, "start_points", pts)
        self.validate()

    def validate(self) -> None:
        for name in ("omega", "p_omega", "n_omega"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be >= 0 (got {getattr(self, name)})")
        for name in ("comm_range", "v_max", "dt", "arena_width", "arena_height", "robot_size",
                     "cell_size", "sensor_range", "victim_detect_range", "levy_scale"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name}: must be > 0 (got {getattr(self, name)})")
        if self.levy_step_cap is not None and not self.levy_step_cap > 0:
            raise ConfigError(f"levy_step_cap: must be > 0 (got {self.levy_step_cap})")
        if not BETA_MIN <= self.beta <= BETA_MAX:
            raise ConfigError(f"beta: must lie in [{BETA_MIN}, {BETA_MAX}] (got {self.beta})")
        if self.v_max * self.dt >= min(self.arena_width, self.arena_height):
            raise ConfigError("v_max: v_max*dt must be smaller than the arena's shorter side")
        for name in ("arena_width", "arena_height"):
            try:
                _cell_count(getattr(self, name), self.cell_size)
            except ConfigError:
                raise ConfigError(f"cell_size: must divide {name} exactly") from None
        if self.robot_size >= min(self.arena_width, self.arena_height):
            raise ConfigError("robot_size: must be smaller than the arena")
        if self.n_robots < 1:
            raise ConfigError(f"n_robots: must be >= 1 (got {self.n_robots})")
        if self.n_steps < 0:
            raise ConfigError(f"n_steps: must be >= 0 (got {self.n_steps})")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm: must be one of {', '.join(ALGORITHMS)} (got {self.algorithm!r})")
        if self.start_mode not in START_MODES:
            raise ConfigError(f"start_mode: must be one of {', '.join(START_MODES)} (got {self.start_mode!r})")
        if self.repulsion_aggregate not in REPULSION_AGGREGATES:
            raise ConfigError(f"repulsion_aggregate: must be one of {', '.join(REPULSION_AGGREGATES)}")
        if self.energy_idle_power < 0 or self.energy_move_coeff < 0:
            raise ConfigError("energy_idle_power/energy_move_coeff: must be >= 0")
        if self.start_mode == "fixed":
            if len(self.start_points) not in (1, self.n_robots):
                raise ConfigError("start_points: need one shared point or one point per robot")
            for p in self.start_points:
                if not (0 <= p[0] <= self.arena_width and 0 <= p[1] <= self.arena_height):
                    raise ConfigError(f"start_points: {p} lies outside the arena")

    @property
    def step_cap(self) -> float:
        if self.levy_step_cap is not None:
            return self.levy_step_cap
        return math.hypot(self.arena_width, self.arena_height)

    def replace(self, **changes) -> "SimParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["start_points"] = [list(p) for p in self.start_points]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _cell_count(length: float, cell_size: float) -> int:
    n = round(length / cell_size)
    if n < 1 or abs(n * cell_size - length) > 1e-9 * max(1.0, length):
        raise ConfigError(f"cell size {cell_size} does not divide {length}")
    return n


@dataclass
class ExplorationGrid:
    """Binary explored/unexplored raster; ``explored[row, col]`` with row 0 at y = 0."""

    cols: int
    rows: int
    cell_size: float
    explored: np.ndarray = field(repr=False)

    @property
    def n_explored(self) -> int:
        return int(np.count_nonzero(self.explored))

    def copy(self) -> "ExplorationGrid":
        return ExplorationGrid(self.cols, self.rows, self.cell_size, self.explored.copy())

    def footprint_slices(self, center: Point, robot_size: float) -> tuple[slice, slice]:
        """Row/column slices of the cells whose centers lie in the footprint square."""
        h = robot_size / 2.0 + GEOM_EPS
        c = self.cell_size
        c0 = max(0, math.ceil((center[0] - h) / c - 0.5))
        c1 = min(self.cols - 1, math.floor((center[0] + h) / c - 0.5))
        r0 = max(0, math.ceil((center[1] - h) / c - 0.5))
        r1 = min(self.rows - 1, math.floor((center[1] + h) / c - 0.5))
        return slice(r0, max(r0, r1 + 1)), slice(c0, max(c0, c1 + 1))

    def unexplored_under(self, center: Point, robot_size: float) -> int:
        rs, cs = self.footprint_slices(center, robot_size)
        block = self.explored[rs, cs]
        return int(block.size - np.count_nonzero(block))


def make_grid(width: float, height: float, cell_size: float) -> ExplorationGrid:
    cols = _cell_count(width, cell_size)
    rows = _cell_count(height, cell_size)
    return ExplorationGrid(cols, rows, cell_size, np.zeros((rows, cols), dtype=bool))


def stamp_footprint(grid: ExplorationGrid, center: Point, robot_size: float) -> int:
    """Mark the cells under a square footprint explored; return how many were new."""
    rs, cs = grid.footprint_slices(center, robot_size)
    block = grid.explored[rs, cs]
    new = int(block.size - np.count_nonzero(block))
    block[...] = True
    return new


def coverage_fraction(grid: ExplorationGrid) -> float:
    return grid.n_explored / (grid.cols * grid.rows)


@dataclass
class Arena:
    width: float
    height: float
    obstacles: list[Rect]
    victims: list[Point]
    grid: ExplorationGrid

    @classmethod
    def build(cls, params: SimParams, obstacles: Sequence = (), victims: Sequence = ()) -> "Arena":
        obs = [o if isinstance(o, Rect) else Rect(*map(float, o)) for o in obstacles]
        vics = [(float(v[0]), float(v[1])) for v in victims]
        arena = cls(params.arena_width, params.arena_height, obs, vics,
                    make_grid(params.arena_width, params.arena_height, params.cell_size))
        arena.validate()
        return arena

    def validate(self) -> None:
        bounds = Rect(0.0, 0.0, self.width, self.height)
        for o in self.obstacles:
            if not (o.x0 >= 0 and o.y0 >= 0 and o.x1 <= self.width and o.y1 <= self.height):
                raise ConfigError(f"obstacles: {o.as_list()} extends outside the arena")
        for v in self.victims:
            if not bounds.contains(v):
                raise ConfigError(f"victims: {v} lies outside the arena")

    def fresh(self) -> "Arena":
        """Copy with an unexplored grid of the same shape."""
        g = self.grid
        return Arena(self.width, self.height, list(self.obstacles), list(self.victims),
                     ExplorationGrid(g.cols, g.rows, g.cell_size, np.zeros_like(g.explored)))

    def footprint_free(self, center: Point, robot_size: float) -> bool:
        """Footprint inside the arena and clear of every obstacle interior."""
        fp = footprint(center, robot_size)
        if fp.x0 < -GEOM_EPS or fp.y0 < -GEOM_EPS or fp.x1 > self.width + GEOM_EPS \
                or fp.y1 > self.height + GEOM_EPS:
            return False
        return not any(fp.overlaps_interior(o) for o in self.obstacles)

    def obstacle_area(self) -> float:
        return sum(o.area for o in self.obstacles)

    def clip_move(self, pos: Point, disp: Point, robot_size: float) -> tuple[Point, bool, bool]:
        """Move a footprint by ``disp`` without entering walls or obstacle interiors.

        Motion is resolved along x first, then y, so a robot blocked on one
        axis still slides along the other. Returns ``(new_pos, blocked_x, blocked_y)``.
        """
        h = robot_size / 2.0
        x, y = pos
        nx, bx = self._clip_axis(x, y, disp[0], h, axis=0)
        ny, by = self._clip_axis(y, nx, disp[1], h, axis=1)
        return (nx, ny), bx, by

    def _clip_axis(self, start: float, other: float, delta: float, h: float, axis: int):
        if delta == 0.0:
            return start, False
        limit = (self.width if axis == 0 else self.height) - h
        # Bounds never push the robot backwards past its own start.
        if delta > 0:
            bound = max(limit, start)
            for o in self.obstacles:
                a0, b0, b1 = ((o.x0, o.y0, o.y1) if axis == 0 else (o.y0, o.x0, o.x1))
                if b0 - h + GEOM_EPS < other < b1 + h - GEOM_EPS and start <= a0 - h + GEOM_EPS:
                    bound = min(bound, max(a0 - h, start))
            target = start + delta
            return (bound, True) if target > bound else (target, False)
        bound = min(h, start)
        for o in self.obstacles:
            a1, b0, b1 = ((o.x1, o.y0, o.y1) if axis == 0 else (o.y1, o.x0, o.x1))
            if b0 - h + GEOM_EPS < other < b1 + h - GEOM_EPS and start >= a1 + h - GEOM_EPS:
                bound = max(bound, min(a1 + h, start))
        target = start + delta
        return (bound, True) if target < bound else (target, False)


@dataclass
class LevyProgress:
    step_size: float
    direction: float
    traveled: float = 0.0


@dataclass
class RobotState:
    id: int
    pos: Point
    vel: Point = (0.0, 0.0)
    heading: float = 0.0
    lf: Optional[LevyProgress] = None
    local_best: Optional[Point] = None
    avoidance_active: bool = False
    energy_joules: float = 0.0
    path: list[Point] = field(default_factory=list)

    def __post_init__(self):
        if not self.path:
            self.path.append(self.pos)

    def copy(self) -> "RobotState":
        return dataclasses.replace(
            self, lf=dataclasses.replace(self.lf) if self.lf else None, path=list(self.path))


class RngStream:
    """Seeded random stream backed by numpy's PCG64 bit generator.

    PCG64 output for a given ``SeedSequence`` is fixed by numpy's stability
    policy and independent of platform, so a seed reproduces the same draws
    everywhere.
    """

    def __init__(self, seed: int | np.random.SeedSequence):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
            self.seed = int(seed.entropy) if isinstance(seed.entropy, int) else None
        else:
            self._seq = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
            self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self._seq))

    def spawn(self, n: int) -> list["RngStream"]:
        return [RngStream(s) for s in self._seq.spawn(n)]

    def random(self) -> float:
        return float(self._gen.random())

    def randoms(self, n: int) -> list[float]:
        return self._gen.random(n).tolist()

    def uniform(self, lo: float, hi: float) -> float:
        return float(self._gen.uniform(lo, hi))

    def normal(self, scale: float = 1.0) -> float:
        return float(self._gen.normal(0.0, scale))

    def coin(self) -> bool:
        return self._gen.random() < 0.5

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def trial_streams(seed: int, n_robots: int) -> tuple[RngStream, list[RngStream]]:
    """Split a trial seed into (environment stream, per-robot streams)."""
    root = RngStream(seed)
    children = root.spawn(n_robots + 1)
    return children[0], children[1:]
