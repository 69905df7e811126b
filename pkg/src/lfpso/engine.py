"""Per-step controllers and the trial loop.

Every step reads a start-of-step snapshot of robot positions, so the outcome
does not depend on the order robots are processed in. Each robot owns its
random stream; placement draws come from a separate environment stream.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .avoidance import avoidance_step, sense
from .core import (
    GEOM_EPS,
    Arena,
    ConfigError,
    LevyProgress,
    Point,
    RngStream,
    RobotState,
    SimParams,
    coverage_fraction,
    stamp_footprint,
    TWO_PI,
    trial_streams,
    wrap_angle,
)
from .levy import LevyParams, draw_step, mantegna_sigma
from .pso import BaselineFitnessMemo, PsoCoefficients, clamp_speed, fleet_best, position_update, velocity_update
from .repulsion import build_clusters, neighbors_within, repulsion

MAX_PLACEMENT_ATTEMPTS = 100_000
# A Lévy step within this distance of completion counts as complete (meters).
STEP_DONE_TOL = 1e-9


@dataclass(frozen=True)
class Collision:
    t: int
    robot: int
    kind: str  # "robot" or "obstacle"
    other: int


@dataclass(frozen=True)
class VictimFound:
    t: int
    robot: int
    victim: int


@dataclass(frozen=True)
class RobotTrace:
    """What the controller did to one robot in one step (diagnostics only)."""

    robot: int
    mode: str  # "avoid", "hybrid", "lf" or "pso"
    cluster_size: int
    cognitive: Point = (0.0, 0.0)
    social: Point = (0.0, 0.0)
    p_lb: Optional[Point] = None
    p_gb: Optional[Point] = None
    redrew: bool = False


@dataclass
class TrialResult:
    seed: int
    params_hash: str
    algorithm: str
    coverage_series: list[float]
    paths: list[list[Point]]
    collisions: list[Collision]
    victims_found: list[VictimFound]
    energy_joules: list[float]
    diagnostics: dict = field(default_factory=dict)
    traces: Optional[list[list[RobotTrace]]] = field(default=None, repr=False)
    grid: Optional[object] = field(default=None, repr=False)

    @property
    def final_coverage(self) -> float:
        return self.coverage_series[-1]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "params_hash": self.params_hash,
            "algorithm": self.algorithm,
            "final_coverage": self.final_coverage,
            "coverage_series": self.coverage_series,
            "paths": [[list(p) for p in path] for path in self.paths],
            "collisions": [[c.t, c.robot, c.kind, c.other] for c in self.collisions],
            "victims_found": [[v.t, v.robot, v.victim] for v in self.victims_found],
            "energy_joules": self.energy_joules,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------- controllers


def update_local_best(robot: RobotState, rng: RngStream, params: SimParams,
                      levy: LevyParams | None = None, sigma_u: float | None = None) -> bool:
    """Redraw the Lévy step once the current one is complete; return whether it redrew."""
    if robot.lf is not None and robot.lf.traveled < robot.lf.step_size - STEP_DONE_TOL:
        return False
    levy = levy or LevyParams.from_sim(params)
    s, theta = draw_step(rng, levy, sigma_u)
    robot.lf = LevyProgress(step_size=s, direction=theta, traveled=0.0)
    x, y = robot.pos
    robot.local_best = (x + s * math.cos(theta), y + s * math.sin(theta))
    return True


@dataclass
class _Context:
    params: SimParams
    levy: LevyParams
    sigma_u: float
    coeffs: PsoCoefficients
    memos: list[BaselineFitnessMemo] = field(default_factory=list)
    coincident: int = 0


def _apply_velocity(robot: RobotState, arena: Arena, params: SimParams, vel: Point) -> Point:
    """Integrate a clamped velocity, resolving walls/obstacles; returns displacement."""
    old = robot.pos
    target = position_update(old, vel, params.dt)
    disp = (target[0] - old[0], target[1] - old[1])
    robot.pos, bx, by = arena.clip_move(old, disp, params.robot_size)
    # Velocity component into a blocking surface is dropped.
    robot.vel = (0.0 if bx else vel[0], 0.0 if by else vel[1])
    if vel[0] != 0.0 or vel[1] != 0.0:
        robot.heading = wrap_angle(math.atan2(vel[1], vel[0]))
    return (robot.pos[0] - old[0], robot.pos[1] - old[1])


def _hybrid_move(robot, arena, ctx: _Context, rng, snapshot, cluster_size):
    params = ctx.params
    redrew = update_local_best(robot, rng, params, ctx.levy, ctx.sigma_u)
    neigh = neighbors_within(robot.id, snapshot, params.comm_range)
    rep = repulsion(robot.pos, neigh, params.repulsion_aggregate, eps=params.robot_size / 10.0)
    ctx.coincident += rep.coincident
    r = rng.randoms(4)
    x = robot.pos
    p_lb, p_gb = robot.local_best, rep.p_gb
    cog = (ctx.coeffs.p_omega * r[0] * (p_lb[0] - x[0]), ctx.coeffs.p_omega * r[1] * (p_lb[1] - x[1]))
    soc = (ctx.coeffs.n_omega * r[2] * (p_gb[0] - x[0]), ctx.coeffs.n_omega * r[3] * (p_gb[1] - x[1]))
    vel = velocity_update(robot.vel, x, p_lb, p_gb, ctx.coeffs, (r[0], r[1]), (r[2], r[3]))
    vel = clamp_speed(vel, params.v_max)
    disp = _apply_velocity(robot, arena, params, vel)
    robot.lf.traveled += math.hypot(*disp)
    return disp, RobotTrace(robot.id, "hybrid", cluster_size, cog, soc, p_lb, p_gb, redrew)


def _lf_move(robot, arena, ctx: _Context, rng, snapshot, cluster_size):
    params = ctx.params
    redrew = update_local_best(robot, rng, params, ctx.levy, ctx.sigma_u)
    lf = robot.lf
    robot.heading = lf.direction
    dist = min(params.v_max * params.dt, lf.step_size - lf.traveled)
    old = robot.pos
    robot.pos, _, _ = arena.clip_move(
        old, (dist * math.cos(lf.direction), dist * math.sin(lf.direction)), params.robot_size)
    disp = (robot.pos[0] - old[0], robot.pos[1] - old[1])
    robot.vel = (disp[0] / params.dt, disp[1] / params.dt)
    lf.traveled += math.hypot(*disp)
    return disp, RobotTrace(robot.id, "lf", cluster_size, p_lb=robot.local_best, redrew=redrew)


def _pso_move(robot, arena, ctx: _Context, rng, snapshot, cluster_size):
    params = ctx.params
    memo = ctx.memos[robot.id]
    p_lb, p_gb = memo.best_pos, fleet_best(ctx.memos)
    r = rng.randoms(4)
    vel = velocity_update(robot.vel, robot.pos, p_lb, p_gb, ctx.coeffs, (r[0], r[1]), (r[2], r[3]))
    vel = clamp_speed(vel, params.v_max)
    disp = _apply_velocity(robot, arena, params, vel)
    return disp, RobotTrace(robot.id, "pso", cluster_size, p_lb=p_lb, p_gb=p_gb)


_CONTROLLERS = {"hybrid": _hybrid_move, "lf": _lf_move, "pso": _pso_move}


# ----------------------------------------------------------------- accounting


@dataclass
class Books:
    """Cross-step bookkeeping for collisions and victim detections."""

    robot_contacts: set = field(default_factory=set)
    obstacle_contacts: set = field(default_factory=set)
    found: set = field(default_factory=set)
    collisions: list[Collision] = field(default_factory=list)
    victims_found: list[VictimFound] = field(default_factory=list)


def _robot_overlaps(robots: Sequence[RobotState], size: float) -> set:
    out = set()
    pos = sorted((r.id, r.pos) for r in robots)
    for a in range(len(pos)):
        ia, (xa, ya) = pos[a]
        for b in range(a + 1, len(pos)):
            ib, (xb, yb) = pos[b]
            if abs(xa - xb) < size - GEOM_EPS and abs(ya - yb) < size - GEOM_EPS:
                out.add((ia, ib))
    return out


def _obstacle_contacts(robots: Sequence[RobotState], arena: Arena, size: float) -> set:
    out = set()
    h = size / 2.0
    for r in robots:
        for k, o in enumerate(arena.obstacles):
            if o.expanded(h).contains(r.pos, tol=GEOM_EPS):
                out.add((r.id, k))
    return out


def account(t: int, robots: Sequence[RobotState], arena: Arena, params: SimParams, books: Books,
            baseline: bool = False) -> None:
    """Record entry-triggered collisions and first victim detections at step ``t``.

    With ``baseline`` the current contacts become the reference state without
    emitting events (robots placed touching have not collided).
    """
    pairs = _robot_overlaps(robots, params.robot_size)
    touching = _obstacle_contacts(robots, arena, params.robot_size)
    if not baseline:
        for i, j in sorted(pairs - books.robot_contacts):
            books.collisions.append(Collision(t, i, "robot", j))
        for i, k in sorted(touching - books.obstacle_contacts):
            books.collisions.append(Collision(t, i, "obstacle", k))
    books.robot_contacts, books.obstacle_contacts = pairs, touching

    by_id = sorted(robots, key=lambda r: r.id)
    for v, (vx, vy) in enumerate(arena.victims):
        if v in books.found:
            continue
        for r in by_id:
            if math.hypot(r.pos[0] - vx, r.pos[1] - vy) <= params.victim_detect_range:
                books.found.add(v)
                books.victims_found.append(VictimFound(t, r.id, v))
                break


def accrue_energy(robot: RobotState, disp: Point, params: SimParams) -> None:
    """Idle power over the step plus a per-meter motion cost."""
    speed = math.hypot(disp[0], disp[1]) / params.dt
    robot.energy_joules += (params.energy_idle_power + params.energy_move_coeff * speed) * params.dt


# ----------------------------------------------------------------------- step


def step(robots: Sequence[RobotState], arena: Arena, params: SimParams, rngs: Sequence[RngStream],
         ctx: _Context | None = None) -> tuple[list[RobotTrace], dict[int, int]]:
    """Advance every robot by one timestep with ``params.algorithm``.

    Robot ids must be ``0..n-1`` in any order; ``rngs`` is indexed by id. Mutates the robots, stamps the arena grid,
    appends waypoints and accrues energy. Returns per-robot traces and each
    robot's exploration gain measured against the start-of-step grid.
    """
    if ctx is None:
        ctx = make_context(params, robots)
    controller = _CONTROLLERS[params.algorithm]
    snapshot: list[Point] = [None] * len(robots)  # type: ignore[list-item]
    for r in robots:
        snapshot[r.id] = r.pos
    cluster_size = {}
    for c in build_clusters(snapshot, params.comm_range):
        for m in c.members:
            cluster_size[m] = len(c)

    refresh = params.algorithm == "hybrid" and params.refresh_local_best_on_avoidance
    traces = []
    moves = {}
    for r in robots:
        reading = sense(arena, r, params.sensor_range)
        if r.avoidance_active or reading.any():
            disp = avoidance_step(r, arena, params, rngs[r.id], reading)
            if refresh and r.lf is not None:
                # An obstructed target is abandoned: fresh local best on resume.
                r.lf.traveled = r.lf.step_size
            trace = RobotTrace(r.id, "avoid", cluster_size[r.id])
        else:
            disp, trace = controller(r, arena, ctx, rngs[r.id], snapshot, cluster_size[r.id])
        moves[r.id] = disp
        traces.append(trace)

    grid = arena.grid
    gains = {r.id: grid.unexplored_under(r.pos, params.robot_size) for r in robots}
    for r in robots:
        stamp_footprint(grid, r.pos, params.robot_size)
        r.path.append(r.pos)
        accrue_energy(r, moves[r.id], params)
    if params.algorithm == "pso":
        for r in robots:
            ctx.memos[r.id].observe(gains[r.id], r.pos)
    traces.sort(key=lambda tr: tr.robot)
    return traces, gains


def hybrid_step(robots: Sequence[RobotState], arena: Arena, params: SimParams,
                rngs: Sequence[RngStream], ctx: _Context | None = None):
    """One iteration of the hybrid Lévy/PSO controller (see :func:`step`)."""
    if params.algorithm != "hybrid":
        params = params.replace(algorithm="hybrid")
    return step(robots, arena, params, rngs, ctx)


def make_context(params: SimParams, robots: Sequence[RobotState]) -> _Context:
    ctx = _Context(params, LevyParams.from_sim(params), mantegna_sigma(params.beta),
                   PsoCoefficients.from_sim(params))
    if params.algorithm == "pso":
        ctx.memos = [BaselineFitnessMemo() for _ in range(len(robots))]
        for r in robots:
            ctx.memos[r.id].observe(0, r.pos)
    return ctx


# ---------------------------------------------------------------------- trial


def place_robots(params: SimParams, arena: Arena, env: RngStream) -> list[RobotState]:
    """Initial robots: rejection-sampled random starts or jittered fixed points."""
    size, h = params.robot_size, params.robot_size / 2.0
    starts: list[Point] = []
    if params.start_mode == "random":
        attempts = 0
        while len(starts) < params.n_robots:
            attempts += 1
            if attempts > MAX_PLACEMENT_ATTEMPTS:
                raise ConfigError("n_robots: could not place robots without overlap")
            p = (env.uniform(h, arena.width - h), env.uniform(h, arena.height - h))
            if not arena.footprint_free(p, size):
                continue
            if all(math.hypot(p[0] - q[0], p[1] - q[1]) >= size for q in starts):
                starts.append(p)
    else:
        pts = list(params.start_points)
        if len(pts) == 1:
            pts = pts * params.n_robots
        shared = {p for p in pts if pts.count(p) > 1}
        for p in pts:
            if not arena.footprint_free(_inside(p, arena, h), size):
                raise ConfigError(f"start_points: {p} overlaps an obstacle or wall")
            if p in shared:
                # Small seeded jitter so co-located robots are not coincident.
                for _ in range(1000):
                    q = _inside((p[0] + env.uniform(-h, h), p[1] + env.uniform(-h, h)), arena, h)
                    if arena.footprint_free(q, size):
                        break
                p = q
            starts.append(_inside(p, arena, h))
    headings = [wrap_angle(env.uniform(0.0, TWO_PI)) for _ in starts]
    return [RobotState(id=i, pos=p, heading=th) for i, (p, th) in enumerate(zip(starts, headings))]


def _inside(p: Point, arena: Arena, h: float) -> Point:
    return (min(max(p[0], h), arena.width - h), min(max(p[1], h), arena.height - h))


def run_trial(params: SimParams, arena_template: Arena, seed: int, trace: bool = False,
              robots: Sequence[RobotState] | None = None) -> TrialResult:
    """Run ``params.n_steps`` steps from a fresh copy of ``arena_template``.

    ``robots`` overrides placement (their ids must be 0..n-1).
    """
    arena = arena_template.fresh()
    env, rngs = trial_streams(seed, params.n_robots)
    if robots is None:
        robots = place_robots(params, arena, env)
    else:
        robots = [r.copy() for r in robots]
        if len(robots) != params.n_robots:
            raise ConfigError("robots: count does not match n_robots")
        for r in robots:
            if not arena.footprint_free(r.pos, params.robot_size):
                raise ConfigError(f"robots: start {r.pos} overlaps an obstacle or wall")
    initial_gain = {r.id: arena.grid.unexplored_under(r.pos, params.robot_size) for r in robots}
    for r in robots:
        stamp_footprint(arena.grid, r.pos, params.robot_size)
    books = Books()
    account(0, robots, arena, params, books, baseline=True)
    ctx = make_context(params, robots)
    if ctx.memos:
        # The placement stamp is each PSO robot's first fitness observation.
        for r in robots:
            ctx.memos[r.id].best_gain, ctx.memos[r.id].best_pos = initial_gain[r.id], r.pos
    coverage = [coverage_fraction(arena.grid)]
    traces = [] if trace else None
    for t in range(1, params.n_steps + 1):
        tr, _ = step(robots, arena, params, rngs, ctx)
        account(t, robots, arena, params, books)
        coverage.append(coverage_fraction(arena.grid))
        if trace:
            traces.append(tr)
    robots = sorted(robots, key=lambda r: r.id)
    return TrialResult(
        seed=seed,
        params_hash=params.digest(),
        algorithm=params.algorithm,
        coverage_series=coverage,
        paths=[r.path for r in robots],
        collisions=books.collisions,
        victims_found=books.victims_found,
        energy_joules=[r.energy_joules for r in robots],
        diagnostics={"coincident_neighbors": ctx.coincident},
        traces=traces,
        grid=arena.grid,
    )
