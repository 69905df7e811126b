"""PSO velocity/position updates and the exploration-gain baseline bests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Point, RobotState, SimParams


@dataclass(frozen=True)
class PsoCoefficients:
    omega: float = 0.6
    p_omega: float = 2.0
    n_omega: float = 2.0

    def __post_init__(self):
        if min(self.omega, self.p_omega, self.n_omega) < 0:
            raise ValueError("PSO coefficients must be non-negative")

    @classmethod
    def from_sim(cls, params: SimParams) -> "PsoCoefficients":
        return cls(params.omega, params.p_omega, params.n_omega)


def velocity_update(v: Point, x: Point, p_lb: Point, p_gb: Point, coeffs: PsoCoefficients,
                    rand_cog: Point, rand_soc: Point) -> Point:
    """Inertia plus cognitive pull to ``p_lb`` plus social pull to ``p_gb``, per component.

    No speed clamping is applied here.
    """
    w, cp, cs = coeffs.omega, coeffs.p_omega, coeffs.n_omega
    return (
        w * v[0] + cp * rand_cog[0] * (p_lb[0] - x[0]) + cs * rand_soc[0] * (p_gb[0] - x[0]),
        w * v[1] + cp * rand_cog[1] * (p_lb[1] - x[1]) + cs * rand_soc[1] * (p_gb[1] - x[1]),
    )


def position_update(x: Point, v: Point, dt: float) -> Point:
    return (x[0] + v[0] * dt, x[1] + v[1] * dt)


def clamp_speed(v: Point, v_max: float) -> Point:
    speed = math.hypot(v[0], v[1])
    if speed <= v_max:
        return v
    k = v_max / speed
    return (v[0] * k, v[1] * k)


@dataclass
class BaselineFitnessMemo:
    """Best per-step exploration gain seen by one robot and where it happened."""

    best_gain: int = 0
    best_pos: Point | None = None

    def observe(self, gain: int, pos: Point) -> None:
        # Strictly greater: ties keep the earlier observation.
        if self.best_pos is None or gain > self.best_gain:
            self.best_gain = gain
            self.best_pos = pos


def fleet_best(memos: Sequence[BaselineFitnessMemo]) -> Point:
    """``best_pos`` of the memo with maximal gain; ties go to the lowest index."""
    best = None
    for m in memos:
        if m.best_pos is None:
            continue
        if best is None or m.best_gain > best.best_gain:
            best = m
    if best is None:
        raise ValueError("no memo has an observation yet")
    return best.best_pos


def baseline_pso_bests(robot: RobotState, memo: BaselineFitnessMemo, step_gain: int,
                       all_memos: Sequence[BaselineFitnessMemo]) -> tuple[Point, Point]:
    """Record ``step_gain`` at the robot's position and return ``(p_lb, p_gb)``.

    ``all_memos`` is indexed by robot id and must contain ``memo``.
    """
    memo.observe(step_gain, robot.pos)
    return memo.best_pos, fleet_best(all_memos)
