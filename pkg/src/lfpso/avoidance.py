"""Three-ray reactive obstacle avoidance.

Sensors are single rays from the robot center: front along the heading,
left at heading + pi/2, right at heading - pi/2. Walls count as obstacles;
other robots are not sensed.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

from .core import GEOM_EPS, Arena, RngStream, RobotState, SimParams, ray_rect_distance, ray_wall_distance, wrap_angle


class SensorReading(NamedTuple):
    left: bool
    front: bool
    right: bool

    def any(self) -> bool:
        return self.left or self.front or self.right


class TurnAction(enum.Enum):
    NONE = "none"
    TURN_LEFT_90 = "turn_left_90"
    TURN_RIGHT_90 = "turn_right_90"
    TURN_180 = "turn_180"
    TURN_LEFT_OR_RIGHT_90 = "turn_left_or_right_90"


# (left, front, right) -> action. (T, F, T) has no turn rule of its own;
# the gap ahead is clear, so the robot keeps going.
POLICY: dict[tuple[bool, bool, bool], TurnAction] = {
    (False, True, False): TurnAction.TURN_LEFT_OR_RIGHT_90,
    (False, True, True): TurnAction.TURN_LEFT_90,
    (True, True, False): TurnAction.TURN_RIGHT_90,
    (True, True, True): TurnAction.TURN_180,
    (True, False, False): TurnAction.TURN_RIGHT_90,
    (False, False, True): TurnAction.TURN_LEFT_90,
    (False, False, False): TurnAction.NONE,
    (True, False, True): TurnAction.NONE,
}

_HEADING_CHANGE = {
    TurnAction.NONE: 0.0,
    TurnAction.TURN_LEFT_90: math.pi / 2,
    TurnAction.TURN_RIGHT_90: -math.pi / 2,
    TurnAction.TURN_180: math.pi,
}


def ray_hits(arena: Arena, origin, angle: float, sensor_range: float) -> bool:
    limit = sensor_range + GEOM_EPS
    if ray_wall_distance(origin, angle, arena.width, arena.height) <= limit:
        return True
    return any(ray_rect_distance(origin, angle, o) <= limit for o in arena.obstacles)


def sense(arena: Arena, robot: RobotState, sensor_range: float) -> SensorReading:
    h = robot.heading
    return SensorReading(
        left=ray_hits(arena, robot.pos, h + math.pi / 2, sensor_range),
        front=ray_hits(arena, robot.pos, h, sensor_range),
        right=ray_hits(arena, robot.pos, h - math.pi / 2, sensor_range),
    )


def avoidance_action(reading: SensorReading, tiebreak: RngStream | None = None) -> TurnAction:
    """Table lookup; the ambiguous front-only row is settled by a fair coin.

    Without a ``tiebreak`` stream the ambiguous row is returned unresolved.
    """
    action = POLICY[tuple(reading)]
    if action is TurnAction.TURN_LEFT_OR_RIGHT_90 and tiebreak is not None:
        return TurnAction.TURN_LEFT_90 if tiebreak.coin() else TurnAction.TURN_RIGHT_90
    return action


def avoidance_step(robot: RobotState, arena: Arena, params: SimParams, rng: RngStream,
                   reading: SensorReading | None = None) -> tuple[float, float]:
    """Turn per the policy, then advance ``v_max * dt`` along the new heading.

    Mutates ``robot`` (heading, pos, vel, avoidance flag). The mode stays
    active while any sensor fired this step and clears on the first clear
    reading. Returns the realized displacement.
    """
    if reading is None:
        reading = sense(arena, robot, params.sensor_range)
    action = avoidance_action(reading, rng)
    robot.heading = wrap_angle(robot.heading + _HEADING_CHANGE[action])
    step = params.v_max * params.dt
    disp = (step * math.cos(robot.heading), step * math.sin(robot.heading))
    old = robot.pos
    robot.pos, _, _ = arena.clip_move(old, disp, params.robot_size)
    moved = (robot.pos[0] - old[0], robot.pos[1] - old[1])
    robot.vel = (moved[0] / params.dt, moved[1] / params.dt)
    robot.avoidance_active = reading.any()
    return moved
