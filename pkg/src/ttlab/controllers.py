"""Formation controllers: goal projection and the bounded unicycle law.

The nominal law steers each agent toward a goal point assembled from
neighbor distance errors, saturating speed and turn rate at the actuation
limits. Team variants evaluate the same law on promised estimates of the
neighbors instead of their true states.
"""

from __future__ import annotations

import logging
import math
from typing import Mapping, Tuple

from .model import ControlInput, FormationSpec, Limits, UnicycleState, wrap_angle
from .promises import Promise, PromiseMode, expected_position

log = logging.getLogger("ttlab.controllers")

Point = Tuple[float, float]


def goal_point(
    i: int, own_position: Point, neighbor_points: Mapping[int, Point], spec: FormationSpec
) -> Point:
    """Goal position for agent i given point estimates of its neighbors.

    Each neighbor contributes its distance error along the line of sight:

        p* = x_i + sum_j (||y_j - x_i|| - d_ij) * (y_j - x_i) / ||y_j - x_i||

    A neighbor exactly coincident with the agent has no defined direction;
    it contributes nothing and a warning is logged.
    """
    px, py = own_position
    gx, gy = px, py
    for j, (yx, yy) in neighbor_points.items():
        dx = yx - px
        dy = yy - py
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            log.warning("agent %d coincides with neighbor %d; skipping its goal term", i, j)
            continue
        err = dist - spec.distance(i, j)
        gx += err * dx / dist
        gy += err * dy / dist
    return (gx, gy)


def u_star(
    state: UnicycleState, goal: Point, gain: float, limits: Limits
) -> ControlInput:
    """Saturated unicycle law driving the agent toward a goal point.

    Speed is the gain times the component of the goal offset along the
    heading, clamped to [0, max_speed]; the turn rate is the gain times the
    wrapped bearing error, clamped to +/- max_turn. A goal exactly at the
    agent's position yields the zero control. A goal directly behind maps to
    a bearing error of +pi, so the turn saturates positive.
    """
    dx = goal[0] - state.x
    dy = goal[1] - state.y
    if dx == 0.0 and dy == 0.0:
        return ControlInput(0.0, 0.0, limits)
    along = math.cos(state.heading) * dx + math.sin(state.heading) * dy
    speed = min(max(gain * along, 0.0), limits.max_speed)
    bearing = wrap_angle(math.atan2(dy, dx) - state.heading)
    turn = min(max(gain * bearing, -limits.max_turn), limits.max_turn)
    return ControlInput(speed, turn, limits)


def e_map(view: Mapping[int, Promise], t: float) -> dict[int, Point]:
    """Point estimates of the neighbors from their promises at time t.

    Ball promises map to their hold prediction, fallback promises to the
    frozen disk center. Expired-mode promises are a contract error here;
    the caller must have replaced or extended them.
    """
    points: dict[int, Point] = {}
    for j, p in view.items():
        if p.mode is PromiseMode.EXPIRED:
            raise ValueError(f"promise from {j} is expired; no estimate available")
        points[j] = expected_position(p, t)
    return points


def u_double_star(
    i: int,
    state: UnicycleState,
    view: Mapping[int, Promise],
    t: float,
    spec: FormationSpec,
    limits: Limits,
) -> ControlInput:
    """Nominal team control: the goal law on promised neighbor estimates."""
    goal = goal_point(i, (state.x, state.y), e_map(view, t), spec)
    return u_star(state, goal, spec.gain, limits)


def team_control(
    i: int,
    state: UnicycleState,
    view: Mapping[int, Promise],
    t: float,
    t_star: float,
    spec: FormationSpec,
    limits: Limits,
    safe_turn: bool = False,
) -> ControlInput:
    """Team law with the safe fallback past the certified horizon t_star.

    Up to and including t_star the nominal control applies. Afterwards the
    agent holds position; with safe_turn it keeps turning at the nominal
    rate (position still frozen), which lets an agent whose goal lies behind
    it recover heading while waiting for fresh information.
    """
    if t <= t_star:
        return u_double_star(i, state, view, t, spec, limits)
    if safe_turn:
        nominal = u_double_star(i, state, view, t, spec, limits)
        return ControlInput(0.0, nominal.turn_rate, limits)
    return ControlInput(0.0, 0.0, limits)
