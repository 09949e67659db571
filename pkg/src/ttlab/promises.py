"""Promises: control-ball commitments agents make about their own motion.

A promise anchors the issuer's pose and applied control at issue time and
bounds how far its future controls may stray (a ball of `radius` in control
space). Recipients turn a promise into a growing position disk; issuers
monitor their own promises and must warn recipients before leaving the disk.

The disk realization keeps the zero-order-hold prediction as the center and
caps the radius with the anchor reachability bound:

    radius(tau) = min(delta * tau, dist(zoh(tau), anchor) + max_speed * tau)

which contains every admissible deviation the commitment allows, is monotone
in delta (tighter promises give nested disks) and nondecreasing in tau, and
never exceeds the anchor reachability disk by more than twice the chord
length dist(zoh, anchor).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

from .model import ControlInput, DiskSet, UnicycleState, arc_step

BREACH_TOL = 1e-9


class PromiseMode(enum.Enum):
    BALL_RADIUS = "ball"
    REACHABILITY_FALLBACK = "fallback"
    EXPIRED = "expired"


@dataclass(frozen=True)
class StaticBall:
    """Fixed control-ball rule: radius = 2 * max_speed * tightness."""

    tightness: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.tightness and math.isfinite(self.tightness)):
            raise ValueError(f"tightness must be >= 0, got {self.tightness}")


@dataclass(frozen=True)
class DynamicBall:
    """State-dependent rule: radius = scale * ||control - safe|| + floor."""

    scale: float
    floor: float

    def __post_init__(self) -> None:
        if self.scale < 0.0 or self.floor < 0.0:
            raise ValueError("scale and floor must be nonnegative")


PromiseRuleConfig = Union[StaticBall, DynamicBall]


@dataclass(frozen=True)
class Promise:
    issuer: int
    recipient: int
    issued_at: float
    anchor_state: UnicycleState
    anchor_control: ControlInput
    radius: float
    mode: PromiseMode = PromiseMode.BALL_RADIUS
    expires_at: Optional[float] = None
    # Validation slack for promises received over a noisy channel; zero on
    # the issuer side. See validate_noisy_promise.
    noise_slack: float = 0.0
    # Planning-control gap piggybacked for adaptive dwell selection.
    gap: Optional[float] = None
    # Frozen disk for REACHABILITY_FALLBACK mode.
    fb_center: Optional[Tuple[float, float]] = None
    fb_radius: Optional[float] = None
    fb_time: Optional[float] = None

    def __post_init__(self) -> None:
        if self.radius < 0.0:
            raise ValueError(f"promise radius must be >= 0, got {self.radius}")
        if self.noise_slack < 0.0:
            raise ValueError("noise_slack must be >= 0")
        if self.mode is PromiseMode.REACHABILITY_FALLBACK:
            if self.fb_center is None or self.fb_radius is None or self.fb_time is None:
                raise ValueError("fallback promise needs fb_center, fb_radius, fb_time")
        if self.expires_at is not None and self.expires_at <= self.issued_at:
            raise ValueError("expires_at must lie strictly after issued_at")

    @property
    def max_speed(self) -> float:
        return self.anchor_control.limits.max_speed


def make_promise(
    issuer: int,
    recipient: int,
    now: float,
    anchor_state: UnicycleState,
    anchor_control: ControlInput,
    rule: PromiseRuleConfig,
    planning_control: Optional[ControlInput] = None,
    expires_at: Optional[float] = None,
    gap: Optional[float] = None,
) -> Promise:
    """Issue a promise anchored at the control actually applied at `now`.

    The dynamic rule sizes the ball from the planning control (the nominal
    team input, which may differ from the applied one while the issuer sits
    in safe mode); it falls back to the anchor control when no planning
    control is given.
    """
    u_max = anchor_control.limits.max_speed
    if isinstance(rule, StaticBall):
        radius = 2.0 * u_max * rule.tightness
    else:
        ref = planning_control if planning_control is not None else anchor_control
        radius = rule.scale * math.hypot(ref.speed, ref.turn_rate) + rule.floor
    return Promise(
        issuer=issuer,
        recipient=recipient,
        issued_at=now,
        anchor_state=anchor_state,
        anchor_control=anchor_control,
        radius=radius,
        mode=PromiseMode.BALL_RADIUS,
        expires_at=expires_at,
        gap=gap,
    )


def _ball_disk(p: Promise, t: float) -> DiskSet:
    tau = t - p.issued_at
    a = p.anchor_state
    c = p.anchor_control
    zx, zy, _ = arc_step(a.x, a.y, a.heading, c.speed, c.turn_rate, tau)
    u_max = c.limits.max_speed
    s = p.noise_slack * (1.0 + tau + 0.5 * u_max * tau * tau)
    r_ball = p.radius * tau + s
    dist = math.hypot(zx - a.x, zy - a.y)
    r_reach = dist + u_max * tau + p.noise_slack + 2.0 * s
    return DiskSet((zx, zy), min(r_ball, r_reach))


def promise_set_at(p: Promise, t: float) -> DiskSet:
    """Position disk guaranteed to contain the issuer at time t.

    Raises for t before issue, after expiry, or on an expired-mode promise;
    the simulation layer handles continuation past expiry separately.
    """
    if p.mode is PromiseMode.EXPIRED:
        raise ValueError("promise is expired")
    if p.mode is PromiseMode.REACHABILITY_FALLBACK:
        if t < p.fb_time:  # type: ignore[operator]
            raise ValueError(f"t={t} precedes fallback time {p.fb_time}")
        grow = p.max_speed * (t - p.fb_time)  # type: ignore[operator]
        return DiskSet(p.fb_center, p.fb_radius + grow)  # type: ignore[arg-type]
    if t < p.issued_at:
        raise ValueError(f"t={t} precedes issue time {p.issued_at}")
    if p.expires_at is not None and t > p.expires_at:
        raise ValueError(f"t={t} past expiry {p.expires_at}")
    return _ball_disk(p, t)


def view_disk_at(p: Promise, t: float) -> DiskSet:
    """Like promise_set_at but continues past expiry at the reachability rate.

    Recipients whose replacement promise has not arrived keep a sound view by
    growing the last valid disk at max speed.
    """
    if p.mode is PromiseMode.REACHABILITY_FALLBACK:
        return promise_set_at(p, t)
    if p.expires_at is not None and t > p.expires_at:
        edge = _ball_disk(p, p.expires_at)
        return DiskSet(edge.center, edge.radius + p.max_speed * (t - p.expires_at))
    return _ball_disk(p, t)


def expected_position(p: Promise, t: float) -> Tuple[float, float]:
    """Center of the promise disk: the recipient's point estimate."""
    return view_disk_at(p, t).center


def check_breach(p: Promise, t: float, actual: UnicycleState) -> bool:
    """True when the issuer's true position has left the promised disk."""
    disk = view_disk_at(p, t)
    dx = actual.x - disk.center[0]
    dy = actual.y - disk.center[1]
    return math.hypot(dx, dy) > disk.radius + BREACH_TOL


def fallback_to_reachability(p: Promise, t_star: float) -> Promise:
    """Replace a warned promise: freeze its disk at t_star, then grow at max speed."""
    disk = view_disk_at(p, t_star)
    return replace(
        p,
        mode=PromiseMode.REACHABILITY_FALLBACK,
        fb_center=disk.center,
        fb_radius=disk.radius,
        fb_time=t_star,
        expires_at=None,
    )


def validate_noisy_promise(received: Promise, omega_bar: float, delta_bar: float) -> Promise:
    """Inflate a received promise so it still contains the issuer's truth.

    The channel perturbs the anchor position and anchor control by vectors of
    norm at most omega_bar and the radius by at most delta_bar. The control
    ball is widened by omega_bar + delta_bar, and disk evaluation adds the
    slack term

        s(tau) = omega_bar * (1 + tau + max_speed * tau^2 / 2)

    covering the anchor offset plus the worst-case drift of the hold
    prediction under speed and turn-rate errors.
    """
    if omega_bar < 0.0 or delta_bar < 0.0:
        raise ValueError("noise bounds must be nonnegative")
    return replace(
        received,
        radius=received.radius + omega_bar + delta_bar,
        noise_slack=omega_bar,
    )


def is_expired(p: Promise, t: float) -> bool:
    if p.mode is PromiseMode.EXPIRED:
        return True
    return p.expires_at is not None and t > p.expires_at


WirePromise = Tuple[
    int, int, float, float, float, float, float, float, float, Optional[float], Optional[float]
]


def promise_to_wire(p: Promise) -> WirePromise:
    """Flatten a ball-mode promise to the tuple that crosses the channel."""
    if p.mode is not PromiseMode.BALL_RADIUS:
        raise ValueError("only ball-mode promises are transmitted")
    a = p.anchor_state
    c = p.anchor_control
    return (
        p.issuer,
        p.recipient,
        p.issued_at,
        a.x,
        a.y,
        a.heading,
        c.speed,
        c.turn_rate,
        p.radius,
        p.expires_at,
        p.gap,
    )


def promise_from_wire(wire: WirePromise, limits) -> Promise:
    issuer, recipient, issued_at, ax, ay, heading, speed, turn, radius, expires_at, gap = wire
    return Promise(
        issuer=issuer,
        recipient=recipient,
        issued_at=issued_at,
        anchor_state=UnicycleState(ax, ay, heading),
        anchor_control=ControlInput(speed, turn, limits),
        radius=radius,
        expires_at=expires_at,
        gap=gap,
    )
