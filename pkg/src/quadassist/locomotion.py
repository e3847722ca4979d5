"""Capped-velocity kinematic base controller (learned-policy stand-in).

Velocity commands slew under acceleration limits and are hard-clamped to
the platform's maximum walking speed; pose integrates in the body frame.
``goto_target`` provides the proportional navigation used by the scripted
pilot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from quadassist.errors import ContractError
from quadassist.router import BaseTwistCommand

MAX_WALK_SPEED = 1.3  # hard platform cap, m/s


@dataclass
class BaseMotionLimits:
    yaw_rate: float = 1.0  # rad/s hard cap
    linear_accel: float = 2.0  # m/s^2
    yaw_accel: float = 4.0  # rad/s^2


@dataclass
class BaseState:
    """Planar base pose (world) and body-frame velocity."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    wyaw: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def _wrap(a: float) -> float:
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def _slew(value: float, target: float, max_delta: float) -> float:
    d = target - value
    if d > max_delta:
        d = max_delta
    elif d < -max_delta:
        d = -max_delta
    return value + d


def step_base(
    state: BaseState,
    cmd: BaseTwistCommand,
    dt: float,
    limits: BaseMotionLimits | None = None,
) -> BaseState:
    """One fixed step: slew velocity toward the command, clamp, integrate."""
    if dt <= 0.0:
        raise ContractError("dt must be > 0")
    limits = limits or BaseMotionLimits()

    dv = limits.linear_accel * dt
    vx = _slew(state.vx, cmd.vx, dv)
    vy = _slew(state.vy, cmd.vy, dv)
    wyaw = _slew(state.wyaw, cmd.wyaw, limits.yaw_accel * dt)

    speed = math.hypot(vx, vy)
    if speed > MAX_WALK_SPEED:
        k = MAX_WALK_SPEED / speed
        vx *= k
        vy *= k
    if wyaw > limits.yaw_rate:
        wyaw = limits.yaw_rate
    elif wyaw < -limits.yaw_rate:
        wyaw = -limits.yaw_rate

    c = math.cos(state.yaw)
    s = math.sin(state.yaw)
    return BaseState(
        x=state.x + (c * vx - s * vy) * dt,
        y=state.y + (s * vx + c * vy) * dt,
        yaw=_wrap(state.yaw + wyaw * dt),
        vx=vx,
        vy=vy,
        wyaw=wyaw,
    )


@dataclass
class GotoGains:
    kp_lin: float = 1.0
    kp_yaw: float = 1.5
    pos_tolerance: float = 0.02  # m
    yaw_tolerance: float = 0.02  # rad


def goto_target(
    state: BaseState,
    target_x: float,
    target_y: float,
    target_yaw: float,
    vx_cap: float = 0.5,
    vy_cap: float = 0.5,
    wyaw_cap: float = 0.7,
    gains: GotoGains | None = None,
) -> BaseTwistCommand:
    """Proportional body-frame command toward a pose, zero inside tolerance."""
    for v in (target_x, target_y, target_yaw):
        if not math.isfinite(v):
            raise ContractError("target must be finite")
    gains = gains or GotoGains()

    ex_w = target_x - state.x
    ey_w = target_y - state.y
    eyaw = _wrap(target_yaw - state.yaw)
    if math.hypot(ex_w, ey_w) < gains.pos_tolerance and abs(eyaw) < gains.yaw_tolerance:
        return BaseTwistCommand()

    c = math.cos(-state.yaw)
    s = math.sin(-state.yaw)
    ex = c * ex_w - s * ey_w
    ey = s * ex_w + c * ey_w

    vx = max(-vx_cap, min(vx_cap, gains.kp_lin * ex))
    vy = max(-vy_cap, min(vy_cap, gains.kp_lin * ey))
    wyaw = max(-wyaw_cap, min(wyaw_cap, gains.kp_yaw * eyaw))
    return BaseTwistCommand(vx=vx, vy=vy, wyaw=wyaw)
