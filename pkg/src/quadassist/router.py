"""Two-level mode state machine and axis routing.

Control mode (base vs. the two end-effector configurations) is switched
with breath channel 0 and the push button; the joystick axes and channel
1 are routed to base or EE rates according to the active control mode and
the primary/secondary mapping mode.  Channel 2 always drives the gripper;
channel 3 never reaches routing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from quadassist.errors import ContractError
from quadassist.quadstick import BreathChannelState, MappingMode, QuadstickFrame

GRIPPER_CHANNEL = 2
THIRD_AXIS_CHANNEL = 1
MODE_SWITCH_CHANNEL = 0


class ControlMode(enum.Enum):
    BASE = "base"
    EE_FRONT = "ee_front"
    EE_TOP = "ee_top"

    @property
    def is_ee(self) -> bool:
        return self is not ControlMode.BASE


class GripperAction(enum.Enum):
    OPEN = "open"
    CLOSE = "close"
    HOLD = "hold"


@dataclass(frozen=True)
class BaseTwistCommand:
    """Body-frame base velocity command."""

    vx: float = 0.0
    vy: float = 0.0
    wyaw: float = 0.0

    def is_zero(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0 and self.wyaw == 0.0


@dataclass(frozen=True)
class EETwistCommand:
    """End-effector twist command, expressed in the robot base frame."""

    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    wroll: float = 0.0
    wpitch: float = 0.0
    wyaw: float = 0.0

    def is_zero(self) -> bool:
        return (
            self.vx == 0.0
            and self.vy == 0.0
            and self.vz == 0.0
            and self.wroll == 0.0
            and self.wpitch == 0.0
            and self.wyaw == 0.0
        )


@dataclass(frozen=True)
class RoutedCommand:
    """Exactly one of base/EE twist, plus the mode-independent gripper action."""

    base: BaseTwistCommand | None
    ee: EETwistCommand | None
    gripper: GripperAction
    mode_after: ControlMode

    def motion_is_zero(self) -> bool:
        if self.base is not None and not self.base.is_zero():
            return False
        if self.ee is not None and not self.ee.is_zero():
            return False
        return True


@dataclass
class RateCaps:
    """Teleop rate caps; axis values scale linearly to these."""

    base_vx: float = 0.5
    base_vy: float = 0.5
    base_wyaw: float = 0.7
    ee_linear: float = 0.15
    ee_angular: float = 0.5


@dataclass(frozen=True)
class ModeState:
    """Control mode plus the EE mode to return to after base driving."""

    control: ControlMode = ControlMode.BASE
    last_ee: ControlMode = ControlMode.EE_FRONT


def _edge(prev: BreathChannelState, cur: BreathChannelState, to: BreathChannelState) -> bool:
    return cur is to and prev is not to


def update_control_mode(
    state: ModeState, frame: QuadstickFrame, prev_frame: QuadstickFrame
) -> ModeState:
    """Channel-0 blow edge -> base mode; suck edge -> most recent EE mode;
    push-button rising edge toggles EE front/top (no effect in base mode)."""
    control = state.control
    last_ee = state.last_ee

    ch_prev = prev_frame.channel(MODE_SWITCH_CHANNEL)
    ch_cur = frame.channel(MODE_SWITCH_CHANNEL)
    if _edge(ch_prev, ch_cur, BreathChannelState.BLOW):
        control = ControlMode.BASE
    elif _edge(ch_prev, ch_cur, BreathChannelState.SUCK):
        control = last_ee

    if frame.push_button and not prev_frame.push_button and control.is_ee:
        control = ControlMode.EE_TOP if control is ControlMode.EE_FRONT else ControlMode.EE_FRONT

    if control.is_ee:
        last_ee = control
    return ModeState(control=control, last_ee=last_ee)


DEFAULT_INITIAL_CONFIGS = {
    # Gripper horizontal, pointing forward at mid height (pitch sum = 0).
    ControlMode.EE_FRONT: (0.0, 0.4, -0.8, 0.0, 0.4, 0.0),
    # Gripper pointing straight down from above (pitch sum = pi/2).
    ControlMode.EE_TOP: (0.0, -0.3, 0.9, 0.0, float(np.pi / 2) - 0.6, 0.0),
}


@dataclass
class InitialConfigTable:
    """Canonical arm joint vectors for the two EE control modes."""

    front: np.ndarray = field(
        default_factory=lambda: np.array(DEFAULT_INITIAL_CONFIGS[ControlMode.EE_FRONT])
    )
    top: np.ndarray = field(
        default_factory=lambda: np.array(DEFAULT_INITIAL_CONFIGS[ControlMode.EE_TOP])
    )


def initial_configuration(mode: ControlMode, table: InitialConfigTable | None = None) -> np.ndarray:
    """Canonical arm joint vector for an EE control mode (base pose unaffected)."""
    table = table or InitialConfigTable()
    if mode is ControlMode.EE_FRONT:
        return table.front.copy()
    if mode is ControlMode.EE_TOP:
        return table.top.copy()
    raise ContractError("base control mode has no initial configuration")


def _third_axis(frame: QuadstickFrame) -> float:
    ch = frame.channel(THIRD_AXIS_CHANNEL)
    if ch is BreathChannelState.BLOW:
        return 1.0
    if ch is BreathChannelState.SUCK:
        return -1.0
    return 0.0


def _gripper_action(frame: QuadstickFrame) -> GripperAction:
    ch = frame.channel(GRIPPER_CHANNEL)
    if ch is BreathChannelState.BLOW:
        return GripperAction.OPEN
    if ch is BreathChannelState.SUCK:
        return GripperAction.CLOSE
    return GripperAction.HOLD


def route_axes(
    frame: QuadstickFrame,
    mode: ControlMode,
    mapping: MappingMode,
    caps: RateCaps | None = None,
) -> RoutedCommand:
    """Route one frame into a base or EE command per the axis-mapping table.

    Primary mapping: horizontal/vertical -> x/y rates, channel 1 -> the
    third axis (base yaw, or EE z).  Secondary mapping: horizontal ->
    roll; vertical -> yaw (front) or pitch (top); unmapped for the base.
    """
    caps = caps or RateCaps()
    h = frame.joystick_h
    v = frame.joystick_v
    third = _third_axis(frame)
    gripper = _gripper_action(frame)

    if mode is ControlMode.BASE:
        if mapping is MappingMode.PRIMARY:
            base = BaseTwistCommand(
                vx=h * caps.base_vx, vy=v * caps.base_vy, wyaw=third * caps.base_wyaw
            )
        else:
            base = BaseTwistCommand()
        return RoutedCommand(base=base, ee=None, gripper=gripper, mode_after=mode)

    if mapping is MappingMode.PRIMARY:
        ee = EETwistCommand(
            vx=h * caps.ee_linear, vy=v * caps.ee_linear, vz=third * caps.ee_linear
        )
    elif mode is ControlMode.EE_FRONT:
        ee = EETwistCommand(wroll=h * caps.ee_angular, wyaw=v * caps.ee_angular)
    else:  # EE_TOP
        ee = EETwistCommand(wroll=h * caps.ee_angular, wpitch=v * caps.ee_angular)
    return RoutedCommand(base=None, ee=ee, gripper=gripper, mode_after=mode)
