"""Mode state machine and axis routing.

The routing oracle below is a hand-transcribed copy of the axis-mapping
table (written as data, not by calling the router), checked exhaustively
over every mode x mapping x axis-sign x channel-1 cell.
"""

import numpy as np
import pytest

from quadassist.errors import ContractError
from quadassist.kinematics import RobotConfiguration, forward_kinematics
from quadassist.model import default_model
from quadassist.quadstick import BreathChannelState, MappingMode, QuadstickFrame
from quadassist.router import (
    BaseTwistCommand,
    ControlMode,
    EETwistCommand,
    GripperAction,
    ModeState,
    RateCaps,
    initial_configuration,
    route_axes,
    update_control_mode,
)

N = BreathChannelState.NEUTRAL
B = BreathChannelState.BLOW
S = BreathChannelState.SUCK


def frame(h=0.0, v=0.0, ch=(N, N, N, N), btn=False, t=0.0):
    return QuadstickFrame(h, v, tuple(ch), btn, t)


CAPS = RateCaps()

# Hand-transcribed axis-mapping table.  Rows: (mode, mapping) -> which
# command field each input drives.  "None" = the input is unmapped.
AXIS_TABLE = {
    (ControlMode.BASE, MappingMode.PRIMARY): {
        "h": ("base", "vx", CAPS.base_vx),
        "v": ("base", "vy", CAPS.base_vy),
        "ch1": ("base", "wyaw", CAPS.base_wyaw),
    },
    (ControlMode.BASE, MappingMode.SECONDARY): {
        "h": None,
        "v": None,
        "ch1": None,
    },
    (ControlMode.EE_FRONT, MappingMode.PRIMARY): {
        "h": ("ee", "vx", CAPS.ee_linear),
        "v": ("ee", "vy", CAPS.ee_linear),
        "ch1": ("ee", "vz", CAPS.ee_linear),
    },
    (ControlMode.EE_TOP, MappingMode.PRIMARY): {
        "h": ("ee", "vx", CAPS.ee_linear),
        "v": ("ee", "vy", CAPS.ee_linear),
        "ch1": ("ee", "vz", CAPS.ee_linear),
    },
    (ControlMode.EE_FRONT, MappingMode.SECONDARY): {
        "h": ("ee", "wroll", CAPS.ee_angular),
        "v": ("ee", "wyaw", CAPS.ee_angular),
        "ch1": None,
    },
    (ControlMode.EE_TOP, MappingMode.SECONDARY): {
        "h": ("ee", "wroll", CAPS.ee_angular),
        "v": ("ee", "wpitch", CAPS.ee_angular),
        "ch1": None,
    },
}

BASE_FIELDS = ("vx", "vy", "wyaw")
EE_FIELDS = ("vx", "vy", "vz", "wroll", "wpitch", "wyaw")


def oracle_route(mode, mapping, h, v, ch1):
    expect = {("base", f): 0.0 for f in BASE_FIELDS}
    expect.update({("ee", f): 0.0 for f in EE_FIELDS})
    row = AXIS_TABLE[(mode, mapping)]
    third = {N: 0.0, B: 1.0, S: -1.0}[ch1]
    for value, key in ((h, "h"), (v, "v"), (third, "ch1")):
        cell = row[key]
        if cell is not None:
            kind, field, cap = cell
            expect[(kind, field)] += value * cap
    return expect


def command_fields(cmd):
    got = {("base", f): 0.0 for f in BASE_FIELDS}
    got.update({("ee", f): 0.0 for f in EE_FIELDS})
    if cmd.base is not None:
        for f in BASE_FIELDS:
            got[("base", f)] = getattr(cmd.base, f)
    if cmd.ee is not None:
        for f in EE_FIELDS:
            got[("ee", f)] = getattr(cmd.ee, f)
    return got


def test_routing_matches_table_exhaustively():
    cells = 0
    for mode in ControlMode:
        for mapping in MappingMode:
            for h in (-1.0, 0.0, 1.0):
                for v in (-1.0, 0.0, 1.0):
                    for ch1 in (N, B, S):
                        cmd = route_axes(frame(h=h, v=v, ch=(N, ch1, N, N)), mode, mapping, CAPS)
                        assert command_fields(cmd) == oracle_route(mode, mapping, h, v, ch1), (
                            f"cell mismatch at {mode} {mapping} h={h} v={v} ch1={ch1}"
                        )
                        cells += 1
    assert cells == 3 * 2 * 3 * 3 * 3


def test_routing_linear_in_axis_values(rng):
    for _ in range(200):
        mode = rng.choice(list(ControlMode))
        mapping = rng.choice(list(MappingMode))
        h = float(rng.uniform(-1, 1))
        v = float(rng.uniform(-1, 1))
        alpha = float(rng.uniform(0, 1))
        full = command_fields(route_axes(frame(h=h, v=v), mode, mapping, CAPS))
        scaled = command_fields(route_axes(frame(h=alpha * h, v=alpha * v), mode, mapping, CAPS))
        for key in full:
            assert scaled[key] == pytest.approx(alpha * full[key], abs=1e-15)


def test_base_mode_has_no_ee_command_and_vice_versa():
    for mapping in MappingMode:
        cmd = route_axes(frame(h=1, v=1, ch=(N, B, N, N)), ControlMode.BASE, mapping, CAPS)
        assert cmd.ee is None and cmd.base is not None
        for mode in (ControlMode.EE_FRONT, ControlMode.EE_TOP):
            cmd = route_axes(frame(h=1, v=1, ch=(N, B, N, N)), mode, mapping, CAPS)
            assert cmd.base is None and cmd.ee is not None


def test_mapping_switch_channel_never_routed(rng):
    for _ in range(500):
        mode = rng.choice(list(ControlMode))
        mapping = rng.choice(list(MappingMode))
        h = float(rng.uniform(-1, 1))
        v = float(rng.uniform(-1, 1))
        ch = tuple(rng.choice([N, B, S]) for _ in range(3))
        a = route_axes(frame(h=h, v=v, ch=ch + (N,)), mode, mapping, CAPS)
        b = route_axes(frame(h=h, v=v, ch=ch + (B,)), mode, mapping, CAPS)
        c = route_axes(frame(h=h, v=v, ch=ch + (S,)), mode, mapping, CAPS)
        assert a == b == c


def test_gripper_channel_mapping():
    for mode in ControlMode:
        for mapping in MappingMode:
            assert route_axes(frame(ch=(N, N, B, N)), mode, mapping).gripper is GripperAction.OPEN
            assert route_axes(frame(ch=(N, N, S, N)), mode, mapping).gripper is GripperAction.CLOSE
            assert route_axes(frame(), mode, mapping).gripper is GripperAction.HOLD


# --- control-mode state machine ---


def test_blow_edge_enters_base_mode():
    s = ModeState(control=ControlMode.EE_FRONT)
    s = update_control_mode(s, frame(ch=(B, N, N, N)), frame())
    assert s.control is ControlMode.BASE


def test_suck_edge_returns_to_recent_ee_mode():
    s = ModeState(control=ControlMode.EE_TOP, last_ee=ControlMode.EE_TOP)
    s = update_control_mode(s, frame(ch=(B, N, N, N)), frame())
    assert s.control is ControlMode.BASE
    s = update_control_mode(s, frame(ch=(S, N, N, N)), frame())
    assert s.control is ControlMode.EE_TOP


def test_suck_with_no_ee_history_gives_front():
    s = update_control_mode(ModeState(), frame(ch=(S, N, N, N)), frame())
    assert s.control is ControlMode.EE_FRONT


def test_button_toggles_ee_submodes():
    s = ModeState(control=ControlMode.EE_FRONT)
    s = update_control_mode(s, frame(btn=True), frame())
    assert s.control is ControlMode.EE_TOP
    s = update_control_mode(s, frame(btn=False), frame(btn=True))  # release: no edge
    assert s.control is ControlMode.EE_TOP
    s = update_control_mode(s, frame(btn=True), frame(btn=False))
    assert s.control is ControlMode.EE_FRONT


def test_button_inert_in_base_mode():
    s = ModeState(control=ControlMode.BASE, last_ee=ControlMode.EE_TOP)
    s = update_control_mode(s, frame(btn=True), frame())
    assert s.control is ControlMode.BASE
    assert s.last_ee is ControlMode.EE_TOP


def test_steady_inputs_fixed_point():
    s = ModeState()
    held = frame(ch=(B, N, N, N), btn=True)
    s = update_control_mode(s, held, frame())
    for _ in range(10):
        assert update_control_mode(s, held, held) == s


def test_mode_history_replay_oracle(rng):
    """Random event sequences: suck always restores the most recent EE mode,
    tracked independently of the router's own state."""
    events = [
        frame(ch=(B, N, N, N)),  # blow edge
        frame(ch=(S, N, N, N)),  # suck edge
        frame(btn=True),  # button press
        frame(),  # release / neutral
    ]
    for _ in range(200):
        s = ModeState()
        prev = frame()
        shadow_ee = ControlMode.EE_FRONT
        for _ in range(60):
            f = events[int(rng.integers(len(events)))]
            s = update_control_mode(s, f, prev)
            if s.control.is_ee:
                shadow_ee = s.control
            prev = f
        s2 = update_control_mode(
            s, frame(ch=(S, N, N, N)), frame() if prev.channel(0) is S else prev
        )
        assert s2.control is shadow_ee


# --- initial configurations ---


def test_initial_config_front_tool_axis_horizontal():
    model = default_model()
    cfg = RobotConfiguration(arm_q=initial_configuration(ControlMode.EE_FRONT))
    pose = forward_kinematics(cfg, model)
    w, x, y, z = pose.orientation
    R = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    tool_axis = R[:, 0]  # tool x-axis in world
    # pointing forward, within 1 degree of horizontal
    assert tool_axis @ np.array([1.0, 0.0, 0.0]) > np.cos(np.radians(1.0))


def test_initial_config_top_tool_axis_down():
    model = default_model()
    cfg = RobotConfiguration(arm_q=initial_configuration(ControlMode.EE_TOP))
    pose = forward_kinematics(cfg, model)
    w, x, y, z = pose.orientation
    R = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    tool_axis = R[:, 0]
    assert tool_axis @ np.array([0.0, 0.0, -1.0]) > np.cos(np.radians(1.0))


def test_initial_config_base_mode_is_contract_error():
    with pytest.raises(ContractError):
        initial_configuration(ControlMode.BASE)


def test_initial_config_returns_copy():
    a = initial_configuration(ControlMode.EE_FRONT)
    a[0] = 99.0
    assert initial_configuration(ControlMode.EE_FRONT)[0] == 0.0
