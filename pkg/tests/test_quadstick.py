"""Input-device model: decoding, deadzone shaping, mapping-switch latch.

Deadzone expectations are frozen from the closed-form rescale
(|v| - d) / (1 - d) evaluated by hand; the latch tests replay the state
machine sample by sample against a hand-stepped trace.
"""

import math

import pytest

from quadassist.errors import ConfigError, DecodeError
from quadassist.quadstick import (
    BreathChannelState,
    MappingMode,
    MappingModeState,
    QuadstickFrame,
    apply_deadzone,
    decode_frame,
    frame_to_report,
    neutral_frame,
    update_mapping_mode,
)

N = BreathChannelState.NEUTRAL
B = BreathChannelState.BLOW
S = BreathChannelState.SUCK


def frame(h=0.0, v=0.0, ch=(N, N, N, N), btn=False, t=0.0):
    return QuadstickFrame(h, v, tuple(ch), btn, t)


# --- decode_frame ---


def test_decode_all_neutral_identity():
    f = decode_frame({"h": 0.0, "v": 0.0, "ch": ["n", "n", "n", "n"], "btn": False, "t": 0.0})
    assert f == neutral_frame()


def test_decode_clamps_out_of_range_axis():
    f = decode_frame({"h": 1.7, "v": -3.0, "ch": ["n", "n", "n", "n"], "btn": False, "t": 1.0})
    assert f.joystick_h == 1.0
    assert f.joystick_v == -1.0


def test_decode_wrong_channel_count():
    with pytest.raises(DecodeError, match="channels: expected 4"):
        decode_frame({"h": 0, "v": 0, "ch": ["n", "n", "n"], "btn": False, "t": 0})


def test_decode_names_offending_field():
    with pytest.raises(DecodeError, match="h:"):
        decode_frame({"h": math.nan, "v": 0, "ch": ["n"] * 4, "btn": False, "t": 0})
    with pytest.raises(DecodeError, match=r"channels\[2\]"):
        decode_frame({"h": 0, "v": 0, "ch": ["n", "n", "x", "n"], "btn": False, "t": 0})
    with pytest.raises(DecodeError, match="missing field"):
        decode_frame({"h": 0, "v": 0, "ch": ["n"] * 4, "btn": False})


def test_decode_fuzz_always_satisfies_frame_invariants(rng):
    for _ in range(2000):
        report = {
            "h": float(rng.uniform(-5, 5)),
            "v": float(rng.uniform(-5, 5)),
            "ch": [str(rng.choice(["n", "b", "s"])) for _ in range(4)],
            "btn": bool(rng.integers(2)),
            "t": float(rng.uniform(0, 100)),
        }
        f = decode_frame(report)
        assert -1.0 <= f.joystick_h <= 1.0
        assert -1.0 <= f.joystick_v <= 1.0
        assert len(f.channels) == 4
        assert all(isinstance(c, BreathChannelState) for c in f.channels)


def test_report_round_trip():
    f = frame(h=0.25, v=-0.5, ch=(B, S, N, B), btn=True, t=3.5)
    assert decode_frame(frame_to_report(f)) == f


# --- apply_deadzone ---


def test_deadzone_inside_zeroed():
    assert apply_deadzone(frame(h=0.05), 0.1).joystick_h == 0.0


def test_deadzone_endpoint_preserved():
    assert apply_deadzone(frame(h=1.0), 0.1).joystick_h == 1.0
    assert apply_deadzone(frame(h=-1.0), 0.1).joystick_h == -1.0


def test_deadzone_rescale_frozen_values():
    # (0.55 - 0.1) / 0.9 and (0.5 - 0.08) / 0.92, computed by hand
    assert apply_deadzone(frame(h=0.55), 0.1).joystick_h == pytest.approx(0.5)
    assert apply_deadzone(frame(h=0.5), 0.08).joystick_h == pytest.approx(0.45652173913043476)


def test_deadzone_zero_is_identity(rng):
    for _ in range(100):
        f = frame(h=float(rng.uniform(-1, 1)), v=float(rng.uniform(-1, 1)))
        assert apply_deadzone(f, 0.0) == f


def test_deadzone_monotone_and_continuous():
    d = 0.3
    xs = [i / 500.0 for i in range(-500, 501)]
    ys = [apply_deadzone(frame(h=x), d).joystick_h for x in xs]
    for a, b in zip(ys, ys[1:]):
        assert b >= a  # monotone non-decreasing
        assert b - a < 0.01  # no jumps on a 0.002 grid
    assert apply_deadzone(frame(h=d), d).joystick_h == 0.0  # continuous at the edge


def test_deadzone_odd_symmetry(rng):
    for _ in range(100):
        x = float(rng.uniform(0, 1))
        pos = apply_deadzone(frame(h=x), 0.2).joystick_h
        neg = apply_deadzone(frame(h=-x), 0.2).joystick_h
        assert neg == pytest.approx(-pos)


def test_deadzone_rejects_bad_config():
    with pytest.raises(ConfigError):
        apply_deadzone(frame(), 1.0)
    with pytest.raises(ConfigError):
        apply_deadzone(frame(), -0.1)


# --- update_mapping_mode ---


def ch3(state):
    return frame(ch=(N, N, N, state))


def test_switch_starts_on_blow_edge():
    s0 = MappingModeState()
    s1 = update_mapping_mode(s0, ch3(B), now=10.0)
    assert s1.current is MappingMode.PRIMARY
    assert s1.pending is MappingMode.SECONDARY
    assert s1.transition_started_at == 10.0


def test_switch_completes_only_after_latency():
    s = update_mapping_mode(MappingModeState(), ch3(B), now=10.0, switch_latency=2.0)
    s = update_mapping_mode(s, ch3(N), now=11.9, switch_latency=2.0)
    assert s.pending is MappingMode.SECONDARY  # not yet
    s = update_mapping_mode(s, ch3(N), now=12.1, switch_latency=2.0)
    assert s.current is MappingMode.SECONDARY
    assert s.pending is None


def test_exact_latency_boundary_completes():
    s = update_mapping_mode(MappingModeState(), ch3(B), now=10.0, switch_latency=2.0)
    s = update_mapping_mode(s, ch3(N), now=12.0, switch_latency=2.0)
    assert s.current is MappingMode.SECONDARY


def test_no_input_fixed_point():
    s = MappingModeState()
    for t in range(20):
        s = update_mapping_mode(s, ch3(N), now=float(t))
    assert s == MappingModeState()


def test_held_blow_is_one_edge():
    s = update_mapping_mode(MappingModeState(), ch3(B), now=0.0, switch_latency=1.0)
    s = update_mapping_mode(s, ch3(B), now=2.0, switch_latency=1.0)  # completes
    assert s.current is MappingMode.SECONDARY
    # still held: no new edge, no new transition
    s = update_mapping_mode(s, ch3(B), now=3.0, switch_latency=1.0)
    assert s.pending is None
    assert s.current is MappingMode.SECONDARY


def test_inputs_during_transition_ignored():
    s = update_mapping_mode(MappingModeState(), ch3(B), now=0.0, switch_latency=5.0)
    s = update_mapping_mode(s, ch3(N), now=1.0, switch_latency=5.0)
    s = update_mapping_mode(s, ch3(B), now=2.0, switch_latency=5.0)  # re-blow mid-flight
    assert s.pending is MappingMode.SECONDARY
    assert s.transition_started_at == 0.0  # not restarted


def test_suck_on_switch_channel_reserved():
    s = update_mapping_mode(MappingModeState(), ch3(S), now=0.0)
    assert s.pending is None
    assert s.current is MappingMode.PRIMARY


def test_round_trip_switch_returns_to_primary():
    s = MappingModeState()
    s = update_mapping_mode(s, ch3(B), now=0.0, switch_latency=1.0)
    s = update_mapping_mode(s, ch3(N), now=1.5, switch_latency=1.0)
    assert s.current is MappingMode.SECONDARY
    s = update_mapping_mode(s, ch3(B), now=2.0, switch_latency=1.0)
    s = update_mapping_mode(s, ch3(N), now=3.5, switch_latency=1.0)
    assert s.current is MappingMode.PRIMARY


def test_never_completes_early_fuzz(rng):
    """Property: a flip lands only >= switch_latency after its edge, and only
    via a pending transition."""
    for _ in range(200):
        latency = float(rng.uniform(0.5, 3.0))
        s = MappingModeState()
        t = 0.0
        edge_at = None
        current = MappingMode.PRIMARY
        for _ in range(100):
            t += float(rng.uniform(0.01, 0.4))
            st = B if rng.integers(3) == 0 else N
            was_pending = s.pending is not None
            prev_blow = s.last_switch_blow
            s = update_mapping_mode(s, ch3(st), now=t, switch_latency=latency)
            if not was_pending and st is B and not prev_blow:
                edge_at = t
            if s.current is not current:
                assert edge_at is not None
                assert t - edge_at >= latency
                current = s.current
                edge_at = None
