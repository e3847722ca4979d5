"""Quadstick input device model.

Frame decoding and validation, symmetric deadzone shaping, and the
latched primary/secondary axis-mapping switch with its multi-second
firmware latency.  Channel index 3 is reserved for the mapping switch and
never reaches motion routing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from quadassist.errors import ConfigError, DecodeError

MAPPING_SWITCH_CHANNEL = 3
DEFAULT_DEADZONE = 0.08
DEFAULT_SWITCH_LATENCY = 2.0


class BreathChannelState(enum.Enum):
    NEUTRAL = "n"
    BLOW = "b"
    SUCK = "s"


class MappingMode(enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"

    def other(self) -> "MappingMode":
        return MappingMode.SECONDARY if self is MappingMode.PRIMARY else MappingMode.PRIMARY


@dataclass(frozen=True)
class QuadstickFrame:
    """One sampled state of the pilot input device."""

    joystick_h: float
    joystick_v: float
    channels: tuple[BreathChannelState, BreathChannelState, BreathChannelState, BreathChannelState]
    push_button: bool
    timestamp: float

    def channel(self, idx: int) -> BreathChannelState:
        return self.channels[idx]


NEUTRAL_CHANNELS = (
    BreathChannelState.NEUTRAL,
    BreathChannelState.NEUTRAL,
    BreathChannelState.NEUTRAL,
    BreathChannelState.NEUTRAL,
)


def neutral_frame(t: float = 0.0) -> QuadstickFrame:
    return QuadstickFrame(0.0, 0.0, NEUTRAL_CHANNELS, False, t)


_CHANNEL_CODES = {
    "n": BreathChannelState.NEUTRAL,
    "b": BreathChannelState.BLOW,
    "s": BreathChannelState.SUCK,
}


def _clamp_axis(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise DecodeError(f"{name}: not a number ({value!r})") from None
    if not math.isfinite(v):
        raise DecodeError(f"{name}: non-finite value")
    return min(1.0, max(-1.0, v))


def decode_frame(raw_report: dict) -> QuadstickFrame:
    """Decode one wire report: fields h, v, ch (4 of "n"|"b"|"s"), btn, t."""
    if not isinstance(raw_report, dict):
        raise DecodeError(f"report: expected an object, got {type(raw_report).__name__}")
    missing = [k for k in ("h", "v", "ch", "btn", "t") if k not in raw_report]
    if missing:
        raise DecodeError(f"report: missing field(s) {', '.join(missing)}")

    h = _clamp_axis(raw_report["h"], "h")
    v = _clamp_axis(raw_report["v"], "v")

    ch_raw = raw_report["ch"]
    if not isinstance(ch_raw, Sequence) or isinstance(ch_raw, (str, bytes)) or len(ch_raw) != 4:
        raise DecodeError(f"channels: expected 4, got {ch_raw!r}")
    channels = []
    for i, c in enumerate(ch_raw):
        if isinstance(c, BreathChannelState):
            channels.append(c)
            continue
        state = _CHANNEL_CODES.get(c if isinstance(c, str) else None)
        if state is None:
            raise DecodeError(f"channels[{i}]: expected one of n/b/s, got {c!r}")
        channels.append(state)

    t = raw_report["t"]
    try:
        t = float(t)
    except (TypeError, ValueError):
        raise DecodeError(f"t: not a number ({t!r})") from None
    if not math.isfinite(t):
        raise DecodeError("t: non-finite timestamp")

    return QuadstickFrame(h, v, tuple(channels), bool(raw_report["btn"]), t)


def frame_to_report(frame: QuadstickFrame) -> dict:
    """Inverse of decode_frame, used by replay logs and the session protocol."""
    return {
        "h": frame.joystick_h,
        "v": frame.joystick_v,
        "ch": [c.value for c in frame.channels],
        "btn": frame.push_button,
        "t": frame.timestamp,
    }


def _shape_axis(value: float, deadzone: float) -> float:
    if abs(value) < deadzone:
        return 0.0
    sign = 1.0 if value > 0.0 else -1.0
    return sign * (abs(value) - deadzone) / (1.0 - deadzone)


def apply_deadzone(frame: QuadstickFrame, deadzone: float = DEFAULT_DEADZONE) -> QuadstickFrame:
    """Zero axis values inside the deadzone, rescale the rest to span [-1, 1]."""
    if not 0.0 <= deadzone < 1.0:
        raise ConfigError(f"deadzone must be in [0, 1), got {deadzone}")
    return replace(
        frame,
        joystick_h=_shape_axis(frame.joystick_h, deadzone),
        joystick_v=_shape_axis(frame.joystick_v, deadzone),
    )


@dataclass(frozen=True)
class MappingModeState:
    """Latched mapping mode plus an optional in-flight transition."""

    current: MappingMode = MappingMode.PRIMARY
    transition_started_at: Optional[float] = None
    pending: Optional[MappingMode] = None
    last_switch_blow: bool = False  # previous sample of channel 3, for edge detection

    @property
    def in_transition(self) -> bool:
        return self.pending is not None


def update_mapping_mode(
    state: MappingModeState,
    frame: QuadstickFrame,
    now: float,
    switch_latency: float = DEFAULT_SWITCH_LATENCY,
) -> MappingModeState:
    """Advance the mapping-switch latch with one input frame.

    A Neutral-to-Blow edge on channel 3 starts a transition to the
    opposite mode; the flip lands only once ``switch_latency`` has
    elapsed.  Inputs during a pending transition are ignored.
    """
    blow = frame.channel(MAPPING_SWITCH_CHANNEL) is BreathChannelState.BLOW

    if state.pending is not None:
        if now - state.transition_started_at >= switch_latency:
            return MappingModeState(current=state.pending, last_switch_blow=blow)
        return replace(state, last_switch_blow=blow)

    if blow and not state.last_switch_blow:
        return MappingModeState(
            current=state.current,
            transition_started_at=now,
            pending=state.current.other(),
            last_switch_blow=True,
        )
    return replace(state, last_switch_blow=blow)
