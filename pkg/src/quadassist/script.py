"""Declarative timed input schedules.

A pilot script is a list of entries, each holding one device frame for a
span of ticks plus optional voice transcripts on the entry's first tick.
Ticks between entries are neutral.  Scripts are strictly ordered and
non-overlapping, so a script is a total function from tick to input and
a scripted run is exactly as reproducible as a recorded one.

JSON form::

    {"entries": [
        {"tick": 0,   "v": 1.0, "hold": 120},
        {"tick": 140, "ch": "snnn"},
        {"tick": 150, "say": ["start"]}
    ]}

Channels use the same n/b/s letters as the wire format, channel 0 first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from quadassist.errors import ConfigError
from quadassist.quadstick import BreathChannelState, QuadstickFrame
from quadassist.world import World

_CODES = {"n": BreathChannelState.NEUTRAL,
          "b": BreathChannelState.BLOW,
          "s": BreathChannelState.SUCK}

_NEUTRAL = (BreathChannelState.NEUTRAL,) * 4


def _channels(code: str, where: str):
    if not isinstance(code, str) or len(code) != 4 or any(c not in _CODES for c in code):
        raise ConfigError(f"{where}: channels must be 4 letters from n/b/s")
    return tuple(_CODES[c] for c in code)


@dataclass(frozen=True)
class ScriptEntry:
    tick: int
    h: float = 0.0
    v: float = 0.0
    channels: tuple = _NEUTRAL
    push_button: bool = False
    hold: int = 1
    transcripts: tuple[str, ...] = ()

    def frame(self, t: float) -> QuadstickFrame:
        return QuadstickFrame(self.h, self.v, self.channels,
                              self.push_button, t)


@dataclass
class PilotScript:
    entries: list[ScriptEntry] = field(default_factory=list)

    def __post_init__(self):
        prev_end = 0
        for i, e in enumerate(self.entries):
            if e.tick < 0 or e.hold < 1:
                raise ConfigError(f"entries[{i}]: tick must be >= 0, hold >= 1")
            if e.tick < prev_end:
                raise ConfigError(
                    f"entries[{i}]: tick {e.tick} overlaps the previous entry")
            prev_end = e.tick + e.hold

    @property
    def end_tick(self) -> int:
        if not self.entries:
            return 0
        last = self.entries[-1]
        return last.tick + last.hold

    @classmethod
    def load(cls, source: str | Path | dict) -> "PilotScript":
        if isinstance(source, dict):
            raw = source
        else:
            try:
                raw = json.loads(Path(source).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read script {source}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{source}: invalid JSON at line {exc.lineno}: {exc.msg}"
                ) from exc
        if not isinstance(raw, dict) or not isinstance(raw.get("entries"), list):
            raise ConfigError("script: expected an object with an entries list")
        entries = []
        for i, item in enumerate(raw["entries"]):
            where = f"entries[{i}]"
            if not isinstance(item, dict):
                raise ConfigError(f"{where}: expected an object")
            unknown = set(item) - {"tick", "h", "v", "ch", "btn", "hold", "say"}
            if unknown:
                raise ConfigError(f"{where}: unknown fields {sorted(unknown)}")
            if not isinstance(item.get("tick"), int):
                raise ConfigError(f"{where}: tick must be an integer")
            say = item.get("say", [])
            if not isinstance(say, list) or not all(isinstance(s, str) for s in say):
                raise ConfigError(f"{where}: say must be a list of strings")
            entries.append(ScriptEntry(
                tick=item["tick"],
                h=float(item.get("h", 0.0)),
                v=float(item.get("v", 0.0)),
                channels=_channels(item.get("ch", "nnnn"), where),
                push_button=bool(item.get("btn", False)),
                hold=item.get("hold", 1),
                transcripts=tuple(say),
            ))
        return cls(entries)

    def input_at(self, tick: int, t: float) -> tuple[Optional[QuadstickFrame], list[str]]:
        """Frame and transcripts for one tick (None frame means neutral)."""
        for e in self.entries:  # few entries; linear scan is fine
            if e.tick <= tick < e.tick + e.hold:
                say = list(e.transcripts) if tick == e.tick else []
                return e.frame(t), say
            if e.tick > tick:
                break
        return None, []

    def play(self, world: World, ticks: Optional[int] = None) -> World:
        end = world.tick + (ticks if ticks is not None else self.end_tick)
        while world.tick < end:
            frame, say = self.input_at(world.tick, world.tick * world.dt)
            world.step(frame, say)
        return world
