"""Transcript keyword dispatcher.

Text lines (speech-to-text is out of scope; transcripts are the input
boundary) are tokenized and matched against a keyword table mapping to the
three exposed commands.  Matching is token-bounded, so "stop" does not
fire on "stopwatch".  When several keywords appear in one line the
highest-priority command wins; at most one command is emitted per line.

Dispatch does not act on the simulation directly: effects are latched and
consumed at the next tick boundary by the world stepper, the same latch
contract the autonomy pipeline uses for its abort flag.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional

from quadassist.errors import ConfigError


class VoiceCommand(enum.IntEnum):
    """The three exposed commands; smaller value = higher priority."""

    STOP = 0
    RETREAT_FACE_TOUCH = 1
    START_FACE_TOUCH = 2


DEFAULT_KEYWORDS: dict[VoiceCommand, frozenset[str]] = {
    VoiceCommand.STOP: frozenset({"stop", "halt"}),
    VoiceCommand.RETREAT_FACE_TOUCH: frozenset({"retreat", "back", "away"}),
    VoiceCommand.START_FACE_TOUCH: frozenset({"start", "brush", "face"}),
}

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class KeywordTable:
    """Per-command keyword token sets; pairwise disjoint and non-empty."""

    keywords: dict[VoiceCommand, frozenset[str]] = field(
        default_factory=lambda: dict(DEFAULT_KEYWORDS)
    )

    def __post_init__(self):
        seen: dict[str, VoiceCommand] = {}
        for cmd in VoiceCommand:
            words = self.keywords.get(cmd)
            if not words:
                raise ConfigError(f"keyword table: no keywords for {cmd.name}")
            for w in words:
                if w != w.lower() or not _TOKEN_RE.fullmatch(w):
                    raise ConfigError(f"keyword table: {w!r} is not a lowercase token")
                if w in seen:
                    raise ConfigError(
                        f"keyword table: {w!r} assigned to both {seen[w].name} and {cmd.name}"
                    )
                seen[w] = cmd

    @staticmethod
    def from_config(raw: dict) -> "KeywordTable":
        """Build from a config mapping like {"stop": [...], "retreat": [...], "start": [...]}."""
        names = {
            "stop": VoiceCommand.STOP,
            "retreat": VoiceCommand.RETREAT_FACE_TOUCH,
            "start": VoiceCommand.START_FACE_TOUCH,
        }
        table = dict(DEFAULT_KEYWORDS)
        for key, words in raw.items():
            if key not in names:
                raise ConfigError(f"keyword table: unknown command {key!r}")
            table[names[key]] = frozenset(str(w).lower() for w in words)
        return KeywordTable(table)


def parse_transcript(text: str, table: KeywordTable | None = None) -> Optional[VoiceCommand]:
    """Match one transcript line to at most one command.

    Lowercases, tokenizes on non-alphanumeric boundaries, and returns the
    highest-priority command any token maps to; None when nothing matches.
    """
    table = table or KeywordTable()
    tokens = set(_TOKEN_RE.findall(text.lower()))
    best: Optional[VoiceCommand] = None
    for cmd in VoiceCommand:  # iterates in priority order
        if tokens & table.keywords[cmd]:
            best = cmd
            break
    return best


@dataclass
class VoiceLatch:
    """Pending command effects, consumed once at the next tick boundary."""

    stop: bool = False
    retreat: bool = False
    start: bool = False

    def take(self) -> "VoiceLatch":
        taken = VoiceLatch(self.stop, self.retreat, self.start)
        self.stop = self.retreat = self.start = False
        return taken

    def any(self) -> bool:
        return self.stop or self.retreat or self.start


@dataclass(frozen=True)
class DispatchEffect:
    """What a dispatched command latched (for the event log)."""

    command: VoiceCommand
    latched: str


def dispatch(cmd: VoiceCommand, latch: VoiceLatch) -> DispatchEffect:
    """Latch a parsed command's effect for the next tick.

    Stop implies the face-touch retreat as well: the emergency stop both
    zeroes routed motion and cancels any autonomy in flight.
    """
    if cmd is VoiceCommand.STOP:
        latch.stop = True
        latch.retreat = True
        return DispatchEffect(cmd, "stop")
    if cmd is VoiceCommand.RETREAT_FACE_TOUCH:
        latch.retreat = True
        return DispatchEffect(cmd, "retreat")
    latch.start = True
    return DispatchEffect(cmd, "start")
