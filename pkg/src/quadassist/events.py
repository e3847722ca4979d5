"""Append-only run log with a tamper-evident digest chain, plus scoring.

One run produces one JSONL stream: a header line (schema version, scenario
digest, seed, dt), then event lines {t, tick, kind, payload} in tick order.
Every event folds into a running sha256 chain; checkpoint events written
every ~100 ticks record the chain value, so any edit to an earlier line is
detectable when the file is read back (the recomputed chain stops matching
the stored checkpoints).  Bit-identical runs therefore produce identical
final digests, which is what record/replay equality asserts.

Scoring reads per-tick activity flags from "tick" events: a tick is
locomotion (base mode with nonzero commanded base twist), manipulation
(arm mode or active autonomy with nonzero commanded motion), or idle.
The three counts sum to the total tick count exactly.
"""

from __future__ import annotations

import hashlib
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from quadassist.errors import ReplayError, ScoringError

LOG_VERSION = 1
CHECKPOINT_EVERY = 100  # ticks between digest checkpoints


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, no whitespace, no NaN."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class Event:
    t: float
    tick: int
    kind: str
    payload: dict


class EventLog:
    """Run log builder.  Events must arrive in non-decreasing tick order."""

    def __init__(self, scenario_digest: str, seed: int, dt: float,
                 version: int = LOG_VERSION, meta: Optional[dict] = None):
        if dt <= 0.0:
            raise ScoringError("dt must be > 0")
        self.header = {
            "version": version,
            "scenario_digest": scenario_digest,
            "seed": int(seed),
            "dt": float(dt),
        }
        if meta:
            self.header["meta"] = meta
        self.events: list[Event] = []
        self.truncated = False
        self._chain = hashlib.sha256(canonical_json(self.header).encode()).hexdigest()
        self._last_tick = -1
        self._next_checkpoint = CHECKPOINT_EVERY

    @property
    def dt(self) -> float:
        return self.header["dt"]

    def digest(self) -> str:
        return self._chain

    def _fold(self, line: str) -> None:
        self._chain = hashlib.sha256((self._chain + line).encode()).hexdigest()

    def append(self, tick: int, kind: str, payload: dict) -> Event:
        if not isinstance(tick, int) or tick < 0:
            raise ScoringError(f"bad event tick: {tick!r}")
        if tick < self._last_tick:
            raise ScoringError(f"event tick {tick} precedes tick {self._last_tick}")
        if not kind or not isinstance(kind, str):
            raise ScoringError(f"bad event kind: {kind!r}")
        while tick >= self._next_checkpoint:
            # Emit due checkpoints before any event of a later tick so each
            # checkpoint always summarizes a closed prefix.
            self._write_checkpoint(self._next_checkpoint)
        event = Event(t=tick * self.dt, tick=tick, kind=kind, payload=dict(payload))
        line = canonical_json(self._event_obj(event))
        self._fold(line)
        self.events.append(event)
        self._last_tick = tick
        return event

    def _write_checkpoint(self, at_tick: int) -> None:
        event = Event(t=at_tick * self.dt, tick=at_tick, kind="checkpoint",
                      payload={"digest": self._chain})
        self._fold(canonical_json(self._event_obj(event)))
        self.events.append(event)
        self._next_checkpoint = at_tick + CHECKPOINT_EVERY

    @staticmethod
    def _event_obj(event: Event) -> dict:
        return {"t": event.t, "tick": event.tick, "kind": event.kind,
                "payload": event.payload}

    def finish(self, tick: int) -> str:
        """Seal the log with a final checkpoint and return the run digest."""
        event = Event(t=tick * self.dt, tick=tick, kind="end",
                      payload={"digest": self._chain})
        self._fold(canonical_json(self._event_obj(event)))
        self.events.append(event)
        return self._chain

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(canonical_json(self.header) + "\n")
        for event in self.events:
            out.write(canonical_json(self._event_obj(event)) + "\n")
        return out.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path_or_text: str | Path, verify: bool = True) -> "EventLog":
        """Parse a JSONL run log, recompute the chain, check checkpoints.

        A truncated final line is dropped with a warning (the intact prefix
        is still usable); a checkpoint whose stored digest disagrees with
        the recomputed chain means the file was edited and raises
        ReplayError, as does a schema version mismatch.
        """
        if isinstance(path_or_text, Path) or "\n" not in str(path_or_text):
            text = Path(path_or_text).read_text()
        else:
            text = str(path_or_text)
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ReplayError("empty run log")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise ReplayError(f"unreadable log header: {exc}") from exc
        if not isinstance(header, dict) or "version" not in header:
            raise ReplayError("log header missing version")
        if header["version"] != LOG_VERSION:
            raise ReplayError(
                f"log version {header['version']} does not match "
                f"supported version {LOG_VERSION}; refusing to replay")
        for key in ("scenario_digest", "seed", "dt"):
            if key not in header:
                raise ReplayError(f"log header missing {key!r}")
        log = cls(header["scenario_digest"], header["seed"], header["dt"],
                  version=header["version"], meta=header.get("meta"))
        truncated = False
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                if lineno == len(lines):
                    truncated = True
                    warnings.warn(
                        f"run log truncated mid-line at line {lineno}; "
                        "replaying the intact prefix", stacklevel=2)
                    break
                raise ReplayError(f"corrupt log line {lineno}") from None
            try:
                event = Event(t=obj["t"], tick=obj["tick"], kind=obj["kind"],
                              payload=obj["payload"])
            except (KeyError, TypeError) as exc:
                raise ReplayError(f"malformed event at line {lineno}: {exc}") from exc
            if verify and event.kind in ("checkpoint", "end"):
                if event.payload.get("digest") != log._chain:
                    raise ReplayError(
                        f"digest mismatch at tick {event.tick} (line {lineno}): "
                        "log was edited or produced by a diverging run")
            log._fold(canonical_json(cls._event_obj(event)))
            log.events.append(event)
            log._last_tick = max(log._last_tick, event.tick)
            if event.kind == "checkpoint":
                log._next_checkpoint = event.tick + CHECKPOINT_EVERY
        log.truncated = truncated
        return log


# --- scoring ---


@dataclass
class TaskResult:
    task: str
    subgoals: list[str] = field(default_factory=list)
    points: int = 0
    completed_tick: Optional[int] = None


@dataclass
class RaceScore:
    points: int
    max_points: Optional[int]
    locomotion_ticks: int
    manipulation_ticks: int
    idle_ticks: int
    total_ticks: int  # exactly locomotion + manipulation + idle
    dt: float
    tasks: list[TaskResult]

    @property
    def locomotion_time(self) -> float:
        return self.locomotion_ticks * self.dt

    @property
    def manipulation_time(self) -> float:
        return self.manipulation_ticks * self.dt

    @property
    def idle_time(self) -> float:
        return self.idle_ticks * self.dt

    @property
    def total_time(self) -> float:
        return self.total_ticks * self.dt

    def summary(self) -> str:
        cap = f"/{self.max_points}" if self.max_points is not None else ""
        lines = [
            f"score: {self.points}{cap} points in {self.total_time:.2f} s",
            f"  locomotion:   {self.locomotion_time:8.2f} s",
            f"  manipulation: {self.manipulation_time:8.2f} s",
            f"  idle:         {self.idle_time:8.2f} s",
        ]
        if self.total_ticks > 0:
            moving = 100.0 * self.locomotion_ticks / self.total_ticks
            lines.append(f"  {moving:.0f} percent of the time moving")
        for tr in self.tasks:
            done = f"tick {tr.completed_tick}" if tr.completed_tick is not None else "incomplete"
            lines.append(f"  task {tr.task}: {tr.points} ({done})")
        return "\n".join(lines)


def score_run(log: EventLog, max_points: Optional[int] = None) -> RaceScore:
    """Tally points and the activity split from a run log.

    Every "tick" event carries loco/manip flags already classified by the
    simulator; this function only validates and integrates them.  Raises
    ScoringError on malformed events (both flags set, unknown shapes).
    """
    dt = log.dt
    loco = manip = total = 0
    tasks: dict[str, TaskResult] = {}
    seen_subgoals: set[tuple[str, str]] = set()
    for event in log.events:
        if event.kind == "tick":
            p = event.payload
            try:
                fl, fm = int(p["loco"]), int(p["manip"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ScoringError(f"malformed tick event at tick {event.tick}: {exc}") from exc
            if fl not in (0, 1) or fm not in (0, 1):
                raise ScoringError(f"tick flags must be 0/1 at tick {event.tick}")
            if fl and fm:
                raise ScoringError(
                    f"tick {event.tick} classified as both locomotion and manipulation")
            loco += fl
            manip += fm
            total += 1
        elif event.kind == "subgoal":
            p = event.payload
            task_id = p.get("task")
            name = p.get("subgoal")
            if not isinstance(task_id, str) or not isinstance(name, str):
                raise ScoringError(f"malformed subgoal event at tick {event.tick}")
            if (task_id, name) in seen_subgoals:
                continue
            seen_subgoals.add((task_id, name))
            tr = tasks.setdefault(task_id, TaskResult(task=task_id))
            tr.subgoals.append(name)
            tr.points += 1
        elif event.kind == "task_complete":
            task_id = event.payload.get("task")
            if not isinstance(task_id, str):
                raise ScoringError(f"malformed task_complete event at tick {event.tick}")
            tr = tasks.setdefault(task_id, TaskResult(task=task_id))
            if tr.completed_tick is None:
                tr.completed_tick = event.tick
    return RaceScore(
        points=sum(tr.points for tr in tasks.values()),
        max_points=max_points,
        locomotion_ticks=loco,
        manipulation_ticks=manip,
        idle_ticks=total - loco - manip,
        total_ticks=total,
        dt=dt,
        tasks=[tasks[k] for k in sorted(tasks)],
    )
