"""Command-line runner: headless course runs, record/replay, serving.

Default run drives the bundled scripted pilot over the selected course
and prints the score with its locomotion/manipulation time split.  A
recorded run log (JSONL, digest-chained) can be replayed open-loop; the
replay re-simulates from the logged inputs and must land on the recorded
digest bit for bit, which is the record/replay equality check.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

from quadassist.autopilot import run_course
from quadassist.errors import QuadAssistError, ReplayError
from quadassist.events import EventLog, score_run
from quadassist.quadstick import BreathChannelState, QuadstickFrame
from quadassist.scenario import Scenario, load_scenario
from quadassist.world import World

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_SCENARIO = "cybathlon_feb2024"


def resolve_scenario_path(name_or_path: str) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = DATA_DIR / f"{name_or_path}.json"
    if bundled.exists():
        return bundled
    raise ReplayError(f"scenario not found: {name_or_path} "
                      f"(no such file, and no bundled course of that name)")


def load_with_overrides(name_or_path: str, seed: Optional[int] = None,
                        dt: Optional[float] = None) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    raw = json.loads(path.read_text())
    if seed is not None:
        raw["seed"] = seed
    if dt is not None:
        raw["dt"] = dt
    return load_scenario(raw)


def replay_log(scenario: Scenario, ref: EventLog,
               log: Optional[EventLog] = None) -> World:
    """Re-simulate a recorded run from its logged input events."""
    if ref.header["scenario_digest"] != scenario.digest:
        raise ReplayError(
            "scenario digest mismatch: log was recorded on "
            f"{ref.header['scenario_digest'][:12]}…, this course is "
            f"{scenario.digest[:12]}…")
    world = World(scenario, log)
    inputs = {e.tick: e.payload for e in ref.events if e.kind == "input"}
    end_tick = ref.events[-1].tick if ref.events else 0
    for tick in range(end_tick):
        p = inputs.get(tick)
        if p is None:
            world.step()
        else:
            frame = QuadstickFrame(
                p["h"], p["v"],
                tuple(BreathChannelState(c) for c in p["ch"]),
                p["btn"], tick * scenario.dt)
            world.step(frame, p["transcripts"])
    return world


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quadassist",
        description="Assistance-course simulator: run, record, replay, serve.")
    p.add_argument("--scenario", default=DEFAULT_SCENARIO,
                   help="course file path or bundled course name "
                        f"(default: {DEFAULT_SCENARIO})")
    p.add_argument("--script", help="timed input schedule (JSON) to play "
                                    "instead of the built-in course pilot")
    p.add_argument("--replay", metavar="LOG",
                   help="re-run a recorded log and compare digests")
    p.add_argument("--record", metavar="LOG",
                   help="write the run log (JSONL) to this path")
    p.add_argument("--serve", action="store_true",
                   help="serve the session over WebSocket instead of "
                        "running the scripted pilot")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--snapshot-hz", type=float, default=30.0)
    p.add_argument("--seed", type=int, help="override the course seed")
    p.add_argument("--dt", type=float, help="override the course tick length")
    p.add_argument("--max-ticks", type=int)
    return p


def _finish_and_report(world: World, record: Optional[str]) -> None:
    digest = world.log.finish(world.tick)
    if record:
        world.log.write(record)
    score = score_run(world.log, max_points=world.scenario.max_points)
    print(score.summary())
    print(f"log digest: {digest}")
    if record:
        print(f"recorded: {record}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_with_overrides(args.scenario, args.seed, args.dt)
        if args.replay:
            ref = EventLog.load(args.replay)
            world = replay_log(scenario, ref)
            digest = world.log.finish(world.tick)
            print(f"recorded digest: {ref.digest()}")
            print(f"replayed digest: {digest}")
            if ref.truncated or not ref.events or ref.events[-1].kind != "end":
                print("log is unsealed or truncated; replayed the intact prefix")
                return 0
            if digest != ref.digest():
                print("MISMATCH: replay diverged from the recording")
                return 1
            print("digests match")
            return 0
        if args.serve:
            from quadassist.server import TeleopServer
            server = TeleopServer(scenario, args.host, args.port,
                                  args.snapshot_hz, realtime=True,
                                  max_ticks=args.max_ticks, announce=True)
            try:
                asyncio.run(server.run())
            except KeyboardInterrupt:
                pass
            if args.record:
                server.world.log.finish(server.world.tick)
                server.world.log.write(args.record)
                print(f"recorded: {args.record}")
            return 0
        if args.script:
            from quadassist.script import PilotScript
            world = World(scenario)
            PilotScript.load(args.script).play(
                world, ticks=args.max_ticks)
        else:
            world = run_course(scenario, max_ticks=args.max_ticks)
        _finish_and_report(world, args.record)
        return 0
    except QuadAssistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
