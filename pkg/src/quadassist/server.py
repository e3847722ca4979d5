"""WebSocket teleop bridge: one pilot, any number of spectators.

The server owns a simulation world and advances it on a fixed tick; all
session traffic is JSON text messages (see protocol.md).  The first
connection becomes the pilot (the only writer); later connections are
read-only spectators.  Input frames apply at tick boundaries: the most
recent frame received before a tick is the tick's input and repeats on
following ticks, device-style, until superseded.  If no frame arrives
for FRAME_GAP_S of simulated time the server synthesizes neutral input,
so routed commands fall to zero within one tick of the gap being
detected; pilot input resumes with the next received frame.

State snapshots are decimated from the tick rate to ``snapshot_hz``.
Snapshot ticks are strictly increasing.  A malformed or unauthorized
message earns the sender an error message; the session itself continues.

The served world is the same input-deterministic simulation the headless
runner uses, and the run log records every applied non-neutral input, so
replaying a served session's log offline reproduces its digest exactly.
"""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from quadassist.errors import DecodeError
from quadassist.events import EventLog
from quadassist.quadstick import QuadstickFrame, decode_frame
from quadassist.scenario import Scenario
from quadassist.world import World

PROTOCOL_VERSION = 1
FRAME_GAP_S = 0.25  # simulated seconds of pilot silence before failsafe

# world log kinds mirrored to clients as event messages
_FORWARDED = {"mode", "mapping", "voice", "autonomy", "grasp", "release",
              "subgoal", "task_complete", "self_collision"}


class TeleopServer:
    def __init__(self, scenario: Scenario, host: str = "127.0.0.1",
                 port: int = 0, snapshot_hz: float = 30.0,
                 realtime: bool = False, max_ticks: Optional[int] = None,
                 log: Optional[EventLog] = None, announce: bool = False):
        if snapshot_hz <= 0.0:
            raise ValueError("snapshot_hz must be > 0")
        self.scenario = scenario
        self.world = World(scenario, log)
        self.host = host
        self.port = port
        self.announce = announce
        self.realtime = realtime
        self.max_ticks = max_ticks if max_ticks is not None else scenario.duration_ticks
        self.snapshot_interval = max(1, round((1.0 / scenario.dt) / snapshot_hz))
        self.gap_ticks = max(1, round(FRAME_GAP_S / scenario.dt))

        self._pilot = None
        self._clients: set = set()
        self._latest_report: Optional[dict] = None
        self._held_frame: Optional[QuadstickFrame] = None
        self._held_since = 0
        self._failsafe = False
        self._transcripts: list[str] = []
        self._forwarded_upto = 0
        self._stop = asyncio.Event()
        self._started = asyncio.Event()

    # --- lifecycle ---

    async def run(self) -> None:
        async with serve(self._handler, self.host, self.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            if self.announce:
                # clients started with --port 0 learn the bound port here
                print(f"listening on ws://{self.host}:{self.port}", flush=True)
            self._started.set()
            try:
                await self._sim_loop()
            finally:
                await self._broadcast({"type": "event", "tick": self.world.tick,
                                       "kind": "session_end", "payload": {}})
                for ws in list(self._clients):
                    await ws.close()

    def stop(self) -> None:
        self._stop.set()

    async def wait_started(self) -> None:
        await self._started.wait()

    # --- simulation ---

    def _next_input(self) -> Optional[QuadstickFrame]:
        tick = self.world.tick
        if self._latest_report is not None:
            report = dict(self._latest_report, t=tick * self.scenario.dt)
            self._latest_report = None
            self._held_frame = decode_frame(report)
            self._held_since = tick
            self._failsafe = False
        if self._held_frame is None:
            return None
        if (tick - self._held_since) * self.scenario.dt > FRAME_GAP_S:
            # pilot link went quiet: synthesize neutral until frames resume
            self._held_frame = None
            self._failsafe = True
            return None
        return self._held_frame

    async def _sim_loop(self) -> None:
        while not self._stop.is_set() and self.world.tick < self.max_ticks:
            frame = self._next_input()
            transcripts, self._transcripts = self._transcripts, []
            self.world.step(frame, transcripts)
            await self._forward_events()
            if self.world.tick % self.snapshot_interval == 0:
                await self._broadcast(self._state_message())
            if self.realtime:
                await asyncio.sleep(self.scenario.dt)
            else:
                await asyncio.sleep(0)

    def _state_message(self) -> dict:
        snap = self.world.snapshot()
        return {"type": "state", "protocol": PROTOCOL_VERSION,
                "tick": snap["tick"], "t": snap["t"],
                "failsafe": self._failsafe, "snapshot": snap}

    async def _forward_events(self) -> None:
        events = self.world.log.events
        new = events[self._forwarded_upto:]
        self._forwarded_upto = len(events)
        for e in new:
            if e.kind in _FORWARDED:
                await self._broadcast({"type": "event", "tick": e.tick,
                                       "kind": e.kind, "payload": e.payload})

    async def _broadcast(self, message: dict) -> None:
        if not self._clients:
            return
        text = json.dumps(message)
        for ws in list(self._clients):
            try:
                await ws.send(text)
            except ConnectionClosed:
                self._drop(ws)

    # --- connections ---

    def _drop(self, ws) -> None:
        self._clients.discard(ws)
        if ws is self._pilot:
            self._pilot = None  # seat frees up for the next connection

    def _config_message(self, role: str) -> dict:
        sc = self.scenario
        return {
            "type": "config", "protocol": PROTOCOL_VERSION, "role": role,
            "scenario": sc.name, "scenario_digest": sc.digest,
            "dt": sc.dt, "snapshot_interval_ticks": self.snapshot_interval,
            "max_points": sc.max_points, "duration_ticks": sc.duration_ticks,
        }

    async def _handler(self, ws) -> None:
        role = "spectator" if self._pilot is not None else "pilot"
        if role == "pilot":
            self._pilot = ws
        self._clients.add(ws)
        try:
            await ws.send(json.dumps(self._config_message(role)))
            async for raw in ws:
                await self._on_message(ws, raw)
        except ConnectionClosed:
            pass
        finally:
            self._drop(ws)

    async def _error(self, ws, message: str) -> None:
        try:
            await ws.send(json.dumps({"type": "error", "message": message}))
        except ConnectionClosed:
            self._drop(ws)

    async def _on_message(self, ws, raw) -> None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            await self._error(ws, "invalid JSON")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            await self._error(ws, "message must be an object with a type")
            return
        kind = msg["type"]
        if kind in ("frame", "transcript") and ws is not self._pilot:
            await self._error(ws, f"{kind}: only the pilot can send input")
            return
        if kind == "frame":
            report = {k: v for k, v in msg.items() if k != "type"}
            report.setdefault("t", self.world.tick * self.scenario.dt)
            try:
                decode_frame(report)
            except DecodeError as exc:
                await self._error(ws, f"frame: {exc}")
                return
            self._latest_report = report
        elif kind == "transcript":
            text = msg.get("text")
            if not isinstance(text, str) or not text:
                await self._error(ws, "transcript: text must be a non-empty string")
                return
            self._transcripts.append(text)
        else:
            await self._error(ws, f"unknown message type {kind!r}")


async def serve_session(scenario: Scenario, host: str, port: int,
                        snapshot_hz: float = 30.0,
                        max_ticks: Optional[int] = None,
                        log: Optional[EventLog] = None) -> TeleopServer:
    """Run one real-time served session to completion; returns the server."""
    server = TeleopServer(scenario, host, port, snapshot_hz,
                          realtime=True, max_ticks=max_ticks, log=log)
    await server.run()
    return server
