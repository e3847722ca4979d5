"""Teleop server tests: roles, tick-boundary input, failsafe, error
handling, and served-session replay parity.  All tests run a real
WebSocket server on an ephemeral port inside asyncio.run."""

import asyncio
import json

import pytest
from websockets.asyncio.client import connect

from quadassist.cli import replay_log
from quadassist.scenario import load_scenario
from quadassist.server import TeleopServer

DT = 0.01


def server_doc(duration=40000):
    return {
        "name": "served", "dt": DT, "seed": 5, "duration_ticks": duration,
        "world": {
            "base_start": {"x": 0.0, "y": 0.0, "yaw": 0.0},
            "arm_start": "front",
            "fixtures": {
                "scarf": {"kind": "scarf", "position": [5.0, 5.0, 0.7]},
                "rail": {"kind": "rail", "center": [6.0, 5.0, 1.0]},
            },
        },
        "tasks": [{"id": "scarf", "type": "scarf",
                   "fixtures": ["scarf", "rail"]}],
    }


async def start_server(**kw):
    server = TeleopServer(load_scenario(server_doc()), port=0, **kw)
    task = asyncio.create_task(server.run())
    await asyncio.wait_for(server.wait_started(), 5)
    return server, task


async def recv_msg(ws):
    return json.loads(await asyncio.wait_for(ws.recv(), 5))


async def recv_until(ws, pred, limit=500):
    for _ in range(limit):
        msg = await recv_msg(ws)
        if pred(msg):
            return msg
    raise AssertionError("expected message never arrived")


async def stop_and_join(server, task):
    server.stop()
    await asyncio.wait_for(task, 10)


def frame_msg(h=0.0, v=0.0, ch=("n", "n", "n", "n"), btn=False):
    return json.dumps({"type": "frame", "h": h, "v": v,
                       "ch": list(ch), "btn": btn})


class TestSessions:
    def test_config_and_roles(self):
        async def scenario():
            server, task = await start_server()
            uri = f"ws://127.0.0.1:{server.port}"
            async with connect(uri) as pilot, connect(uri) as viewer:
                cfg_p = await recv_msg(pilot)
                cfg_v = await recv_msg(viewer)
                assert cfg_p["type"] == cfg_v["type"] == "config"
                assert cfg_p["protocol"] == 1
                assert cfg_p["role"] == "pilot"
                assert cfg_v["role"] == "spectator"
                assert cfg_p["scenario"] == "served"
                assert cfg_p["scenario_digest"] == server.scenario.digest
                assert cfg_p["dt"] == DT
                assert cfg_p["snapshot_interval_ticks"] == 3
            await stop_and_join(server, task)

        asyncio.run(scenario())

    def test_pilot_frame_drives_world_snapshots_increase(self):
        async def scenario():
            server, task = await start_server()
            async with connect(f"ws://127.0.0.1:{server.port}") as pilot:
                await recv_msg(pilot)  # config
                await pilot.send(frame_msg(v=1.0))
                msg = await recv_until(
                    pilot, lambda m: m["type"] == "state"
                    and m["snapshot"]["base"]["y"] > 0.01)
                assert msg["failsafe"] is False
                ticks = [msg["tick"]]
                for _ in range(5):
                    m = await recv_until(pilot, lambda m: m["type"] == "state")
                    ticks.append(m["tick"])
                assert all(b > a for a, b in zip(ticks, ticks[1:]))
            await stop_and_join(server, task)
            assert server.world.base.y > 0.0

        asyncio.run(scenario())

    def test_spectator_input_rejected(self):
        async def scenario():
            server, task = await start_server()
            uri = f"ws://127.0.0.1:{server.port}"
            async with connect(uri) as pilot, connect(uri) as viewer:
                await recv_msg(pilot)
                await recv_msg(viewer)
                await viewer.send(frame_msg(v=1.0))
                err = await recv_until(viewer, lambda m: m["type"] == "error")
                assert "only the pilot" in err["message"]
                await viewer.send(json.dumps({"type": "transcript",
                                              "text": "stop"}))
                err = await recv_until(viewer, lambda m: m["type"] == "error")
                assert "only the pilot" in err["message"]
            await stop_and_join(server, task)
            assert all(e.kind != "voice" for e in server.world.log.events)

        asyncio.run(scenario())

    def test_malformed_messages_answered_session_continues(self):
        async def scenario():
            server, task = await start_server()
            async with connect(f"ws://127.0.0.1:{server.port}") as pilot:
                await recv_msg(pilot)
                await pilot.send("this is not json")
                err = await recv_until(pilot, lambda m: m["type"] == "error")
                assert "invalid JSON" in err["message"]
                await pilot.send(json.dumps({"type": "mystery"}))
                err = await recv_until(pilot, lambda m: m["type"] == "error")
                assert "unknown message type" in err["message"]
                await pilot.send(json.dumps({"type": "frame", "h": "wide",
                                             "v": 0, "ch": ["n"] * 4,
                                             "btn": False}))
                err = await recv_until(pilot, lambda m: m["type"] == "error")
                assert err["message"].startswith("frame:")
                # the session survived all three: a valid frame still works
                await pilot.send(frame_msg(v=1.0))
                await recv_until(
                    pilot, lambda m: m["type"] == "state"
                    and m["snapshot"]["base"]["y"] > 0.0)
            await stop_and_join(server, task)

        asyncio.run(scenario())

    def test_frame_gap_failsafe_synthesizes_neutral(self):
        async def scenario():
            server, task = await start_server()
            async with connect(f"ws://127.0.0.1:{server.port}") as pilot:
                await recv_msg(pilot)
                await pilot.send(frame_msg(v=1.0))
                # wait until the gap elapses and the failsafe reports active
                msg = await recv_until(
                    pilot, lambda m: m["type"] == "state" and m["failsafe"])
                assert msg["failsafe"] is True
                # commands decayed: base slews to rest shortly after the gap
                await recv_until(
                    pilot, lambda m: m["type"] == "state"
                    and abs(m["snapshot"]["base"]["vy"]) < 1e-9)
                # resuming input clears the failsafe
                await pilot.send(frame_msg(v=-1.0))
                msg = await recv_until(
                    pilot, lambda m: m["type"] == "state"
                    and m["snapshot"]["base"]["vy"] < -0.01)
                assert msg["failsafe"] is False
            await stop_and_join(server, task)
            inputs = [e for e in server.world.log.events if e.kind == "input"]
            runs = []
            start = prev = None
            for e in inputs:
                if prev is None or e.tick != prev + 1:
                    if start is not None:
                        runs.append((start, prev))
                    start = e.tick
                prev = e.tick
            runs.append((start, prev))
            # first contiguous run: the held v=1 frame, cut off by the gap
            first_len = runs[0][1] - runs[0][0] + 1
            assert first_len == server.gap_ticks + 1
            assert len(runs) >= 2  # input resumed after the failsafe

        asyncio.run(scenario())

    def test_transcript_routes_voice(self):
        async def scenario():
            server, task = await start_server()
            async with connect(f"ws://127.0.0.1:{server.port}") as pilot:
                await recv_msg(pilot)
                await pilot.send(json.dumps({"type": "transcript",
                                             "text": "robot stop please"}))
                evt = await recv_until(pilot, lambda m: m["type"] == "event"
                                       and m["kind"] == "voice")
                assert evt["payload"]["command"] == "STOP"
            await stop_and_join(server, task)

        asyncio.run(scenario())

    def test_served_log_replays_headless(self):
        async def scenario():
            server, task = await start_server()
            async with connect(f"ws://127.0.0.1:{server.port}") as pilot:
                await recv_msg(pilot)
                await pilot.send(frame_msg(v=1.0))
                await recv_until(pilot, lambda m: m["type"] == "state"
                                 and m["snapshot"]["base"]["y"] > 0.02)
                await pilot.send(frame_msg(h=1.0))
                await pilot.send(json.dumps({"type": "transcript",
                                             "text": "stop"}))
                await recv_until(pilot, lambda m: m["type"] == "event"
                                 and m["kind"] == "voice")
            await stop_and_join(server, task)
            return server

        server = asyncio.run(scenario())
        world = server.world
        assert any(e.kind == "input" for e in world.log.events)
        digest = world.log.finish(world.tick)
        from quadassist.events import EventLog
        ref = EventLog.load(world.log.dumps())
        replayed = replay_log(world.scenario, ref)
        assert replayed.log.finish(replayed.tick) == digest

    def test_session_end_broadcast_at_budget(self):
        async def scenario():
            server = TeleopServer(load_scenario(server_doc(duration=50)),
                                  port=0)
            task = asyncio.create_task(server.run())
            await asyncio.wait_for(server.wait_started(), 5)
            async with connect(f"ws://127.0.0.1:{server.port}") as client:
                await recv_msg(client)
                msg = await recv_until(client, lambda m: m["type"] == "event"
                                       and m["kind"] == "session_end")
                assert msg["tick"] == 50
            await asyncio.wait_for(task, 10)
            assert server.world.tick == 50

        asyncio.run(scenario())
