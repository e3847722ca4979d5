"""Deterministic scripted pilot for full course runs.

The autopilot plays the role of a trained sip-and-puff pilot: each tick
it reads robot-side telemetry from the simulation (base pose, tool pose,
gripper, fixture states, autonomy status) and emits exactly one input
frame plus optional voice transcripts.  It drives only through the same
device channels a human would: joystick axes shaped by the deadzone,
breath channels, push button, and the three voice keywords.

Policies are plain generators; the station scripts compose a handful of
primitives (base parking, tool servoing with a bang-bang third axis,
grip/release, door-arc sweeps).  All decisions are pure functions of
world state, so a run is reproducible bit for bit and its recorded input
trace replays to the same digest.
"""

from __future__ import annotations

import math
from typing import Iterator, Optional, Sequence

import numpy as np

from quadassist.errors import ContractError
from quadassist.events import EventLog
from quadassist.facetouch import FaceTouchState
from quadassist.kinematics import RobotConfiguration, forward_kinematics
from quadassist.quadstick import (
    BreathChannelState,
    NEUTRAL_CHANNELS,
    QuadstickFrame,
)
from quadassist.router import ControlMode, initial_configuration
from quadassist.scenario import Scenario, load_scenario
from quadassist.world import GRASP_WIDTH, RELEASE_WIDTH, World

Step = tuple[QuadstickFrame, list[str]]

_B = BreathChannelState

# Conservative per-primitive tick budgets; a clean course never hits them.
PARK_TICKS = 4000
SERVO_TICKS = 6000
GRIP_TICKS = 120
PIPELINE_TICKS = 6000


class PilotError(RuntimeError):
    """A station script could not make progress (bad course or regression)."""


class Autopilot:
    def __init__(self, world: World):
        self.w = world
        front = RobotConfiguration(arm_q=initial_configuration(ControlMode.EE_FRONT))
        self.reach = forward_kinematics(front, world.model).position
        self._gen: Iterator[Step] = self._run()
        self.finished = False

    def next(self, tick: int) -> Step:
        """One input frame (stamped at tick time) plus transcripts."""
        if not self.finished:
            try:
                frame, transcripts = next(self._gen)
                return (
                    QuadstickFrame(frame.joystick_h, frame.joystick_v,
                                   frame.channels, frame.push_button,
                                   tick * self.w.dt),
                    transcripts,
                )
            except StopIteration:
                self.finished = True
        return (QuadstickFrame(0.0, 0.0, NEUTRAL_CHANNELS, False,
                               tick * self.w.dt), [])

    # --- frame building ---

    def _shape(self, a: float) -> float:
        """Joystick value whose deadzone-shaped output is ``a``."""
        if a == 0.0:
            return 0.0
        dz = self.w.scenario.deadzone
        return math.copysign(dz + min(abs(a), 1.0) * (1.0 - dz), a)

    @staticmethod
    def _frame(h=0.0, v=0.0, ch0=_B.NEUTRAL, ch1=_B.NEUTRAL,
               ch2=_B.NEUTRAL, ch3=_B.NEUTRAL, btn=False) -> QuadstickFrame:
        return QuadstickFrame(h, v, (ch0, ch1, ch2, ch3), btn, 0.0)

    def _axes(self, ax: float, ay: float, ch1=_B.NEUTRAL,
              ch2=_B.NEUTRAL) -> QuadstickFrame:
        return self._frame(self._shape(ax), self._shape(ay), ch1=ch1, ch2=ch2)

    # --- primitives ---

    def _idle(self, n: int) -> Iterator[Step]:
        for _ in range(n):
            yield self._frame(), []

    def _say(self, text: str) -> Iterator[Step]:
        yield self._frame(), [text]

    def _enter_base(self) -> Iterator[Step]:
        yield self._frame(), []  # clean edge: previous channel-0 sample neutral
        yield self._frame(ch0=_B.BLOW), []
        yield self._frame(), []

    def _enter_ee(self) -> Iterator[Step]:
        yield self._frame(), []
        yield self._frame(ch0=_B.SUCK), []
        yield self._frame(), []

    def _body_error(self, target_xy: np.ndarray) -> np.ndarray:
        """World-frame position error rotated into the base frame."""
        e = target_xy - np.array([self.w.base.x, self.w.base.y])
        c, s = math.cos(self.w.base.yaw), math.sin(self.w.base.yaw)
        return np.array([c * e[0] + s * e[1], -s * e[0] + c * e[1]])

    def _park_base(self, x: float, y: float, tol: float = 0.004) -> Iterator[Step]:
        target = np.array([x, y])
        for _ in range(PARK_TICKS):
            e = self._body_error(target)
            if float(np.linalg.norm(e)) < tol and self.w.base.speed < 0.005:
                return
            # braking-curve fractions keep the velocity slew from overshooting
            ax = float(np.clip(e[0] / 0.3, -1.0, 1.0))
            ay = float(np.clip(e[1] / 0.3, -1.0, 1.0))
            yield self._axes(ax, ay), []
        raise PilotError(f"base parking at {target} stalled")

    def _ee_goto(self, target, tol: float = 0.005, tol_z: float = 0.006,
                 ch2=_B.NEUTRAL) -> Iterator[Step]:
        """Servo the tool point; xy proportional, z tri-state with hysteresis."""
        target = np.asarray(target, dtype=float)
        z_live = False
        for _ in range(SERVO_TICKS):
            e = target - self.w.ee_pose.position
            ez = float(e[2])
            if z_live and abs(ez) < 0.004:
                z_live = False
            elif not z_live and abs(ez) > max(tol_z, 0.012):
                z_live = True
            c, s = math.cos(self.w.base.yaw), math.sin(self.w.base.yaw)
            exy = np.array([c * e[0] + s * e[1], -s * e[0] + c * e[1]])
            if (float(np.hypot(e[0], e[1])) < tol
                    and abs(ez) < tol_z and not z_live):
                return
            ax = float(np.clip(exy[0] / 0.05, -1.0, 1.0))
            ay = float(np.clip(exy[1] / 0.05, -1.0, 1.0))
            ch1 = _B.NEUTRAL
            if z_live:
                ch1 = _B.BLOW if ez > 0 else _B.SUCK
            yield self._axes(ax, ay, ch1=ch1, ch2=ch2), []
        raise PilotError(f"tool servo to {target} stalled at "
                         f"{self.w.ee_pose.position}")

    def _close_until(self, done, what: str) -> Iterator[Step]:
        for _ in range(GRIP_TICKS):
            if done():
                return
            yield self._frame(ch2=_B.SUCK), []
        raise PilotError(f"grip failed: {what}")

    def _open_until_released(self) -> Iterator[Step]:
        while self.w.gripper_width < RELEASE_WIDTH + 0.005:
            yield self._frame(ch2=_B.BLOW), []
        yield self._frame(), []

    def _park_for(self, point, stand_off_y: float = 0.0) -> Iterator[Step]:
        """Enter base mode and park so the front preset lands near ``point``."""
        yield from self._enter_base()
        c, s = math.cos(self.w.base.yaw), math.sin(self.w.base.yaw)
        dx = c * self.reach[0]
        dy = s * self.reach[0]
        yield from self._park_base(point[0] - dx, point[1] - dy + stand_off_y)
        yield from self._enter_ee()

    # --- door sweeps ---

    def _swing_mailbox(self, name: str, target_deg: float) -> Iterator[Step]:
        fx = self.w.scenario.fixtures[name]
        hinge = np.asarray(fx["position"])
        d = np.asarray(fx["door_dir"])
        width = fx["door_width"]
        while math.degrees(self.w.doors[name]["angle"]) < target_deg:
            if not self.w.doors[name]["grasped"]:
                raise PilotError(f"{name}: lost the door handle mid-swing")
            ang = self.w.doors[name]["angle"] + math.radians(18.0)
            ang = min(ang, math.radians(target_deg + 4.0))
            c, s = math.cos(ang), math.sin(ang)
            swung = np.array([c * d[0] - s * d[1], s * d[0] + c * d[1], d[2]])
            wp = hinge + width * swung
            yield from self._ee_goto(wp, tol=0.012, ch2=_B.NEUTRAL)

    def _swing_dishwasher(self, name: str, target_deg: float) -> Iterator[Step]:
        fx = self.w.scenario.fixtures[name]
        hinge = np.asarray(fx["position"])
        d = np.asarray(fx["door_dir"])
        up = np.array([0.0, 0.0, 1.0])
        length = fx["door_length"]
        while math.degrees(self.w.dishwashers[name]["angle"]) < target_deg:
            if not self.w.dishwashers[name]["door_grasped"]:
                raise PilotError(f"{name}: lost the door handle mid-swing")
            ang = self.w.dishwashers[name]["angle"] + math.radians(20.0)
            ang = min(ang, math.radians(target_deg + 3.0))
            wp = hinge + length * (math.sin(ang) * d + math.cos(ang) * up)
            yield from self._ee_goto(wp, tol=0.012)

    # --- station scripts ---

    def _require(self, task_id: str, subgoal: str) -> None:
        if (task_id, subgoal) not in self.w.subgoal_ticks:
            raise PilotError(f"{task_id}: subgoal {subgoal} did not latch")

    def _task_mailbox(self, task_id: str, box: str, table: str) -> Iterator[Step]:
        fx = self.w.scenario.fixtures[box]
        handle0 = self.w._mailbox_handle(box)
        yield from self._park_for(handle0)
        yield from self._ee_goto(handle0)
        yield from self._close_until(lambda: self.w.doors[box]["grasped"],
                                     f"{box} handle")
        yield from self._swing_mailbox(box, fx["open_angle_deg"] + 4.0)
        yield from self._open_until_released()
        self._require(task_id, "door_open")

        pkg = f"package@{box}"
        yield from self._ee_goto(self.w.objects[pkg])
        yield from self._close_until(lambda: self.w.held == pkg, pkg)
        region = self.w.scenario.fixtures[table]
        drop = np.asarray(region["center"]) + [
            0.0, 0.0, 0.4 * region["half_extents"][2]]
        yield from self._ee_goto(drop, tol=0.008)
        yield from self._open_until_released()
        yield from self._idle(2)
        self._require(task_id, "package_on_table")

    def _task_toothbrush(self, task_id: str, brush: str, cup: str) -> Iterator[Step]:
        brush_pos = self.w.objects[brush]
        yield from self._park_for(brush_pos)
        yield from self._ee_goto(brush_pos)
        yield from self._close_until(lambda: self.w.held == brush, brush)
        yield from self._say("start")
        for _ in range(PIPELINE_TICKS):
            if self.w.pipeline.state in (FaceTouchState.DONE,
                                         FaceTouchState.ABORTED):
                break
            yield self._frame(), []
        if not (self.w.pipeline.state is FaceTouchState.DONE
                and self.w.pipeline.touch_success):
            raise PilotError(f"face touch ended {self.w.pipeline.state.value}: "
                             f"{self.w.pipeline.abort_reason}")
        self._require(task_id, "brush_touch")
        cup_fx = self.w.scenario.fixtures[cup]
        yield from self._ee_goto(np.asarray(cup_fx["position"]) + [0, 0, 0.05])
        yield from self._open_until_released()
        yield from self._idle(2)
        self._require(task_id, "brush_in_cup")

    def _task_scarf(self, task_id: str, scarf: str, rail: str) -> Iterator[Step]:
        scarf_pos = self.w.objects[scarf]
        yield from self._park_for(scarf_pos)
        yield from self._ee_goto(scarf_pos)
        yield from self._close_until(lambda: self.w.held == scarf, scarf)
        fx = self.w.scenario.fixtures[rail]
        center = np.asarray(fx["center"])
        axis = np.asarray(fx["dir"])
        half = 0.5 * fx["length"]
        t = float(np.clip((scarf_pos - center) @ axis, -half, half))
        drape = center + t * axis + [0.0, 0.0, 0.02]
        yield from self._ee_goto(drape, tol=0.008)
        yield from self._open_until_released()
        yield from self._idle(2)
        self._require(task_id, "scarf_over_rail")

    def _task_dishwasher(self, task_id: str, dw: str, counter: str) -> Iterator[Step]:
        fx = self.w.scenario.fixtures[dw]
        handle0 = self.w._dw_handle(dw)
        yield from self._park_for(handle0)
        yield from self._ee_goto(handle0)
        yield from self._close_until(
            lambda: self.w.dishwashers[dw]["door_grasped"], f"{dw} door")
        # swing past the latch angle for clearance over the rack pull line
        yield from self._swing_dishwasher(dw, max(fx["open_angle_deg"] + 4.0, 90.0))
        yield from self._open_until_released()
        self._require(task_id, "door_open")

        rack0 = self.w._rack_handle(dw)
        yield from self._ee_goto(rack0)
        yield from self._close_until(
            lambda: self.w.dishwashers[dw]["rack_grasped"], f"{dw} rack")
        pull = rack0 + (fx["rack_travel"] + 0.005) * np.asarray(fx["rack_dir"])
        yield from self._ee_goto(pull, tol=0.008)
        yield from self._open_until_released()
        self._require(task_id, "rack_out")

        plate = f"plate@{dw}"
        yield from self._ee_goto(self.w.objects[plate])
        yield from self._close_until(lambda: self.w.held == plate, plate)
        region = self.w.scenario.fixtures[counter]
        drop = np.asarray(region["center"]) + [
            0.0, 0.0, 0.4 * region["half_extents"][2]]
        yield from self._ee_goto(drop, tol=0.008)
        yield from self._open_until_released()
        yield from self._idle(2)
        self._require(task_id, "plate_on_counter")

    _TASK_SCRIPTS = {
        "mailbox_package": _task_mailbox,
        "toothbrush": _task_toothbrush,
        "scarf": _task_scarf,
        "dishwasher": _task_dishwasher,
    }

    def _run(self) -> Iterator[Step]:
        for task in self.w.scenario.tasks:
            script = self._TASK_SCRIPTS[task.type]
            yield from script(self, task.id, *task.fixtures)
        yield from self._idle(3)


def run_course(scenario: Scenario | str, log: Optional[EventLog] = None,
               max_ticks: Optional[int] = None) -> World:
    """Run the scripted pilot on a course until done (or the tick budget)."""
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    world = World(scenario, log)
    pilot = Autopilot(world)
    budget = max_ticks if max_ticks is not None else scenario.duration_ticks
    while world.tick < budget:
        frame, transcripts = pilot.next(world.tick)
        world.step(frame, transcripts)
        if pilot.finished and world.all_tasks_complete():
            break
    return world
