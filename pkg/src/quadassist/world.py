"""Deterministic task-course simulation driving the full control stack.

One `World` owns everything a run needs: device state machines, the
control router, the whole-body controller, base locomotion, the
force-guarded autonomy pipeline, kinematic task objects, predicates, and
the event log.  `step(frame, transcripts)` advances exactly one tick
through a fixed stage order:

1. voice parse/dispatch, consume latches
2. mapping-mode update (channel 3)
3. control-mode update (channel 0 + push button)
4. axis routing (suppressed while a mapping transition is pending; a
   consumed stop latch zeroes every routed command this same tick)
5. autonomy override while the face-touch pipeline is active
6. controller step: base locomotion (arm frozen) or whole-body rates
7. kinematic object updates: grasp/release, handle-driven articulations
8. wrench from tool/face penetration (consumed by autonomy next tick)
9. task predicates, subgoal latching
10. event-log append (per-tick activity flags + state digest)

Everything is a pure function of (scenario, seed, input trace), so two
identical runs produce bit-identical log digests.

World-object conventions: the simulated mouth is a spring contact sphere
of radius FACE_RADIUS; doors and the rack are 1-DoF joints that track the
tool point while their handle is grasped; loose objects attach rigidly to
the tool (offset captured at grasp, zero drift by construction).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from quadassist import kinematics as kin
from quadassist.errors import ContractError, QuadAssistError
from quadassist.events import EventLog
from quadassist.facetouch import (
    FaceTouchPipeline,
    FaceTouchState,
    WrenchReading,
    acquire_mouth_target,
    compute_wrench,
    zero_wrench,
)
from quadassist.locomotion import BaseState, step_base
from quadassist.quadstick import (
    MappingModeState,
    QuadstickFrame,
    apply_deadzone,
    neutral_frame,
    update_mapping_mode,
)
from quadassist.router import (
    BaseTwistCommand,
    ControlMode,
    EETwistCommand,
    GripperAction,
    ModeState,
    RoutedCommand,
    initial_configuration,
    route_axes,
    update_control_mode,
)
from quadassist.scenario import Scenario
from quadassist.voice import VoiceLatch, dispatch, parse_transcript

GRIPPER_MAX_WIDTH = 0.10
GRIPPER_SPEED = 0.25  # m/s jaw closing speed
GRASP_WIDTH = 0.045  # attach at or below this width
RELEASE_WIDTH = 0.06  # detach at or above this width
OBJECT_GRAB_RADIUS = 0.10  # tool-to-object reach for loose objects
HANDLE_BREAK_FACTOR = 2.0  # handle grasp breaks beyond factor * grab_radius
FACE_RADIUS = 0.05  # spring contact sphere around the mouth point


def _in_region(point: np.ndarray, region: dict) -> bool:
    c = np.asarray(region["center"])
    h = np.asarray(region["half_extents"])
    return bool(np.all(np.abs(point - c) <= h))


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


class World:
    def __init__(self, scenario: Scenario, log: Optional[EventLog] = None):
        self.scenario = scenario
        self.model = scenario.model
        self.dt = scenario.dt
        self.caps = scenario.caps
        self.weights = kin.WholeBodyWeights(
            penalties=np.asarray(scenario.solver["penalties"]),
            damping=scenario.solver["damping"],
        )
        self.rng = np.random.default_rng(scenario.seed)
        self.log = log if log is not None else EventLog(
            scenario.digest, scenario.seed, scenario.dt)

        self.tick = 0
        bx, by, byaw = scenario.base_start
        self.base = BaseState(x=bx, y=by, yaw=byaw)
        self.config = kin.RobotConfiguration(
            base_x=bx, base_y=by, base_yaw=byaw,
            arm_q=scenario.arm_start.copy())
        self.ee_pose = kin.forward_kinematics(self.config, self.model)
        self.gripper_width = GRIPPER_MAX_WIDTH
        self.held: Optional[str] = None
        self.held_offset = np.zeros(3)

        self.mode_state = ModeState()
        self.mapping_state = MappingModeState()
        self.prev_frame = neutral_frame()
        self.latch = VoiceLatch()
        self.wrench: WrenchReading = zero_wrench()

        self.pipeline = FaceTouchPipeline(scenario.safety, self._acquire)
        self._autonomy_cmd = np.zeros(3)
        self._autonomy_was = FaceTouchState.IDLE

        # Fixture runtime state, keyed by fixture name.
        self.doors: dict[str, dict] = {}  # mailbox doors: signed angle
        self.dishwashers: dict[str, dict] = {}
        self.objects: dict[str, np.ndarray] = {}
        self._object_static: dict[str, bool] = {}
        self.scarf_draped: dict[str, bool] = {}
        for name, fx in scenario.fixtures.items():
            kind = fx["kind"]
            if kind == "mailbox":
                self.doors[name] = {"angle": 0.0, "grasped": False}
                self.objects[f"package@{name}"] = (
                    np.asarray(fx["position"]) + np.asarray(fx["package_offset"]))
            elif kind == "dishwasher":
                self.dishwashers[name] = {
                    "angle": 0.0, "door_grasped": False,
                    "ext": 0.0, "rack_grasped": False,
                    "plate_on_rack": True,
                }
                self.objects[f"plate@{name}"] = self._plate_position(name)
            elif kind == "toothbrush":
                self.objects[name] = np.asarray(fx["position"], dtype=float).copy()
            elif kind == "scarf":
                self.objects[name] = np.asarray(fx["position"], dtype=float).copy()
                self.scarf_draped[name] = False

        self.subgoal_ticks: dict[tuple[str, str], int] = {}
        self.task_complete_tick: dict[str, int] = {}
        self._touch_success_latched = False
        self._held_during_touch: Optional[str] = None

    # --- autonomy plumbing ---

    def _acquire(self):
        mouth = self.scenario.head_position
        ee = self.ee_pose.position
        axis = mouth - ee
        n = float(np.linalg.norm(axis))
        if n < 1e-9:
            return None
        return acquire_mouth_target(
            mouth, ee, axis / n, self.rng,
            noise_sigma=self.scenario.safety.target_noise_sigma)

    # --- fixture geometry ---

    def _mailbox_handle(self, name: str) -> np.ndarray:
        fx = self.scenario.fixtures[name]
        angle = self.doors[name]["angle"]
        c, s = math.cos(angle), math.sin(angle)
        d = np.asarray(fx["door_dir"])
        swung = np.array([c * d[0] - s * d[1], s * d[0] + c * d[1], d[2]])
        return np.asarray(fx["position"]) + fx["door_width"] * swung

    def _dw_handle(self, name: str) -> np.ndarray:
        fx = self.scenario.fixtures[name]
        angle = self.dishwashers[name]["angle"]
        d = np.asarray(fx["door_dir"])
        up = np.array([0.0, 0.0, 1.0])
        return (np.asarray(fx["position"])
                + fx["door_length"] * (math.sin(angle) * d + math.cos(angle) * up))

    def _rack_handle(self, name: str) -> np.ndarray:
        fx = self.scenario.fixtures[name]
        ext = self.dishwashers[name]["ext"]
        return (np.asarray(fx["position"]) + np.asarray(fx["rack_handle_offset"])
                + ext * np.asarray(fx["rack_dir"]))

    def _plate_position(self, name: str) -> np.ndarray:
        fx = self.scenario.fixtures[name]
        ext = self.dishwashers[name]["ext"]
        return (np.asarray(fx["position"]) + np.asarray(fx["plate_offset"])
                + ext * np.asarray(fx["rack_dir"]))

    # --- the tick ---

    def step(self, frame: Optional[QuadstickFrame] = None,
             transcripts: Sequence[str] = ()) -> None:
        if frame is None:
            frame = neutral_frame(self.tick * self.dt)
        try:
            self._step_inner(frame, list(transcripts))
        except QuadAssistError as exc:
            if str(exc).startswith("tick "):
                raise
            raise type(exc)(f"tick {self.tick}: {exc}") from exc

    def _step_inner(self, frame: QuadstickFrame, transcripts: list[str]) -> None:
        tick = self.tick
        if transcripts or not self._frame_is_neutral(frame):
            self.log.append(tick, "input", {
                "h": frame.joystick_h, "v": frame.joystick_v,
                "ch": [c.value for c in frame.channels],
                "btn": frame.push_button,
                "transcripts": transcripts,
            })

        # 1. voice
        for text in transcripts:
            cmd = parse_transcript(text, self.scenario.keywords)
            if cmd is not None:
                dispatch(cmd, self.latch)
                self.log.append(tick, "voice", {"command": cmd.name})
        flags = self.latch.take()

        # 2. mapping mode
        prev_mapping = self.mapping_state
        self.mapping_state = update_mapping_mode(
            self.mapping_state, frame, now=tick * self.dt,
            switch_latency=self.scenario.switch_latency)
        if self.mapping_state.in_transition and not prev_mapping.in_transition:
            self.log.append(tick, "mapping", {
                "phase": "pending", "to": self.mapping_state.pending.value})
        elif prev_mapping.in_transition and not self.mapping_state.in_transition:
            self.log.append(tick, "mapping", {
                "phase": "complete", "mapping": self.mapping_state.current.value})

        # 3. control mode (edges ignored while autonomy owns the arm)
        if not self.pipeline.active:
            prev_mode = self.mode_state
            self.mode_state = update_control_mode(
                self.mode_state, frame, self.prev_frame)
            if self.mode_state.control is not prev_mode.control:
                if self.mode_state.control.is_ee:
                    # Entering an arm mode snaps to its preset configuration.
                    self.config.arm_q = initial_configuration(
                        self.mode_state.control)
                    self.ee_pose = kin.forward_kinematics(self.config, self.model)
                self.log.append(tick, "mode", {
                    "control": self.mode_state.control.value})
        self.prev_frame = frame

        # 4. routing
        shaped = apply_deadzone(frame, self.scenario.deadzone)
        routed = route_axes(shaped, self.mode_state.control,
                            self.mapping_state.current, self.caps)
        if flags.stop or self.mapping_state.in_transition:
            routed = RoutedCommand(
                base=None if routed.base is None else BaseTwistCommand(),
                ee=None if routed.ee is None else EETwistCommand(),
                gripper=GripperAction.HOLD if flags.stop else routed.gripper,
                mode_after=routed.mode_after)

        # 5. autonomy
        if (flags.start and not self.pipeline.active
                and self.mode_state.control.is_ee
                and self.scenario.head_position is not None):
            if self.pipeline.state is not FaceTouchState.IDLE:
                self.pipeline.reset()  # re-arm after a finished/aborted run
            self.pipeline.request_start(self.ee_pose.position.copy())
            self.log.append(tick, "autonomy", {"state": self.pipeline.state.value})
        autonomy_active = self.pipeline.active
        self._autonomy_cmd = np.zeros(3)
        if autonomy_active:
            res = self.pipeline.step(
                self.ee_pose.position, self.wrench,
                abort=(flags.stop or flags.retreat), dt=self.dt)
            self._autonomy_cmd = res.command
            for state in res.transitions:
                payload = {"state": state.value}
                if state in (FaceTouchState.DONE, FaceTouchState.ABORTED):
                    payload["reason"] = self.pipeline.abort_reason
                    payload["touch_success"] = self.pipeline.touch_success
                self.log.append(tick, "autonomy", payload)
            if self.pipeline.touch_success and not self._touch_success_latched:
                self._touch_success_latched = True
                self._held_during_touch = self.held

        # 6. controller
        if autonomy_active:
            moved = self._step_whole_body(np.concatenate(
                [self._autonomy_cmd, np.zeros(3)]))
            commanded_motion = bool(np.any(self._autonomy_cmd))
        elif self.mode_state.control is ControlMode.BASE:
            cmd = routed.base if routed.base is not None else BaseTwistCommand()
            self.base = step_base(self.base, cmd, self.dt, self.scenario.limits)
            self.config.base_x = self.base.x
            self.config.base_y = self.base.y
            self.config.base_yaw = self.base.yaw
            self.ee_pose = kin.forward_kinematics(self.config, self.model)
            commanded_motion = not cmd.is_zero()
            moved = True
        else:
            ee_cmd = routed.ee if routed.ee is not None else EETwistCommand()
            commanded_motion = not ee_cmd.is_zero()
            moved = self._step_whole_body(self._base_to_world_twist(ee_cmd))

        if moved:
            hits = kin.check_self_collision(self.config, self.model)
            if hits:
                self.log.append(tick, "self_collision", {
                    "pairs": [list(h) for h in hits]})

        # 7. gripper and kinematic objects
        self._step_gripper(routed.gripper)
        self._step_articulations()

        # 8. wrench (consumed by the pipeline next tick)
        self._compute_wrench()

        # 9. task predicates
        self._step_predicates()

        # 10. per-tick log entry
        loco = int(self.mode_state.control is ControlMode.BASE
                   and not autonomy_active and commanded_motion)
        manip = int((self.mode_state.control.is_ee or autonomy_active)
                    and commanded_motion)
        self.log.append(tick, "tick", {
            "loco": loco, "manip": manip, "sd": self._state_digest()})
        self.tick += 1

    @staticmethod
    def _frame_is_neutral(frame: QuadstickFrame) -> bool:
        neutral = neutral_frame(frame.timestamp)
        return frame == neutral

    def _base_to_world_twist(self, cmd: EETwistCommand) -> np.ndarray:
        """Rotate a base-frame EE twist into the world frame by base yaw."""
        c, s = math.cos(self.base.yaw), math.sin(self.base.yaw)
        return np.array([
            c * cmd.vx - s * cmd.vy,
            s * cmd.vx + c * cmd.vy,
            cmd.vz,
            c * cmd.wroll - s * cmd.wpitch,
            s * cmd.wroll + c * cmd.wpitch,
            cmd.wyaw,
        ])

    def _step_whole_body(self, twist: np.ndarray) -> bool:
        if not np.any(twist):
            return False
        cmd = EETwistCommand(*twist)
        rates = kin.solve_whole_body_rates(
            self.config, cmd, self.weights, self.model,
            lookahead_dt=self.dt,
            collision_margin=self.scenario.solver["collision_margin"],
            limit_buffer=self.scenario.solver["limit_buffer"],
            avoidance_gain=self.scenario.solver["avoidance_gain"])
        self.config = kin.integrate_rates(self.config, rates, self.dt, self.model)
        self.base.x = self.config.base_x
        self.base.y = self.config.base_y
        self.base.yaw = self.config.base_yaw
        c, s = math.cos(self.base.yaw), math.sin(self.base.yaw)
        self.base.vx = c * rates[0] + s * rates[1]
        self.base.vy = -s * rates[0] + c * rates[1]
        self.base.wyaw = rates[2]
        self.ee_pose = kin.forward_kinematics(self.config, self.model)
        return True

    # --- gripper, grasping, articulations ---

    def _step_gripper(self, action: GripperAction) -> None:
        if action is GripperAction.OPEN:
            self.gripper_width = min(GRIPPER_MAX_WIDTH,
                                     self.gripper_width + GRIPPER_SPEED * self.dt)
        elif action is GripperAction.CLOSE:
            self.gripper_width = max(0.0,
                                     self.gripper_width - GRIPPER_SPEED * self.dt)
        ee = self.ee_pose.position

        if self.held is not None:
            if self.gripper_width >= RELEASE_WIDTH:
                self.log.append(self.tick, "release", {"object": self.held})
                self._object_static[self.held] = True
                self.held = None
            else:
                self.objects[self.held] = ee + self.held_offset
            return

        if self.gripper_width <= GRASP_WIDTH:
            # Nearest loose object in reach wins; fixed iteration order keeps
            # ties deterministic.
            best = None
            best_d = OBJECT_GRAB_RADIUS
            for name in sorted(self.objects):
                d = float(np.linalg.norm(self.objects[name] - ee))
                if d < best_d:
                    best, best_d = name, d
            if best is not None:
                self.held = best
                self.held_offset = self.objects[best] - ee
                for dw_name, dw in self.dishwashers.items():
                    if best == f"plate@{dw_name}":
                        dw["plate_on_rack"] = False
                self.log.append(self.tick, "grasp", {"object": best})

    def _step_articulations(self) -> None:
        ee = self.ee_pose.position
        closed = self.gripper_width <= GRASP_WIDTH
        opened = self.gripper_width >= RELEASE_WIDTH

        for name, door in self.doors.items():
            fx = self.scenario.fixtures[name]
            handle = self._mailbox_handle(name)
            if door["grasped"]:
                if opened or (np.linalg.norm(ee - handle)
                              > HANDLE_BREAK_FACTOR * fx["grab_radius"]):
                    door["grasped"] = False
            elif closed and self.held is None \
                    and np.linalg.norm(ee - handle) <= fx["grab_radius"]:
                door["grasped"] = True
            if door["grasped"]:
                rel = ee - np.asarray(fx["position"])
                d = np.asarray(fx["door_dir"])
                cross = d[0] * rel[1] - d[1] * rel[0]
                dot = d[0] * rel[0] + d[1] * rel[1]
                if abs(cross) > 1e-12 or abs(dot) > 1e-12:
                    raw = math.atan2(cross, dot)
                    lim = math.radians(fx["max_angle_deg"])
                    door["angle"] = float(np.clip(raw, -lim, lim))

        for name, dw in self.dishwashers.items():
            fx = self.scenario.fixtures[name]
            handle = self._dw_handle(name)
            if dw["door_grasped"]:
                if opened or (np.linalg.norm(ee - handle)
                              > HANDLE_BREAK_FACTOR * fx["grab_radius"]):
                    dw["door_grasped"] = False
            elif closed and self.held is None \
                    and np.linalg.norm(ee - handle) <= fx["grab_radius"]:
                dw["door_grasped"] = True
            if dw["door_grasped"]:
                rel = ee - np.asarray(fx["position"])
                d = np.asarray(fx["door_dir"])
                u = float(rel @ d)
                w = float(rel[2])
                if abs(u) > 1e-12 or abs(w) > 1e-12:
                    raw = math.atan2(u, w)
                    dw["angle"] = float(np.clip(
                        raw, 0.0, math.radians(fx["max_angle_deg"])))

            door_open = dw["angle"] >= math.radians(fx["open_angle_deg"])
            rack_handle = self._rack_handle(name)
            if dw["rack_grasped"]:
                if opened or (np.linalg.norm(ee - rack_handle)
                              > HANDLE_BREAK_FACTOR * fx["grab_radius"]):
                    dw["rack_grasped"] = False
            elif closed and self.held is None and door_open \
                    and np.linalg.norm(ee - rack_handle) <= fx["grab_radius"]:
                dw["rack_grasped"] = True
            if dw["rack_grasped"]:
                base_handle = (np.asarray(fx["position"])
                               + np.asarray(fx["rack_handle_offset"]))
                along = float((ee - base_handle) @ np.asarray(fx["rack_dir"]))
                dw["ext"] = float(np.clip(along, 0.0, fx["rack_travel"]))
            if dw["plate_on_rack"]:
                self.objects[f"plate@{name}"] = self._plate_position(name)

    def _compute_wrench(self) -> None:
        mouth = self.scenario.head_position
        if mouth is None:
            self.wrench = zero_wrench(self.tick * self.dt)
            return
        rel = self.ee_pose.position - mouth
        dist = float(np.linalg.norm(rel))
        pen = max(0.0, FACE_RADIUS - dist)
        if pen == 0.0 or dist < 1e-12:
            self.wrench = zero_wrench(self.tick * self.dt)
            return
        self.wrench = compute_wrench(pen, rel, self.scenario.safety.stiffness,
                                     timestamp=self.tick * self.dt)

    # --- predicates ---

    def _latch(self, task_id: str, subgoal: str) -> None:
        key = (task_id, subgoal)
        if key in self.subgoal_ticks:
            return
        self.subgoal_ticks[key] = self.tick
        self.log.append(self.tick, "subgoal", {"task": task_id, "subgoal": subgoal})

    def _step_predicates(self) -> None:
        for task in self.scenario.tasks:
            if task.type == "mailbox_package":
                box_name, table_name = task.fixtures
                fx = self.scenario.fixtures[box_name]
                if abs(self.doors[box_name]["angle"]) >= math.radians(fx["open_angle_deg"]):
                    self._latch(task.id, "door_open")
                pkg = f"package@{box_name}"
                if self.held != pkg and _in_region(
                        self.objects[pkg], self.scenario.fixtures[table_name]):
                    self._latch(task.id, "package_on_table")
            elif task.type == "toothbrush":
                brush_name, cup_name = task.fixtures
                if (self._touch_success_latched
                        and self._held_during_touch == brush_name):
                    self._latch(task.id, "brush_touch")
                cup = self.scenario.fixtures[cup_name]
                pos = self.objects[brush_name]
                horiz = float(np.linalg.norm(
                    pos[:2] - np.asarray(cup["position"])[:2]))
                if (self.held != brush_name and horiz <= cup["radius"]
                        and abs(pos[2] - cup["position"][2]) <= 0.15):
                    self._latch(task.id, "brush_in_cup")
            elif task.type == "scarf":
                scarf_name, rail_name = task.fixtures
                rail = self.scenario.fixtures[rail_name]
                center = np.asarray(rail["center"])
                half = 0.5 * rail["length"] * np.asarray(rail["dir"])
                if self.held != scarf_name and not self.scarf_draped[scarf_name]:
                    d = _point_segment_distance(
                        self.objects[scarf_name], center - half, center + half)
                    if d <= rail["drape_radius"]:
                        self.scarf_draped[scarf_name] = True
                if self.scarf_draped[scarf_name]:
                    self._latch(task.id, "scarf_over_rail")
            elif task.type == "dishwasher":
                dw_name, counter_name = task.fixtures
                fx = self.scenario.fixtures[dw_name]
                dw = self.dishwashers[dw_name]
                if dw["angle"] >= math.radians(fx["open_angle_deg"]):
                    self._latch(task.id, "door_open")
                if dw["ext"] >= fx["rack_out_fraction"] * fx["rack_travel"]:
                    self._latch(task.id, "rack_out")
                plate = f"plate@{dw_name}"
                if self.held != plate and not dw["plate_on_rack"] and _in_region(
                        self.objects[plate], self.scenario.fixtures[counter_name]):
                    self._latch(task.id, "plate_on_counter")
            if task.id not in self.task_complete_tick and all(
                    (task.id, sg) in self.subgoal_ticks for sg in task.subgoals):
                self.task_complete_tick[task.id] = self.tick
                self.log.append(self.tick, "task_complete", {"task": task.id})

    # --- digests, snapshots, scoring ---

    def _state_digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.array([
            self.base.x, self.base.y, self.base.yaw,
            self.base.vx, self.base.vy, self.base.wyaw,
            self.gripper_width,
        ]).tobytes())
        h.update(self.config.arm_q.tobytes())
        for name in sorted(self.objects):
            h.update(self.objects[name].tobytes())
        for name in sorted(self.doors):
            h.update(np.float64(self.doors[name]["angle"]).tobytes())
        for name in sorted(self.dishwashers):
            dw = self.dishwashers[name]
            h.update(np.array([dw["angle"], dw["ext"]]).tobytes())
        h.update(bytes(f"{self.held}|{self.mode_state.control.value}|"
                       f"{self.mapping_state.current.value}|{self.tick}", "utf-8"))
        return h.hexdigest()[:16]

    def points(self) -> int:
        return len(self.subgoal_ticks)

    def all_tasks_complete(self) -> bool:
        return all(t.id in self.task_complete_tick for t in self.scenario.tasks)

    def snapshot(self) -> dict:
        fixtures: dict[str, dict] = {}
        for name, fx in self.scenario.fixtures.items():
            kind = fx["kind"]
            entry: dict = {"kind": kind}
            if kind == "mailbox":
                entry["angle_deg"] = math.degrees(self.doors[name]["angle"])
                entry["handle"] = self._mailbox_handle(name).tolist()
                entry["position"] = fx["position"]
            elif kind == "dishwasher":
                dw = self.dishwashers[name]
                entry["angle_deg"] = math.degrees(dw["angle"])
                entry["ext"] = dw["ext"]
                entry["handle"] = self._dw_handle(name).tolist()
                entry["rack_handle"] = self._rack_handle(name).tolist()
                entry["position"] = fx["position"]
            elif kind == "region":
                entry["center"] = fx["center"]
                entry["half_extents"] = fx["half_extents"]
            elif kind == "rail":
                entry["center"] = fx["center"]
                entry["dir"] = fx["dir"]
                entry["length"] = fx["length"]
            elif kind == "cup":
                entry["position"] = fx["position"]
                entry["radius"] = fx["radius"]
            else:
                entry["position"] = fx["position"]
            fixtures[name] = entry
        return {
            "tick": self.tick,
            "t": self.tick * self.dt,
            "mode": self.mode_state.control.value,
            "mapping": {
                "current": self.mapping_state.current.value,
                "in_transition": self.mapping_state.in_transition,
            },
            "base": {
                "x": self.base.x, "y": self.base.y, "yaw": self.base.yaw,
                "vx": self.base.vx, "vy": self.base.vy, "wyaw": self.base.wyaw,
            },
            "arm_q": self.config.arm_q.tolist(),
            "ee": {
                "position": self.ee_pose.position.tolist(),
                "orientation": self.ee_pose.orientation.tolist(),
            },
            "gripper": {"width": self.gripper_width, "held": self.held},
            "wrench_n": self.wrench.magnitude(),
            "autonomy": {
                "state": self.pipeline.state.value,
                "reason": self.pipeline.abort_reason,
            },
            "objects": {k: v.tolist() for k, v in self.objects.items()},
            "fixtures": fixtures,
            "head": (None if self.scenario.head_position is None
                     else self.scenario.head_position.tolist()),
            "tasks": [
                {
                    "id": t.id,
                    "subgoals": {sg: (t.id, sg) in self.subgoal_ticks
                                 for sg in t.subgoals},
                    "complete": t.id in self.task_complete_tick,
                }
                for t in self.scenario.tasks
            ],
            "score": {"points": self.points(),
                      "max_points": self.scenario.max_points},
        }
