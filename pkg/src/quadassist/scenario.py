"""Scenario files: one JSON document describing a complete simulated run.

Sections: top-level metadata (name, dt, seed, duration_ticks), `world`
(base start pose, arm start, pilot head, named fixtures), `tasks` (ordered
course referencing fixtures by name), `robot_model` ("default" or an
inline model document), and `config` with one subsection per subsystem
(quadstick, router, kinematics, locomotion, safety, voice).

Loading fills documented defaults, validates every field with its JSON
path in the error message, resolves task-to-fixture references (an
unknown name or a kind mismatch is an error), and computes a digest over
the fully resolved document so logs can pin the exact scenario they ran.
An empty task list is valid (free-driving session).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from quadassist.errors import ScenarioError
from quadassist.events import canonical_json
from quadassist.facetouch import FaceTouchConfig
from quadassist.locomotion import BaseMotionLimits
from quadassist.model import ARM_DOF, RobotModel, default_model, load_model
from quadassist.router import (
    ControlMode,
    InitialConfigTable,
    RateCaps,
    initial_configuration,
)
from quadassist.voice import DEFAULT_KEYWORDS, KeywordTable

# Fixture kinds each task type consumes, in order.
TASK_FIXTURE_KINDS = {
    "mailbox_package": ("mailbox", "region"),
    "toothbrush": ("toothbrush", "cup"),
    "scarf": ("scarf", "rail"),
    "dishwasher": ("dishwasher", "region"),
}

# Subgoals latched per task type; one point each.
TASK_SUBGOALS = {
    "mailbox_package": ("door_open", "package_on_table"),
    "toothbrush": ("brush_touch", "brush_in_cup"),
    "scarf": ("scarf_over_rail",),
    "dishwasher": ("door_open", "rack_out", "plate_on_counter"),
}


def _err(path: str, msg: str) -> ScenarioError:
    return ScenarioError(f"{path}: {msg}")


def _expect_dict(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise _err(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise _err(path, f"unknown field(s): {', '.join(sorted(unknown))}")


def _number(obj: dict, key: str, path: str, default=None, minimum=None,
            positive=False) -> float:
    if key not in obj:
        if default is None:
            raise _err(path, f"missing required field {key!r}")
        return float(default)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise _err(f"{path}.{key}", "expected a finite number")
    v = float(v)
    if positive and v <= 0.0:
        raise _err(f"{path}.{key}", "must be > 0")
    if minimum is not None and v < minimum:
        raise _err(f"{path}.{key}", f"must be >= {minimum}")
    return v


def _integer(obj: dict, key: str, path: str, default=None, minimum=None) -> int:
    if key not in obj:
        if default is None:
            raise _err(path, f"missing required field {key!r}")
        return int(default)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise _err(f"{path}.{key}", "expected an integer")
    if minimum is not None and v < minimum:
        raise _err(f"{path}.{key}", f"must be >= {minimum}")
    return v


def _vec3(obj: dict, key: str, path: str, default=None, unit=False) -> list[float]:
    if key not in obj:
        if default is None:
            raise _err(path, f"missing required field {key!r}")
        raw = list(default)
    else:
        raw = obj[key]
    if (not isinstance(raw, (list, tuple)) or len(raw) != 3
            or any(isinstance(x, bool) or not isinstance(x, (int, float))
                   or not math.isfinite(x) for x in raw)):
        raise _err(f"{path}.{key}", "expected a list of 3 finite numbers")
    vec = [float(x) for x in raw]
    if unit:
        n = math.sqrt(sum(x * x for x in vec))
        if n < 1e-9:
            raise _err(f"{path}.{key}", "direction must be nonzero")
        vec = [x / n for x in vec]
    return vec


def _string(obj: dict, key: str, path: str, default=None) -> str:
    if key not in obj:
        if default is None:
            raise _err(path, f"missing required field {key!r}")
        return default
    v = obj[key]
    if not isinstance(v, str) or not v:
        raise _err(f"{path}.{key}", "expected a non-empty string")
    return v


# --- fixture schemas ---


def _fixture_region(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "center", "half_extents"}, path)
    half = _vec3(f, "half_extents", path)
    if any(h <= 0 for h in half):
        raise _err(f"{path}.half_extents", "must all be > 0")
    return {"kind": "region", "center": _vec3(f, "center", path), "half_extents": half}


def _fixture_mailbox(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "position", "door_dir", "door_width",
                        "open_angle_deg", "max_angle_deg", "grab_radius",
                        "package_offset"}, path)
    out = {
        "kind": "mailbox",
        "position": _vec3(f, "position", path),
        "door_dir": _vec3(f, "door_dir", path, default=[0.0, -1.0, 0.0], unit=True),
        "door_width": _number(f, "door_width", path, default=0.25, positive=True),
        "open_angle_deg": _number(f, "open_angle_deg", path, default=60.0, positive=True),
        "max_angle_deg": _number(f, "max_angle_deg", path, default=110.0, positive=True),
        "grab_radius": _number(f, "grab_radius", path, default=0.12, positive=True),
        "package_offset": _vec3(f, "package_offset", path, default=[0.0, 0.0, 0.05]),
    }
    if out["open_angle_deg"] > out["max_angle_deg"]:
        raise _err(f"{path}.open_angle_deg", "exceeds max_angle_deg")
    return out


def _fixture_toothbrush(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "position"}, path)
    return {"kind": "toothbrush", "position": _vec3(f, "position", path)}


def _fixture_cup(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "position", "radius"}, path)
    return {
        "kind": "cup",
        "position": _vec3(f, "position", path),
        "radius": _number(f, "radius", path, default=0.06, positive=True),
    }


def _fixture_scarf(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "position", "length"}, path)
    return {
        "kind": "scarf",
        "position": _vec3(f, "position", path),
        "length": _number(f, "length", path, default=0.5, positive=True),
    }


def _fixture_rail(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "center", "dir", "length", "drape_radius"}, path)
    return {
        "kind": "rail",
        "center": _vec3(f, "center", path),
        "dir": _vec3(f, "dir", path, default=[1.0, 0.0, 0.0], unit=True),
        "length": _number(f, "length", path, default=1.0, positive=True),
        "drape_radius": _number(f, "drape_radius", path, default=0.15, positive=True),
    }


def _fixture_dishwasher(f: dict, path: str) -> dict:
    _reject_unknown(f, {"kind", "position", "door_dir", "door_length",
                        "open_angle_deg", "max_angle_deg", "grab_radius",
                        "rack_dir", "rack_travel", "rack_out_fraction",
                        "rack_handle_offset", "plate_offset"}, path)
    out = {
        "kind": "dishwasher",
        "position": _vec3(f, "position", path),
        "door_dir": _vec3(f, "door_dir", path, default=[1.0, 0.0, 0.0], unit=True),
        "door_length": _number(f, "door_length", path, default=0.45, positive=True),
        "open_angle_deg": _number(f, "open_angle_deg", path, default=80.0, positive=True),
        "max_angle_deg": _number(f, "max_angle_deg", path, default=95.0, positive=True),
        "grab_radius": _number(f, "grab_radius", path, default=0.12, positive=True),
        "rack_dir": _vec3(f, "rack_dir", path, default=[1.0, 0.0, 0.0], unit=True),
        "rack_travel": _number(f, "rack_travel", path, default=0.35, positive=True),
        "rack_out_fraction": _number(f, "rack_out_fraction", path, default=0.7,
                                     positive=True),
        "rack_handle_offset": _vec3(f, "rack_handle_offset", path,
                                    default=[0.0, 0.0, 0.15]),
        "plate_offset": _vec3(f, "plate_offset", path, default=[-0.1, 0.0, 0.18]),
    }
    if out["open_angle_deg"] > out["max_angle_deg"]:
        raise _err(f"{path}.open_angle_deg", "exceeds max_angle_deg")
    if out["rack_out_fraction"] > 1.0:
        raise _err(f"{path}.rack_out_fraction", "must be <= 1")
    return out


_FIXTURE_SCHEMAS = {
    "region": _fixture_region,
    "mailbox": _fixture_mailbox,
    "toothbrush": _fixture_toothbrush,
    "cup": _fixture_cup,
    "scarf": _fixture_scarf,
    "rail": _fixture_rail,
    "dishwasher": _fixture_dishwasher,
}


@dataclass(frozen=True)
class TaskSpec:
    id: str
    type: str
    fixtures: tuple[str, ...]

    @property
    def subgoals(self) -> tuple[str, ...]:
        return TASK_SUBGOALS[self.type]


@dataclass
class Scenario:
    name: str
    dt: float
    seed: int
    duration_ticks: int
    base_start: tuple[float, float, float]
    arm_start: np.ndarray
    head_position: Optional[np.ndarray]
    head_axis: Optional[np.ndarray]
    fixtures: dict[str, dict]
    tasks: list[TaskSpec]
    model: RobotModel
    deadzone: float
    switch_latency: float
    caps: RateCaps
    solver: dict
    limits: BaseMotionLimits
    safety: FaceTouchConfig
    keywords: KeywordTable
    resolved: dict
    digest: str

    @property
    def max_points(self) -> int:
        return sum(len(t.subgoals) for t in self.tasks)


def _parse_world(raw: dict, initial_table: Optional[InitialConfigTable]) -> dict:
    world = _expect_dict(raw.get("world", {}), "world")
    _reject_unknown(world, {"base_start", "arm_start", "head", "fixtures"}, "world")
    bs = _expect_dict(world.get("base_start", {}), "world.base_start")
    _reject_unknown(bs, {"x", "y", "yaw"}, "world.base_start")
    base_start = {
        "x": _number(bs, "x", "world.base_start", default=0.0),
        "y": _number(bs, "y", "world.base_start", default=0.0),
        "yaw": _number(bs, "yaw", "world.base_start", default=0.0),
    }
    arm_raw = world.get("arm_start", "front")
    if isinstance(arm_raw, str):
        mode = {"front": ControlMode.EE_FRONT, "top": ControlMode.EE_TOP}.get(arm_raw)
        if mode is None:
            raise _err("world.arm_start", "expected \"front\", \"top\", or 6 numbers")
        arm_start = [float(x) for x in initial_configuration(mode, initial_table)]
    elif (isinstance(arm_raw, list) and len(arm_raw) == ARM_DOF
            and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    and math.isfinite(x) for x in arm_raw)):
        arm_start = [float(x) for x in arm_raw]
    else:
        raise _err("world.arm_start", "expected \"front\", \"top\", or 6 numbers")
    head = None
    if "head" in world:
        h = _expect_dict(world["head"], "world.head")
        _reject_unknown(h, {"position", "axis"}, "world.head")
        head = {
            "position": _vec3(h, "position", "world.head"),
            "axis": _vec3(h, "axis", "world.head", default=[1.0, 0.0, 0.0], unit=True),
        }
    fixtures_raw = _expect_dict(world.get("fixtures", {}), "world.fixtures")
    fixtures = {}
    for name, fx in fixtures_raw.items():
        path = f"world.fixtures.{name}"
        fx = _expect_dict(fx, path)
        kind = _string(fx, "kind", path)
        schema = _FIXTURE_SCHEMAS.get(kind)
        if schema is None:
            raise _err(f"{path}.kind", f"unknown fixture kind {kind!r}")
        fixtures[name] = schema(fx, path)
    return {"base_start": base_start, "arm_start": arm_start, "head": head,
            "fixtures": fixtures}


def _parse_tasks(raw: dict, fixtures: dict[str, dict]) -> list[dict]:
    tasks_raw = raw.get("tasks", [])
    if not isinstance(tasks_raw, list):
        raise _err("tasks", "expected a list")
    tasks = []
    seen_ids = set()
    for i, t in enumerate(tasks_raw):
        path = f"tasks[{i}]"
        t = _expect_dict(t, path)
        _reject_unknown(t, {"id", "type", "fixtures"}, path)
        task_id = _string(t, "id", path)
        if task_id in seen_ids:
            raise _err(f"{path}.id", f"duplicate task id {task_id!r}")
        seen_ids.add(task_id)
        task_type = _string(t, "type", path)
        kinds = TASK_FIXTURE_KINDS.get(task_type)
        if kinds is None:
            raise _err(f"{path}.type", f"unknown task type {task_type!r}")
        refs = t.get("fixtures")
        if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
            raise _err(f"{path}.fixtures", "expected a list of fixture names")
        if len(refs) != len(kinds):
            raise _err(f"{path}.fixtures",
                       f"task type {task_type!r} needs {len(kinds)} fixture(s) "
                       f"of kind {list(kinds)}, got {len(refs)}")
        for ref, want_kind in zip(refs, kinds):
            fx = fixtures.get(ref)
            if fx is None:
                raise _err(f"{path}.fixtures",
                           f"reference to undefined fixture {ref!r}")
            if fx["kind"] != want_kind:
                raise _err(f"{path}.fixtures",
                           f"fixture {ref!r} has kind {fx['kind']!r}, "
                           f"expected {want_kind!r}")
        tasks.append({"id": task_id, "type": task_type, "fixtures": list(refs)})
    return tasks


def _parse_config(raw: dict) -> dict:
    config = _expect_dict(raw.get("config", {}), "config")
    _reject_unknown(config, {"quadstick", "router", "kinematics", "locomotion",
                             "safety", "voice"}, "config")
    qs = _expect_dict(config.get("quadstick", {}), "config.quadstick")
    _reject_unknown(qs, {"deadzone", "switch_latency"}, "config.quadstick")
    quadstick = {
        "deadzone": _number(qs, "deadzone", "config.quadstick", default=0.08,
                            minimum=0.0),
        "switch_latency": _number(qs, "switch_latency", "config.quadstick",
                                  default=2.0, positive=True),
    }
    rt = _expect_dict(config.get("router", {}), "config.router")
    cap_fields = {f.name for f in dc_fields(RateCaps)}
    _reject_unknown(rt, cap_fields, "config.router")
    defaults = RateCaps()
    router = {name: _number(rt, name, "config.router",
                            default=getattr(defaults, name), positive=True)
              for name in sorted(cap_fields)}
    kn = _expect_dict(config.get("kinematics", {}), "config.kinematics")
    _reject_unknown(kn, {"damping", "penalties", "collision_margin",
                         "limit_buffer", "avoidance_gain"}, "config.kinematics")
    penalties = kn.get("penalties", [10.0, 10.0, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    if (not isinstance(penalties, list) or len(penalties) != 9
            or any(isinstance(x, bool) or not isinstance(x, (int, float))
                   or not x > 0 for x in penalties)):
        raise _err("config.kinematics.penalties", "expected 9 positive numbers")
    kinematics = {
        "damping": _number(kn, "damping", "config.kinematics", default=0.05,
                           positive=True),
        "penalties": [float(x) for x in penalties],
        "collision_margin": _number(kn, "collision_margin", "config.kinematics",
                                    default=0.02, minimum=0.0),
        "limit_buffer": _number(kn, "limit_buffer", "config.kinematics",
                                default=0.01, minimum=0.0),
        "avoidance_gain": _number(kn, "avoidance_gain", "config.kinematics",
                                  default=25.0, minimum=0.0),
    }
    lm = _expect_dict(config.get("locomotion", {}), "config.locomotion")
    limit_fields = {f.name for f in dc_fields(BaseMotionLimits)}
    _reject_unknown(lm, limit_fields, "config.locomotion")
    lim_defaults = BaseMotionLimits()
    locomotion = {name: _number(lm, name, "config.locomotion",
                                default=getattr(lim_defaults, name), positive=True)
                  for name in sorted(limit_fields)}
    sf = _expect_dict(config.get("safety", {}), "config.safety")
    safety_fields = {f.name for f in dc_fields(FaceTouchConfig)}
    _reject_unknown(sf, safety_fields, "config.safety")
    sf_defaults = FaceTouchConfig()
    safety = {}
    for f in dc_fields(FaceTouchConfig):
        if f.type == "int" or isinstance(getattr(sf_defaults, f.name), int):
            safety[f.name] = _integer(sf, f.name, "config.safety",
                                      default=getattr(sf_defaults, f.name), minimum=1)
        else:
            safety[f.name] = _number(sf, f.name, "config.safety",
                                     default=getattr(sf_defaults, f.name),
                                     minimum=0.0)
    vc = _expect_dict(config.get("voice", {}), "config.voice")
    _reject_unknown(vc, {"keywords"}, "config.voice")
    keywords = vc.get("keywords")
    if keywords is not None:
        keywords = _expect_dict(keywords, "config.voice.keywords")
        for key, words in keywords.items():
            if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
                raise _err(f"config.voice.keywords.{key}", "expected a list of strings")
    return {"quadstick": quadstick, "router": router, "kinematics": kinematics,
            "locomotion": locomotion, "safety": safety,
            "voice": {"keywords": keywords}}


def load_scenario(source: str | Path | dict,
                  initial_table: Optional[InitialConfigTable] = None) -> Scenario:
    """Load and validate a scenario document.  Raises ScenarioError with the
    offending JSON path (or parse line/column) in the message."""
    if isinstance(source, dict):
        raw = source
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
    raw = _expect_dict(raw, "scenario")
    _reject_unknown(raw, {"name", "dt", "seed", "duration_ticks", "world",
                          "tasks", "robot_model", "config"}, "scenario")
    name = _string(raw, "name", "scenario")
    dt = _number(raw, "dt", "scenario", default=0.01, positive=True)
    seed = _integer(raw, "seed", "scenario", default=0, minimum=0)
    duration_ticks = _integer(raw, "duration_ticks", "scenario", default=60000,
                              minimum=1)
    world = _parse_world(raw, initial_table)
    tasks_resolved = _parse_tasks(raw, world["fixtures"])
    # Cross-section reference: face-touch tasks need a pilot head to aim at.
    if world["head"] is None and any(t["type"] == "toothbrush" for t in tasks_resolved):
        raise _err("world.head", "required by a toothbrush task but missing")
    config = _parse_config(raw)
    model_raw = raw.get("robot_model", "default")
    if model_raw == "default":
        model = default_model()
        model_doc = "default"
    elif isinstance(model_raw, dict):
        model = load_model(model_raw)
        model_doc = model_raw
    else:
        raise _err("robot_model", 'expected "default" or an inline model object')

    resolved = {
        "name": name,
        "dt": dt,
        "seed": seed,
        "duration_ticks": duration_ticks,
        "world": world,
        "tasks": tasks_resolved,
        "robot_model": model_doc,
        "config": config,
    }
    digest = hashlib.sha256(canonical_json(resolved).encode()).hexdigest()

    kw_raw = config["voice"]["keywords"]
    keywords = KeywordTable.from_config(kw_raw) if kw_raw else KeywordTable()
    head = world["head"]
    return Scenario(
        name=name,
        dt=dt,
        seed=seed,
        duration_ticks=duration_ticks,
        base_start=(world["base_start"]["x"], world["base_start"]["y"],
                    world["base_start"]["yaw"]),
        arm_start=np.asarray(world["arm_start"], dtype=float),
        head_position=None if head is None else np.asarray(head["position"], dtype=float),
        head_axis=None if head is None else np.asarray(head["axis"], dtype=float),
        fixtures=world["fixtures"],
        tasks=[TaskSpec(t["id"], t["type"], tuple(t["fixtures"]))
               for t in tasks_resolved],
        model=model,
        deadzone=config["quadstick"]["deadzone"],
        switch_latency=config["quadstick"]["switch_latency"],
        caps=RateCaps(**config["router"]),
        solver=dict(config["kinematics"]),
        limits=BaseMotionLimits(**config["locomotion"]),
        safety=FaceTouchConfig(**config["safety"]),
        keywords=keywords,
        resolved=resolved,
        digest=digest,
    )
