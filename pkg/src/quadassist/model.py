"""Kinematic model file: joint chain parameters and collision proxy geometry.

The model file is JSON with three parts:

* ``base_height`` plus a ``joints`` list (exactly six entries, each with
  ``name``, ``origin`` offset in meters from the parent frame, unit
  ``axis`` in the parent frame, and ``limits`` in radians),
* a ``tool`` offset from the last link frame to the gripper tip,
* a ``proxies`` list of capsules/spheres (``p0``/``p1`` endpoints in the
  owning link frame, ``radius``) attached to ``base`` or a joint name.

Self-collision pairs are generated for proxies at least two chain links
apart; structurally adjacent pairs that can never separate can be listed
in ``exclude_pairs``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from quadassist.errors import ScenarioError

ARM_DOF = 6


@dataclass
class ProxyBody:
    name: str
    frame: int  # 0 = base, 1..6 = arm links, 7 = tool
    p0: np.ndarray
    p1: np.ndarray
    radius: float


@dataclass
class RobotModel:
    name: str
    base_height: float
    joint_names: list[str]
    origins: np.ndarray  # (7, 3); row 6 is the tool offset
    axes: np.ndarray  # (6, 3)
    limits: np.ndarray  # (6, 2)
    proxies: list[ProxyBody]
    pairs: np.ndarray = field(repr=False)  # (M, 2) int64 proxy indices
    proxy_locals: np.ndarray = field(repr=False)  # (N, 2, 3)
    proxy_frames: np.ndarray = field(repr=False)  # (N,) int64
    proxy_radii: np.ndarray = field(repr=False)  # (N,)

    def pair_names(self) -> list[tuple[str, str]]:
        return [(self.proxies[i].name, self.proxies[j].name) for i, j in self.pairs]

    def to_dict(self) -> dict:
        """Serializable form, loadable back through ``load_model`` (used by
        the session config message for rendering)."""
        frame_names = ["base"] + list(self.joint_names)
        # Reconstruct the exclude list implied by the pairs actually kept:
        # every frame-distance-eligible pair that is absent was excluded.
        kept = {frozenset(p) for p in map(tuple, self.pairs)}
        excludes = []
        for i in range(len(self.proxies)):
            for j in range(i + 1, len(self.proxies)):
                if abs(self.proxies[i].frame - self.proxies[j].frame) < 2:
                    continue
                if frozenset((i, j)) not in kept:
                    excludes.append([self.proxies[i].name, self.proxies[j].name])
        return {
            "name": self.name,
            "base_height": self.base_height,
            "joints": [
                {
                    "name": self.joint_names[i],
                    "origin": self.origins[i].tolist(),
                    "axis": self.axes[i].tolist(),
                    "limits": self.limits[i].tolist(),
                }
                for i in range(ARM_DOF)
            ],
            "tool": self.origins[6].tolist(),
            "proxies": [
                {
                    "name": b.name,
                    "frame": frame_names[b.frame],
                    "p0": b.p0.tolist(),
                    "p1": b.p1.tolist(),
                    "radius": b.radius,
                }
                for b in self.proxies
            ],
            "exclude_pairs": excludes,
        }


def _vec3(raw, where: str) -> np.ndarray:
    v = np.asarray(raw, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ScenarioError(f"{where}: expected a finite 3-vector, got {raw!r}")
    return v


def load_model(source: str | Path | dict) -> RobotModel:
    """Load and validate a robot model from a file path or parsed dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    else:
        raw = source

    name = raw.get("name", "robot")
    base_height = float(raw.get("base_height", 0.5))
    joints = raw.get("joints")
    if not isinstance(joints, list) or len(joints) != ARM_DOF:
        raise ScenarioError(f"model {name}: expected exactly {ARM_DOF} joints")

    joint_names: list[str] = []
    origins = np.zeros((7, 3))
    axes = np.zeros((6, 3))
    limits = np.zeros((6, 2))
    for i, j in enumerate(joints):
        jname = j.get("name", f"joint{i + 1}")
        joint_names.append(jname)
        origins[i] = _vec3(j.get("origin"), f"joint {jname} origin")
        axis = _vec3(j.get("axis"), f"joint {jname} axis")
        norm = np.linalg.norm(axis)
        if not 0.999 < norm < 1.001:
            raise ScenarioError(f"joint {jname}: axis must be a unit vector")
        axes[i] = axis / norm
        lo, hi = j.get("limits", (-np.pi, np.pi))
        if not lo < hi:
            raise ScenarioError(f"joint {jname}: limits must satisfy lo < hi")
        limits[i] = (lo, hi)
    if len(set(joint_names)) != ARM_DOF:
        raise ScenarioError(f"model {name}: duplicate joint names")
    origins[6] = _vec3(raw.get("tool", [0.0, 0.0, 0.0]), "tool offset")

    frame_by_name = {"base": 0}
    for i, jname in enumerate(joint_names):
        frame_by_name[jname] = i + 1

    proxies: list[ProxyBody] = []
    for pr in raw.get("proxies", []):
        pname = pr.get("name")
        if not pname:
            raise ScenarioError("proxy without a name")
        frame_name = pr.get("frame", "base")
        if frame_name not in frame_by_name:
            raise ScenarioError(f"proxy {pname}: unknown frame {frame_name!r}")
        p0 = _vec3(pr.get("p0"), f"proxy {pname} p0")
        p1 = _vec3(pr.get("p1", pr.get("p0")), f"proxy {pname} p1")
        radius = float(pr.get("radius", 0.0))
        if radius <= 0.0:
            raise ScenarioError(f"proxy {pname}: radius must be > 0")
        proxies.append(ProxyBody(pname, frame_by_name[frame_name], p0, p1, radius))
    pnames = [b.name for b in proxies]
    if len(set(pnames)) != len(pnames):
        raise ScenarioError(f"model {name}: duplicate proxy names")

    excluded = set()
    for a, b in raw.get("exclude_pairs", []):
        if a not in pnames or b not in pnames:
            raise ScenarioError(f"exclude_pairs: unknown proxy in ({a}, {b})")
        excluded.add(frozenset((a, b)))

    pair_list = []
    for i in range(len(proxies)):
        for j in range(i + 1, len(proxies)):
            if abs(proxies[i].frame - proxies[j].frame) < 2:
                continue
            if frozenset((proxies[i].name, proxies[j].name)) in excluded:
                continue
            pair_list.append((i, j))
    pairs = np.asarray(pair_list, dtype=np.int64).reshape(-1, 2)

    proxy_locals = np.zeros((len(proxies), 2, 3))
    proxy_frames = np.zeros(len(proxies), dtype=np.int64)
    proxy_radii = np.zeros(len(proxies))
    for i, b in enumerate(proxies):
        proxy_locals[i, 0] = b.p0
        proxy_locals[i, 1] = b.p1
        proxy_frames[i] = b.frame
        proxy_radii[i] = b.radius

    return RobotModel(
        name=name,
        base_height=base_height,
        joint_names=joint_names,
        origins=origins,
        axes=axes,
        limits=limits,
        proxies=proxies,
        pairs=pairs,
        proxy_locals=proxy_locals,
        proxy_frames=proxy_frames,
        proxy_radii=proxy_radii,
    )


def default_model() -> RobotModel:
    """The quadruped-plus-arm platform shipped with the package."""
    path = resources.files("quadassist").joinpath("data/anymal_dynaarm.json")
    return load_model(json.loads(path.read_text()))
