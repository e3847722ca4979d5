"""Force-guarded autonomous mouth-touch pipeline.

A supervised state machine: acquire the mouth target from a simulated
noisy provider, approach in two straight-line phases (travel to a standoff
point on the mouth-to-start ray, pause one tick, advance at reduced
speed), watch the wrist wrench for collision events, and retract along the
recorded approach path in reverse when touched, aborted, or done.

Safety properties the tests pin down:

* after a collision event asserts, no command ever moves the tool closer
  to the mouth again;
* while retracting, tool-to-mouth distance is non-decreasing until the
  standoff radius is cleared;
* commanded speed never exceeds the reduced approach speed inside the
  standoff radius (this caps the first leg of retraction too — the
  stated full-speed reverse applies only beyond standoff);
* every abort reaches its terminal state through Retracting.

The pipeline commands world-frame linear tool velocity only; the caller
integrates it (whole-body solver in the simulation, ideal integrator in
unit tests).  Abort flags are latched by the caller and consumed here at
tick boundaries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from quadassist.errors import ContractError

Vec3 = np.ndarray


@dataclass(frozen=True)
class WrenchReading:
    """Simulated wrist force-torque sample."""

    force: Vec3
    torque: Vec3
    timestamp: float

    def magnitude(self) -> float:
        return float(np.linalg.norm(self.force))


def zero_wrench(t: float = 0.0) -> WrenchReading:
    return WrenchReading(np.zeros(3), np.zeros(3), t)


@dataclass(frozen=True)
class FaceTarget:
    """One mouth acquisition: estimated position plus detection quality."""

    mouth_position: Vec3
    confidence: float
    measured_distance: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ContractError("confidence must be in [0, 1]")
        if not self.measured_distance > 0.0:
            raise ContractError("measured_distance must be > 0")


class FaceTouchState(enum.Enum):
    IDLE = "idle"
    ACQUIRING = "acquiring"
    APPROACHING = "approaching"
    CONTACT = "contact"
    RETRACTING = "retracting"
    DONE = "done"
    ABORTED = "aborted"


_LEGAL_TRANSITIONS = {
    (FaceTouchState.IDLE, FaceTouchState.ACQUIRING),
    (FaceTouchState.ACQUIRING, FaceTouchState.APPROACHING),
    (FaceTouchState.ACQUIRING, FaceTouchState.RETRACTING),
    (FaceTouchState.APPROACHING, FaceTouchState.CONTACT),
    (FaceTouchState.APPROACHING, FaceTouchState.RETRACTING),
    (FaceTouchState.CONTACT, FaceTouchState.RETRACTING),
    (FaceTouchState.RETRACTING, FaceTouchState.DONE),
    (FaceTouchState.RETRACTING, FaceTouchState.ABORTED),
    (FaceTouchState.DONE, FaceTouchState.IDLE),
    (FaceTouchState.ABORTED, FaceTouchState.IDLE),
}


# --- simulated sensors ---


def compute_wrench(
    penetration: float,
    normal: Vec3,
    stiffness: float = 5000.0,
    noise_sigma: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    timestamp: float = 0.0,
) -> WrenchReading:
    """Linear-spring contact model: force = stiffness * penetration * normal."""
    if penetration < 0.0:
        raise ContractError("penetration must be >= 0")
    if penetration == 0.0:
        force = np.zeros(3)
    else:
        n = np.asarray(normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm < 1e-12:
            raise ContractError("contact normal must be nonzero")
        force = (stiffness * penetration / norm) * n
        if noise_sigma > 0.0 and rng is not None:
            force = force + rng.normal(0.0, noise_sigma, size=3)
    return WrenchReading(force=force, torque=np.zeros(3), timestamp=timestamp)


@dataclass
class CollisionDetector:
    """Force-magnitude threshold with hysteresis: asserts at ``threshold``,
    releases only below ``release_fraction * threshold``."""

    threshold: float = 10.0
    release_fraction: float = 0.8
    active: bool = False

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise ContractError("collision threshold must be > 0")
        if not 0.0 < self.release_fraction < 1.0:
            raise ContractError("release fraction must be in (0, 1)")

    def update(self, wrench: WrenchReading) -> bool:
        mag = wrench.magnitude()
        if self.active:
            if mag < self.release_fraction * self.threshold:
                self.active = False
        elif mag >= self.threshold:
            self.active = True
        return self.active


@dataclass
class CameraModel:
    """Frustum of the simulated wrist camera used for target acquisition."""

    fov_half_angle: float = math.radians(45.0)
    min_range: float = 0.05
    max_range: float = 2.5


def acquire_mouth_target(
    mouth_world: Vec3,
    camera_position: Vec3,
    camera_axis: Vec3,
    rng: np.random.Generator,
    noise_sigma: float = 0.005,
    camera: CameraModel | None = None,
) -> Optional[FaceTarget]:
    """Ground-truth mouth point plus seeded Gaussian noise, or None when the
    head is outside the camera frustum.  Confidence decays with range and
    off-axis angle."""
    camera = camera or CameraModel()
    axis = np.asarray(camera_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    rel = np.asarray(mouth_world, dtype=float) - np.asarray(camera_position, dtype=float)
    dist = float(np.linalg.norm(rel))
    if not camera.min_range <= dist <= camera.max_range:
        return None
    cos_off = float(rel @ axis) / dist
    if cos_off < math.cos(camera.fov_half_angle):
        return None
    noisy = np.asarray(mouth_world, dtype=float) + rng.normal(0.0, noise_sigma, size=3)
    confidence = max(0.0, min(1.0, (1.0 - dist / camera.max_range) * cos_off))
    return FaceTarget(
        mouth_position=noisy,
        confidence=confidence,
        measured_distance=dist,
    )


def plan_approach(
    ee_position: Vec3,
    target: FaceTarget,
    standoff: float = 0.10,
    max_reach: float = 2.0,
    reach_origin: Optional[Vec3] = None,
) -> Optional[list[Vec3]]:
    """Two-phase straight-line plan along the mouth-to-start ray.

    Returns [standoff_point, contact_point] (just [contact_point] when
    standoff is 0), or None when the standoff point lies beyond
    ``max_reach`` of ``reach_origin`` (planning failure -> abort).
    Keeping every waypoint on the same ray makes tool-to-mouth distance
    exactly monotone along the plan, which the retraction reverse relies
    on."""
    mouth = np.asarray(target.mouth_position, dtype=float)
    start = np.asarray(ee_position, dtype=float)
    away = start - mouth
    depth = float(np.linalg.norm(away))
    if depth < 1e-9:
        return None  # tool already at the mouth point; nothing sane to plan
    axis = away / depth
    waypoints = []
    if standoff > 0.0:
        waypoints.append(mouth + standoff * axis)
    waypoints.append(mouth.copy())
    origin = start if reach_origin is None else np.asarray(reach_origin, dtype=float)
    if float(np.linalg.norm(waypoints[0] - origin)) > max_reach:
        return None
    return waypoints


@dataclass
class FaceTouchConfig:
    standoff: float = 0.10  # m, pause point on the approach ray
    reduced_speed: float = 0.02  # m/s inside the standoff radius
    travel_speed: float = 0.15  # m/s outside it
    stiffness: float = 5000.0  # N/m contact spring
    collision_threshold: float = 10.0  # N
    release_fraction: float = 0.8
    touch_force_min: float = 2.0  # N, lower edge of a valid touch
    touch_hold: float = 0.2  # s of sustained touch for success
    target_noise_sigma: float = 0.005  # m
    acquire_retries: int = 30
    arrive_tol: float = 0.004  # m, waypoint arrival
    home_tol: float = 0.01  # m, retraction end
    tracking_abort_error: float = 0.25  # m, sustained servo error aborts
    tracking_abort_ticks: int = 100
    contact_grace_ticks: int = 50  # ticks to wait for force at the contact point


AcquireFn = Callable[[], Optional[FaceTarget]]


@dataclass
class StepResult:
    state: FaceTouchState
    command: Vec3  # world-frame tool linear velocity
    transitions: list[FaceTouchState] = field(default_factory=list)


class FaceTouchPipeline:
    """The supervised state machine.  One instance per simulation run.

    ``acquire`` is the injected target provider (ground-truth-plus-noise
    in the simulator; a real detector could sit behind the same callable).
    """

    def __init__(self, config: FaceTouchConfig | None = None, acquire: AcquireFn | None = None):
        self.config = config or FaceTouchConfig()
        self.acquire = acquire
        self.detector = CollisionDetector(
            threshold=self.config.collision_threshold,
            release_fraction=self.config.release_fraction,
        )
        self._state = FaceTouchState.IDLE
        self.target: Optional[FaceTarget] = None
        self.abort_reason: Optional[str] = None
        self.touch_success = False
        self._home: Optional[Vec3] = None
        self._waypoints: list[Vec3] = []
        self._wp_idx = 0
        self._paused_at_standoff = False
        self._path: list[Vec3] = []
        self._touch_time = 0.0
        self._retries = 0
        self._tracking_bad = 0
        self._no_contact_ticks = 0

    @property
    def state(self) -> FaceTouchState:
        return self._state

    @property
    def active(self) -> bool:
        return self._state in (
            FaceTouchState.ACQUIRING,
            FaceTouchState.APPROACHING,
            FaceTouchState.CONTACT,
            FaceTouchState.RETRACTING,
        )

    def _goto(self, new: FaceTouchState, trace: list[FaceTouchState]) -> None:
        if (self._state, new) not in _LEGAL_TRANSITIONS:
            raise ContractError(
                f"illegal face-touch transition {self._state.value} -> {new.value}"
            )
        self._state = new
        trace.append(new)

    def request_start(self, home_position: Vec3) -> bool:
        """Arm the pipeline.  Returns False (caller logs a warning) unless Idle."""
        if self._state is not FaceTouchState.IDLE:
            return False
        self._state = FaceTouchState.ACQUIRING
        self.target = None
        self.abort_reason = None
        self.touch_success = False
        self._home = np.asarray(home_position, dtype=float).copy()
        self._waypoints = []
        self._path = []
        self._touch_time = 0.0
        self._retries = self.config.acquire_retries
        self._tracking_bad = 0
        self._no_contact_ticks = 0
        self.detector.active = False
        return True

    def reset(self) -> None:
        """Return a terminal pipeline to Idle (harness convenience)."""
        if self.active:
            raise ContractError("cannot reset an active face-touch pipeline")
        self._state = FaceTouchState.IDLE

    # --- helpers ---

    def _mouth_distance(self, point: Vec3) -> float:
        assert self.target is not None
        return float(np.linalg.norm(point - self.target.mouth_position))

    def _speed_limit(self, at: Vec3) -> float:
        """Reduced speed inside the standoff radius, travel speed beyond."""
        if self.target is not None and self._mouth_distance(at) < self.config.standoff:
            return self.config.reduced_speed
        return self.config.travel_speed

    def _velocity_toward(self, ee: Vec3, waypoint: Vec3, dt: float, speed: float) -> Vec3:
        delta = waypoint - ee
        dist = float(np.linalg.norm(delta))
        if dist < 1e-12:
            return np.zeros(3)
        return delta * (min(speed, dist / dt) / dist)

    def _begin_retract(self, reason: Optional[str], trace: list[FaceTouchState]) -> None:
        if reason is not None and self.abort_reason is None:
            self.abort_reason = reason
        self._goto(FaceTouchState.RETRACTING, trace)

    def _finish(self, trace: list[FaceTouchState]) -> None:
        if self.touch_success:
            self._goto(FaceTouchState.DONE, trace)
        else:
            self._goto(FaceTouchState.ABORTED, trace)
            if self.abort_reason is None:
                self.abort_reason = "aborted"

    # --- the tick ---

    def step(
        self,
        ee_position: Vec3,
        wrench: WrenchReading,
        abort: bool,
        dt: float,
        tracking_error: float = 0.0,
    ) -> StepResult:
        """Advance one tick.  ``abort`` is the consumed voice/UI latch."""
        if dt <= 0.0:
            raise ContractError("dt must be > 0")
        ee = np.asarray(ee_position, dtype=float)
        trace: list[FaceTouchState] = []
        event = self.detector.update(wrench)
        zero = np.zeros(3)

        if self._state in (FaceTouchState.IDLE, FaceTouchState.DONE, FaceTouchState.ABORTED):
            return StepResult(self._state, zero, trace)

        if abort and self._state is not FaceTouchState.RETRACTING:
            self._begin_retract("voice", trace)
            return StepResult(self._state, zero, trace)

        if self._state is FaceTouchState.ACQUIRING:
            return self._step_acquiring(ee, trace)
        if self._state is FaceTouchState.APPROACHING:
            return self._step_approaching(ee, wrench, event, dt, tracking_error, trace)
        return self._step_retracting(ee, dt, trace)

    def _step_acquiring(self, ee: Vec3, trace: list[FaceTouchState]) -> StepResult:
        zero = np.zeros(3)
        if self.acquire is None:
            self._begin_retract("no target", trace)
            return StepResult(self._state, zero, trace)
        target = self.acquire()
        if target is None:
            self._retries -= 1
            if self._retries <= 0:
                self._begin_retract("no target", trace)
            return StepResult(self._state, zero, trace)
        plan = plan_approach(ee, target, self.config.standoff)
        if plan is None:
            self.target = target
            self._begin_retract("unreachable", trace)
            return StepResult(self._state, zero, trace)
        self.target = target
        self._waypoints = plan
        self._wp_idx = 0
        self._paused_at_standoff = False
        self._path = [ee.copy()]
        self._goto(FaceTouchState.APPROACHING, trace)
        return StepResult(self._state, zero, trace)

    def _step_approaching(
        self,
        ee: Vec3,
        wrench: WrenchReading,
        event: bool,
        dt: float,
        tracking_error: float,
        trace: list[FaceTouchState],
    ) -> StepResult:
        zero = np.zeros(3)
        if event:
            # Hard contact: pass through Contact and halt, all on this tick.
            self._goto(FaceTouchState.CONTACT, trace)
            self._begin_retract("collision", trace)
            return StepResult(self._state, zero, trace)

        if tracking_error > self.config.tracking_abort_error:
            self._tracking_bad += 1
            if self._tracking_bad >= self.config.tracking_abort_ticks:
                self._begin_retract("tracking", trace)
                return StepResult(self._state, zero, trace)
        else:
            self._tracking_bad = 0

        if wrench.magnitude() >= self.config.touch_force_min:
            # Valid touch window: hold position and accumulate.
            self._touch_time += dt
            if self._touch_time >= self.config.touch_hold:
                self.touch_success = True
                self._goto(FaceTouchState.CONTACT, trace)
                self._begin_retract(None, trace)
            return StepResult(self._state, zero, trace)
        self._touch_time = 0.0

        waypoint = self._waypoints[self._wp_idx]
        last = len(self._waypoints) - 1
        # Arrival tolerance applies to intermediate waypoints only; the final
        # contact leg is terminated by force, not by position.
        if self._wp_idx < last and float(np.linalg.norm(waypoint - ee)) <= self.config.arrive_tol:
            if not self._paused_at_standoff:
                # One-tick pause at the standoff point.
                self._paused_at_standoff = True
                self._path.append(ee.copy())
                return StepResult(self._state, zero, trace)
            self._wp_idx += 1
            waypoint = self._waypoints[self._wp_idx]
        if self._wp_idx == last and float(np.linalg.norm(waypoint - ee)) <= 5e-4:
            # Converged onto the planned contact point without any force: the
            # target estimate missed the face (a spring touch would have
            # registered millimetres earlier).  Wait a short grace window,
            # then give up rather than keep pressing toward a bad estimate.
            self._no_contact_ticks += 1
            if self._no_contact_ticks >= self.config.contact_grace_ticks:
                self._begin_retract("no contact", trace)
            return StepResult(self._state, zero, trace)
        # Final advance runs at reduced speed regardless of radius.
        speed = (
            self.config.reduced_speed
            if self._wp_idx == len(self._waypoints) - 1
            else min(self.config.travel_speed, self._speed_limit(ee))
        )
        cmd = self._velocity_toward(ee, waypoint, dt, speed)
        self._path.append(ee.copy())
        return StepResult(self._state, cmd, trace)

    def _step_retracting(self, ee: Vec3, dt: float, trace: list[FaceTouchState]) -> StepResult:
        zero = np.zeros(3)
        if self.target is not None:
            cur = self._mouth_distance(ee)
            # Drop recorded points that would shrink mouth distance while
            # still inside the standoff shell (monotone retreat).
            while self._path:
                tail = self._path[-1]
                if float(np.linalg.norm(tail - ee)) <= self.config.arrive_tol:
                    self._path.pop()
                    continue
                if cur < self.config.standoff and self._mouth_distance(tail) <= cur + 1e-12:
                    self._path.pop()
                    continue
                break
        else:
            self._path = []

        if self._path:
            waypoint = self._path[-1]
            cmd = self._velocity_toward(ee, waypoint, dt, self._speed_limit(ee))
            return StepResult(self._state, cmd, trace)

        assert self._home is not None
        if float(np.linalg.norm(self._home - ee)) <= self.config.home_tol:
            self._finish(trace)
            return StepResult(self._state, zero, trace)
        cmd = self._velocity_toward(ee, self._home, dt, self._speed_limit(ee))
        return StepResult(self._state, cmd, trace)
