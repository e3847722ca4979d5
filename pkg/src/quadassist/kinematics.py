"""9-DoF robot model: planar base (x, y, yaw) plus a 6-joint arm.

Forward kinematics, geometric Jacobian, weighted damped-least-squares
whole-body differential control with joint-limit and self-collision
guards, and explicit-Euler integration.  The heavy lifting happens in
:mod:`quadassist._kernels`, which exists in a compiled and a NumPy
flavor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from quadassist import _kernels as K
from quadassist.errors import ContractError
from quadassist.model import ARM_DOF, RobotModel
from quadassist.router import EETwistCommand

AVOIDANCE_BAND = 0.02  # distance above the margin where null-space avoidance engages
WALL_GAP = 0.005  # shell above the margin treated as a hard wall constraint
WALL_CLIMB = 1.0  # per-second relaxation rate back out of the wall shell


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass
class RobotConfiguration:
    """Generalized coordinates: planar base pose + 6 arm joint angles."""

    base_x: float = 0.0
    base_y: float = 0.0
    base_yaw: float = 0.0
    arm_q: np.ndarray = field(default_factory=lambda: np.zeros(ARM_DOF))

    def as_vector(self) -> np.ndarray:
        q = np.empty(9)
        q[0] = self.base_x
        q[1] = self.base_y
        q[2] = self.base_yaw
        q[3:] = self.arm_q
        return q

    @staticmethod
    def from_vector(q: np.ndarray) -> "RobotConfiguration":
        return RobotConfiguration(float(q[0]), float(q[1]), float(q[2]), np.array(q[3:9]))

    def copy(self) -> "RobotConfiguration":
        return RobotConfiguration(self.base_x, self.base_y, self.base_yaw, self.arm_q.copy())


@dataclass
class EEPose:
    """World end-effector pose; quaternion is (w, x, y, z), unit norm."""

    position: np.ndarray
    orientation: np.ndarray


@dataclass
class WholeBodyWeights:
    """Per-DoF motion penalties (base DoF penalized so the arm moves first)."""

    penalties: np.ndarray = field(
        default_factory=lambda: np.array([10.0, 10.0, 10.0, 1, 1, 1, 1, 1, 1], dtype=float)
    )
    damping: float = 0.05

    def __post_init__(self):
        self.penalties = np.asarray(self.penalties, dtype=float)
        if self.penalties.shape != (9,) or np.any(self.penalties <= 0.0):
            raise ContractError("whole-body penalties must be 9 positive values")
        if self.damping <= 0.0:
            raise ContractError("damping must be > 0")


def forward_kinematics(config: RobotConfiguration, model: RobotModel) -> EEPose:
    pos, quat = K.ee_pose(model.origins, model.axes, config.as_vector(), model.base_height)
    return EEPose(position=pos, orientation=quat)


def jacobian(config: RobotConfiguration, model: RobotModel) -> np.ndarray:
    """6x9 geometric Jacobian, world frame, linear rows then angular rows."""
    return K.jacobian(model.origins, model.axes, config.as_vector(), model.base_height)


def twist_vector(cmd: EETwistCommand) -> np.ndarray:
    return np.array([cmd.vx, cmd.vy, cmd.vz, cmd.wroll, cmd.wpitch, cmd.wyaw])


def _min_separation(q: np.ndarray, model: RobotModel, margin: float) -> float:
    if model.pairs.shape[0] == 0:
        return math.inf
    R, p, _, _ = K.chain_frames(model.origins, model.axes, q, model.base_height)
    segs = K.proxy_points(R, p, model.proxy_frames, model.proxy_locals)
    seps = K.pair_separations(segs, model.proxy_radii, model.pairs)
    return float(np.min(seps)) - margin


def check_self_collision(
    config: RobotConfiguration, model: RobotModel, margin: float = 0.0
) -> list[tuple[str, str]]:
    """All proxy pairs with surface separation below ``margin``."""
    if model.pairs.shape[0] == 0:
        return []
    q = config.as_vector()
    R, p, _, _ = K.chain_frames(model.origins, model.axes, q, model.base_height)
    segs = K.proxy_points(R, p, model.proxy_frames, model.proxy_locals)
    seps = K.pair_separations(segs, model.proxy_radii, model.pairs)
    hits = []
    for k in np.nonzero(seps < margin)[0]:
        i, j = model.pairs[k]
        hits.append((model.proxies[i].name, model.proxies[j].name))
    return hits


def solve_whole_body_rates(
    config: RobotConfiguration,
    target_twist: EETwistCommand,
    weights: WholeBodyWeights,
    model: RobotModel,
    *,
    lookahead_dt: float = 0.01,
    collision_margin: float = 0.02,
    limit_buffer: float = 0.01,
    avoidance_gain: float = 25.0,
    lock_base_xy: bool = False,
) -> np.ndarray:
    """Weighted DLS rates for a desired EE twist, with safety projections.

    After the damped solve: rate components that would push a joint past a
    limit (within ``limit_buffer``) are removed and the reduced system is
    re-solved; proxy pairs inside a thin shell above ``collision_margin``
    become velocity constraints the solution must separate along; and a
    one-step lookahead at ``lookahead_dt`` scales the arm rates down if
    they would still land a pair inside the margin.  ``lock_base_xy``
    enforces the per-session base-assist travel cap by removing base
    translation from the solution space.
    """
    v = twist_vector(target_twist)
    if not np.all(np.isfinite(v)):
        raise ContractError("target twist must be finite")
    q = config.as_vector()
    J = K.jacobian(model.origins, model.axes, q, model.base_height)

    if lock_base_xy:
        J = J.copy()
        J[:, 0] = 0.0
        J[:, 1] = 0.0
    rates = K.dls_rates(J, v, weights.penalties, weights.damping)

    # Null-space self-collision avoidance: while a command is active and a
    # proxy pair is near the margin, reconfigure away from it inside the
    # task null space.  First order this leaves the commanded twist alone,
    # and it steers the arm out of blocked branches instead of letting the
    # guard below park it against the wall.  Gated on a nonzero command so
    # zero twist stays an exact fixed point.
    g9 = None
    seps = None
    if model.pairs.shape[0] and np.any(v):
        seps = _pair_separations(q, model)
        band = collision_margin + AVOIDANCE_BAND
        active = np.nonzero(seps < band)[0]
        if active.size:
            G = _active_pair_gradients(q, model, active)
            push = (band - seps[active]) @ G
            g9 = np.zeros(9)
            g9[3:] = avoidance_gain * push
            rates = rates + g9 - K.dls_rates(J, J @ g9, weights.penalties, weights.damping)

    # Joint-limit handling: never drive a near-limit joint further in.  A
    # saturated joint's column is removed and the system re-solved, so the
    # remaining DoF serve the command instead of just losing the saturated
    # component of the motion.
    blocked = np.zeros(9, dtype=bool)
    for _ in range(ARM_DOF):
        newly_blocked = False
        for i in range(ARM_DOF):
            k = 3 + i
            if blocked[k]:
                continue
            lo, hi = model.limits[i]
            if (q[k] >= hi - limit_buffer and rates[k] > 0.0) or (
                q[k] <= lo + limit_buffer and rates[k] < 0.0
            ):
                blocked[k] = True
                newly_blocked = True
        if not newly_blocked:
            break
        Jm = J.copy()
        Jm[:, blocked] = 0.0
        rates = K.dls_rates(Jm, v, weights.penalties, weights.damping)
        if g9 is not None:
            rates = rates + g9 - K.dls_rates(Jm, Jm @ g9, weights.penalties, weights.damping)
        rates[blocked] = 0.0

    # Wall shell: pairs closer than margin + WALL_GAP must separate at least
    # at the shell-relaxation rate.  Re-solving with the wall as an equality
    # constraint keeps tracking alive in the wall's tangent space, where
    # plain shaving of the inward component stalls millimetres short of the
    # goal; the remaining task twist is still served as well as the damped
    # objective allows.
    if seps is not None and np.any(rates):
        shell = collision_margin + WALL_GAP
        walls = np.nonzero(seps < shell)[0]
        if walls.size:
            G = _active_pair_gradients(q, model, walls)
            C = np.zeros((walls.size, 9))
            C[:, 3:] = G
            C[:, blocked] = 0.0
            d = WALL_CLIMB * (shell - seps[walls])
            Jm = J
            if np.any(blocked):
                Jm = J.copy()
                Jm[:, blocked] = 0.0
            active_walls: list[int] = []
            for _ in range(walls.size):
                viol = [
                    i
                    for i in range(walls.size)
                    if i not in active_walls and C[i] @ rates < d[i] - 1e-12
                ]
                if not viol:
                    break
                active_walls.extend(viol)
                Ca = C[active_walls]
                rates = _constrained_dls(
                    Jm, v, weights.penalties, weights.damping, Ca, d[active_walls]
                )
                if g9 is not None:
                    rates = rates + g9 - _constrained_dls(
                        Jm, Jm @ g9, weights.penalties, weights.damping, Ca, Ca @ g9
                    )
                rates[blocked] = 0.0
            if active_walls:
                _zero_inward_limit_rates(q, rates, model, limit_buffer)

    # Self-collision guard.  Base DoF move every proxy rigidly together and
    # cannot change self-separations, so only the arm block is guarded;
    # that also lets the base carry the system out of a blocked pose.
    if model.pairs.shape[0] and np.any(rates[3:]):
        guarded, modified = _guard_arm_rates(
            q, rates[3:], model, lookahead_dt, collision_margin
        )
        if modified:
            rates = rates.copy()
            rates[3:] = guarded
            _zero_inward_limit_rates(q, rates, model, limit_buffer)
            # The shaved arm rates leave part of the twist untracked.  Give
            # the remainder to the base at unit weight: when the arm is
            # pinned against the margin, base assistance overrides the
            # usual motion preference instead of letting tracking collapse.
            resid = v - J @ rates
            jb = J[:, :3]
            A = jb.T @ jb + weights.damping**2 * np.eye(3)
            rates[:3] += np.linalg.solve(A, jb.T @ resid)
    return rates


def _pair_separations(q: np.ndarray, model: RobotModel) -> np.ndarray:
    R, p, _, _ = K.chain_frames(model.origins, model.axes, q, model.base_height)
    segs = K.proxy_points(R, p, model.proxy_frames, model.proxy_locals)
    return K.pair_separations(segs, model.proxy_radii, model.pairs)


def _active_pair_gradients(
    q: np.ndarray, model: RobotModel, active: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """d(separation)/d(arm_q) for the given pair indices, central differences."""
    G = np.zeros((active.size, ARM_DOF))
    for i in range(ARM_DOF):
        qp = q.copy()
        qm = q.copy()
        qp[3 + i] += h
        qm[3 + i] -= h
        sp = _pair_separations(qp, model)[active]
        sm = _pair_separations(qm, model)[active]
        G[:, i] = (sp - sm) / (2 * h)
    return G


def _constrained_dls(
    J: np.ndarray,
    v: np.ndarray,
    penalties: np.ndarray,
    damping: float,
    C: np.ndarray,
    d: np.ndarray,
) -> np.ndarray:
    """Damped least-squares rates subject to linear equalities C q̇ = d.

    KKT system of min ‖Jq̇ - v‖² + λ²‖W^½q̇‖².  The Hessian block is
    positive definite for λ > 0; the small negative diagonal on the dual
    block keeps the system solvable when constraint rows are near-parallel.
    """
    n = J.shape[1]
    k = C.shape[0]
    H = J.T @ J + damping**2 * np.diag(penalties)
    kkt = np.block([[H, C.T], [C, -1e-10 * np.eye(k)]])
    rhs = np.concatenate([J.T @ v, d])
    return np.linalg.solve(kkt, rhs)[:n]


def _zero_inward_limit_rates(
    q: np.ndarray, rates: np.ndarray, model: RobotModel, limit_buffer: float
) -> None:
    """In place, drop rate components driving a near-limit joint further in."""
    for i in range(ARM_DOF):
        lo, hi = model.limits[i]
        k = 3 + i
        if (q[k] >= hi - limit_buffer and rates[k] > 0.0) or (
            q[k] <= lo + limit_buffer and rates[k] < 0.0
        ):
            rates[k] = 0.0


def _guard_arm_rates(
    q: np.ndarray,
    arm_rates: np.ndarray,
    model: RobotModel,
    lookahead_dt: float,
    margin: float,
) -> tuple[np.ndarray, bool]:
    """Arm rates scaled (and if needed slid along the margin surface) so a
    one-step lookahead never worsens a pair already at the margin and never
    enters it from outside.  Returns (rates, modified)."""
    seps_now = _pair_separations(q, model)
    sep_now = float(seps_now.min()) - margin
    step = np.zeros(9)

    def clear(cand: np.ndarray) -> bool:
        step[3:] = lookahead_dt * cand
        sep_next = float(_pair_separations(q + step, model).min()) - margin
        # Tiny slack keeps curvature from rejecting a first-order tangent
        # step; it cannot accumulate into an actual overlap because the
        # margin is two orders of magnitude larger.
        return sep_next >= 0.0 or sep_next >= sep_now - 1e-7

    if clear(arm_rates):
        return arm_rates, False
    scale = 0.5
    for _ in range(7):
        if clear(scale * arm_rates):
            return scale * arm_rates, True
        scale *= 0.5

    # Fully blocked: the command points into the margin wall, possibly a
    # corner where several pairs are active at once.  Cyclic projection
    # removes the inward component for every active pair, leaving a rate
    # vector that slides along the constraint surface instead of freezing.
    active = np.nonzero(seps_now < margin + 0.01)[0]
    if active.size:
        G = _active_pair_gradients(q, model, active)
        slid = arm_rates.copy()
        for _ in range(4):
            for g in G:
                gg = float(g @ g)
                if gg > 1e-18:
                    inward = float(g @ slid)
                    if inward < 0.0:
                        slid -= (inward / gg) * g
        scale = 1.0
        for _ in range(8):
            if clear(scale * slid):
                return scale * slid, True
            scale *= 0.5
    return np.zeros(ARM_DOF), True


def integrate_rates(
    config: RobotConfiguration, rates: np.ndarray, dt: float, model: RobotModel
) -> RobotConfiguration:
    """Explicit Euler step; arm joints clamped to limits, yaw wrapped."""
    if dt <= 0.0:
        raise ContractError("dt must be > 0")
    q = config.as_vector() + dt * np.asarray(rates, dtype=float)
    q[2] = wrap_angle(q[2])
    q[3:] = np.clip(q[3:], model.limits[:, 0], model.limits[:, 1])
    return RobotConfiguration.from_vector(q)


def quat_rotation_angle(qa: np.ndarray, qb: np.ndarray) -> float:
    """Angle of the relative rotation between two unit quaternions (radians)."""
    dot = abs(float(np.dot(qa, qb)))
    return 2.0 * math.acos(min(1.0, dot))


def pose_error_twist(
    current: EEPose,
    target: EEPose,
    kp_lin: float = 4.0,
    kp_ang: float = 4.0,
    lin_cap: float = 0.25,
    ang_cap: float = 0.5,
) -> EETwistCommand:
    """Proportional pose-tracking twist, capped to the given rate limits."""
    dv = kp_lin * (target.position - current.position)
    n = float(np.linalg.norm(dv))
    if n > lin_cap:
        dv *= lin_cap / n
    # Orientation error as a rotation vector from the relative quaternion.
    w0, x0, y0, z0 = current.orientation
    w1, x1, y1, z1 = target.orientation
    # q_err = q_target * conj(q_current)
    ew = w1 * w0 + x1 * x0 + y1 * y0 + z1 * z0
    ex = -w1 * x0 + x1 * w0 - y1 * z0 + z1 * y0
    ey = -w1 * y0 + x1 * z0 + y1 * w0 - z1 * x0
    ez = -w1 * z0 - x1 * y0 + y1 * x0 + z1 * w0
    if ew < 0.0:
        ew, ex, ey, ez = -ew, -ex, -ey, -ez
    s = math.sqrt(max(0.0, 1.0 - ew * ew))
    if s < 1e-12:
        dw = np.zeros(3)
    else:
        angle = 2.0 * math.acos(min(1.0, ew))
        dw = kp_ang * angle * np.array([ex, ey, ez]) / s
    n = float(np.linalg.norm(dw))
    if n > ang_cap:
        dw *= ang_cap / n
    return EETwistCommand(dv[0], dv[1], dv[2], dw[0], dw[1], dw[2])
