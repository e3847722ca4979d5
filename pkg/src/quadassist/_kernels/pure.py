"""NumPy implementation of the kinematic hot kernels.

Mirrors the compiled extension in ``_core.pyx``; the two must agree to
numerical precision.  All functions take flat float64 arrays so either
backend can be dropped in behind :mod:`quadassist.kinematics`.

Frame layout returned by :func:`chain_frames`: index 0 is the base frame
(planar pose lifted to trunk height), indices 1..6 are the arm link frames
(after each joint's rotation), index 7 is the tool frame.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def _rot_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [x * y * t + z * s, c + y * y * t, y * z * t - x * s],
            [x * z * t - y * s, y * z * t + x * s, c + z * z * t],
        ]
    )


def chain_frames(origins, axes, q, base_height):
    """Compose the planar base transform with the 6-link arm chain.

    origins: (7, 3) joint origin offsets, row 6 is the tool offset.
    axes:    (6, 3) unit joint axes in the parent frame.
    q:       (9,) configuration [x, y, yaw, q1..q6].

    Returns (R, p, jpos, jax) with R (8,3,3), p (8,3) world frames and
    jpos/jax (6,3) world joint positions/axes for the Jacobian.
    """
    R = np.empty((8, 3, 3))
    p = np.empty((8, 3))
    jpos = np.empty((6, 3))
    jax = np.empty((6, 3))

    cy = np.cos(q[2])
    sy = np.sin(q[2])
    Rc = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    pc = np.array([q[0], q[1], base_height])
    R[0] = Rc
    p[0] = pc

    for i in range(6):
        pc = pc + Rc @ origins[i]
        jpos[i] = pc
        jax[i] = Rc @ axes[i]
        Rc = Rc @ _rot_axis(axes[i], q[3 + i])
        R[i + 1] = Rc
        p[i + 1] = pc

    p[7] = pc + Rc @ origins[6]
    R[7] = Rc
    return R, p, jpos, jax


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0 from a rotation matrix."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
        )
    elif R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array(
            [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array(
            [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
        )
    q = q / np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def ee_pose(origins, axes, q, base_height):
    """World end-effector position (3,) and quaternion (4,)."""
    R, p, _, _ = chain_frames(origins, axes, q, base_height)
    return p[7].copy(), quat_from_matrix(R[7])


def jacobian(origins, axes, q, base_height):
    """Geometric Jacobian (6, 9), linear rows 0..2, angular rows 3..5."""
    R, p, jpos, jax = chain_frames(origins, axes, q, base_height)
    pe = p[7]
    J = np.zeros((6, 9))
    J[0, 0] = 1.0
    J[1, 1] = 1.0
    # Base yaw: rotation about a vertical axis through (x, y).
    J[0, 2] = -(pe[1] - q[1])
    J[1, 2] = pe[0] - q[0]
    J[5, 2] = 1.0
    for i in range(6):
        a = jax[i]
        r = pe - jpos[i]
        J[0:3, 3 + i] = np.cross(a, r)
        J[3:6, 3 + i] = a
    return J


def dls_rates(J, v, weights, lam):
    """Weighted damped-least-squares rates: W^-1 J^T (J W^-1 J^T + lam^2 I)^-1 v."""
    winv = 1.0 / np.asarray(weights)
    JW = J * winv  # scales columns
    A = JW @ J.T + (lam * lam) * np.eye(6)
    y = np.linalg.solve(A, np.asarray(v, dtype=float))
    return JW.T @ y


def proxy_points(R, p, frame_idx, local):
    """World endpoints (N, 2, 3) of proxy segments attached to chain frames."""
    n = local.shape[0]
    out = np.empty((n, 2, 3))
    for i in range(n):
        f = frame_idx[i]
        out[i, 0] = p[f] + R[f] @ local[i, 0]
        out[i, 1] = p[f] + R[f] @ local[i, 1]
    return out


def _seg_seg_distance(p0, p1, q0, q1):
    """Minimum distance between segments [p0, p1] and [q0, q1]."""
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = d1 @ d1
    e = d2 @ d2
    f = d2 @ r
    eps = 1e-12
    if a <= eps and e <= eps:
        return float(np.linalg.norm(r))
    if a <= eps:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1 @ r
        if e <= eps:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1 @ d2
            denom = a * e - b * b
            if denom > eps:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    closest = p0 + s * d1 - (q0 + t * d2)
    return float(np.linalg.norm(closest))


def pair_separations(world_segs, radii, pairs):
    """Surface separation per proxy pair: center distance minus radius sum."""
    m = pairs.shape[0]
    out = np.empty(m)
    for k in range(m):
        i = pairs[k, 0]
        j = pairs[k, 1]
        d = _seg_seg_distance(world_segs[i, 0], world_segs[i, 1], world_segs[j, 0], world_segs[j, 1])
        out[k] = d - (radii[i] + radii[j])
    return out
