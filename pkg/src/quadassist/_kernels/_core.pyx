# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kinematic hot kernels.

Same contracts as quadassist._kernels.pure; see that module for the
reference semantics.  Kept scalar/loop-based so the two implementations
agree to floating-point roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs

cnp.import_array()

BACKEND = "compiled"


cdef inline void _rot_axis(double ax, double ay, double az, double angle,
                           double* R) nogil:
    cdef double c = cos(angle)
    cdef double s = sin(angle)
    cdef double t = 1.0 - c
    R[0] = c + ax * ax * t
    R[1] = ax * ay * t - az * s
    R[2] = ax * az * t + ay * s
    R[3] = ax * ay * t + az * s
    R[4] = c + ay * ay * t
    R[5] = ay * az * t - ax * s
    R[6] = ax * az * t - ay * s
    R[7] = ay * az * t + ax * s
    R[8] = c + az * az * t


cdef inline void _mat_mul(const double* A, const double* B, double* C) nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            C[3 * i + j] = 0.0
            for k in range(3):
                C[3 * i + j] += A[3 * i + k] * B[3 * k + j]


cdef inline void _mat_vec(const double* A, const double* v, double* out) nogil:
    cdef int i
    for i in range(3):
        out[i] = A[3 * i] * v[0] + A[3 * i + 1] * v[1] + A[3 * i + 2] * v[2]


cdef void _chain(const double[:, ::1] origins, const double[:, ::1] axes,
                 const double[::1] q, double base_height,
                 double[:, :, ::1] R, double[:, ::1] p,
                 double[:, ::1] jpos, double[:, ::1] jax) nogil:
    cdef double Rc[9]
    cdef double Rj[9]
    cdef double tmp[9]
    cdef double pc[3]
    cdef double off[3]
    cdef double w[3]
    cdef int i, k
    cdef double cy = cos(q[2])
    cdef double sy = sin(q[2])

    Rc[0] = cy; Rc[1] = -sy; Rc[2] = 0.0
    Rc[3] = sy; Rc[4] = cy;  Rc[5] = 0.0
    Rc[6] = 0.0; Rc[7] = 0.0; Rc[8] = 1.0
    pc[0] = q[0]; pc[1] = q[1]; pc[2] = base_height

    for k in range(9):
        R[0, k // 3, k % 3] = Rc[k]
    for k in range(3):
        p[0, k] = pc[k]

    for i in range(6):
        off[0] = origins[i, 0]; off[1] = origins[i, 1]; off[2] = origins[i, 2]
        _mat_vec(Rc, off, w)
        pc[0] += w[0]; pc[1] += w[1]; pc[2] += w[2]
        jpos[i, 0] = pc[0]; jpos[i, 1] = pc[1]; jpos[i, 2] = pc[2]
        off[0] = axes[i, 0]; off[1] = axes[i, 1]; off[2] = axes[i, 2]
        _mat_vec(Rc, off, w)
        jax[i, 0] = w[0]; jax[i, 1] = w[1]; jax[i, 2] = w[2]
        _rot_axis(axes[i, 0], axes[i, 1], axes[i, 2], q[3 + i], Rj)
        _mat_mul(Rc, Rj, tmp)
        for k in range(9):
            Rc[k] = tmp[k]
            R[i + 1, k // 3, k % 3] = Rc[k]
        for k in range(3):
            p[i + 1, k] = pc[k]

    off[0] = origins[6, 0]; off[1] = origins[6, 1]; off[2] = origins[6, 2]
    _mat_vec(Rc, off, w)
    for k in range(3):
        p[7, k] = pc[k] + w[k]
        for i in range(3):
            R[7, k, i] = Rc[3 * k + i]


def chain_frames(const double[:, ::1] origins, const double[:, ::1] axes,
                 const double[::1] q, double base_height):
    R = np.empty((8, 3, 3))
    p = np.empty((8, 3))
    jpos = np.empty((6, 3))
    jax = np.empty((6, 3))
    cdef double[:, :, ::1] Rv = R
    cdef double[:, ::1] pv = p
    cdef double[:, ::1] jposv = jpos
    cdef double[:, ::1] jaxv = jax
    _chain(origins, axes, q, base_height, Rv, pv, jposv, jaxv)
    return R, p, jpos, jax


def quat_from_matrix(const double[:, :] R):
    cdef double tr = R[0, 0] + R[1, 1] + R[2, 2]
    cdef double s
    cdef double qw, qx, qy, qz, n
    if tr > 0.0:
        s = sqrt(tr + 1.0) * 2.0
        qw = 0.25 * s
        qx = (R[2, 1] - R[1, 2]) / s
        qy = (R[0, 2] - R[2, 0]) / s
        qz = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        qw = (R[2, 1] - R[1, 2]) / s
        qx = 0.25 * s
        qy = (R[0, 1] + R[1, 0]) / s
        qz = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        qw = (R[0, 2] - R[2, 0]) / s
        qx = (R[0, 1] + R[1, 0]) / s
        qy = 0.25 * s
        qz = (R[1, 2] + R[2, 1]) / s
    else:
        s = sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        qw = (R[1, 0] - R[0, 1]) / s
        qx = (R[0, 2] + R[2, 0]) / s
        qy = (R[1, 2] + R[2, 1]) / s
        qz = 0.25 * s
    n = sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
    qw /= n; qx /= n; qy /= n; qz /= n
    if qw < 0.0:
        qw = -qw; qx = -qx; qy = -qy; qz = -qz
    return np.array([qw, qx, qy, qz])


def ee_pose(const double[:, ::1] origins, const double[:, ::1] axes,
            const double[::1] q, double base_height):
    R, p, _, _ = chain_frames(origins, axes, q, base_height)
    return p[7].copy(), quat_from_matrix(R[7])


def jacobian(const double[:, ::1] origins, const double[:, ::1] axes,
             const double[::1] q, double base_height):
    R, p, jpos, jax = chain_frames(origins, axes, q, base_height)
    J = np.zeros((6, 9))
    cdef double[:, ::1] Jv = J
    cdef double[:, ::1] jposv = jpos
    cdef double[:, ::1] jaxv = jax
    cdef double[:, ::1] pv = p
    cdef double pe0 = pv[7, 0], pe1 = pv[7, 1], pe2 = pv[7, 2]
    cdef double ax, ay, az, rx, ry, rz
    cdef int i
    Jv[0, 0] = 1.0
    Jv[1, 1] = 1.0
    Jv[0, 2] = -(pe1 - q[1])
    Jv[1, 2] = pe0 - q[0]
    Jv[5, 2] = 1.0
    for i in range(6):
        ax = jaxv[i, 0]; ay = jaxv[i, 1]; az = jaxv[i, 2]
        rx = pe0 - jposv[i, 0]; ry = pe1 - jposv[i, 1]; rz = pe2 - jposv[i, 2]
        Jv[0, 3 + i] = ay * rz - az * ry
        Jv[1, 3 + i] = az * rx - ax * rz
        Jv[2, 3 + i] = ax * ry - ay * rx
        Jv[3, 3 + i] = ax
        Jv[4, 3 + i] = ay
        Jv[5, 3 + i] = az
    return J


def dls_rates(const double[:, ::1] J, const double[::1] v,
              const double[::1] weights, double lam):
    """Weighted damped-least-squares rates, 6x6 Cholesky solve."""
    cdef double JW[6][9]
    cdef double A[6][6]
    cdef double L[6][6]
    cdef double y[6]
    cdef double z[6]
    cdef int i, j, k
    cdef double acc
    out = np.zeros(9)
    cdef double[::1] outv = out

    for i in range(6):
        for j in range(9):
            JW[i][j] = J[i, j] / weights[j]
    for i in range(6):
        for j in range(6):
            acc = 0.0
            for k in range(9):
                acc += JW[i][k] * J[j, k]
            A[i][j] = acc
        A[i][i] += lam * lam

    # Cholesky factorization A = L L^T (A is SPD for lam > 0).
    for i in range(6):
        for j in range(i + 1):
            acc = A[i][j]
            for k in range(j):
                acc -= L[i][k] * L[j][k]
            if i == j:
                L[i][i] = sqrt(acc)
            else:
                L[i][j] = acc / L[j][j]

    for i in range(6):
        acc = v[i]
        for k in range(i):
            acc -= L[i][k] * y[k]
        y[i] = acc / L[i][i]
    for i in range(5, -1, -1):
        acc = y[i]
        for k in range(i + 1, 6):
            acc -= L[k][i] * z[k]
        z[i] = acc / L[i][i]

    for j in range(9):
        acc = 0.0
        for i in range(6):
            acc += JW[i][j] * z[i]
        outv[j] = acc
    return out


def proxy_points(const double[:, :, ::1] R, const double[:, ::1] p,
                 const long long[::1] frame_idx, const double[:, :, ::1] local):
    cdef int n = local.shape[0]
    out = np.empty((n, 2, 3))
    cdef double[:, :, ::1] ov = out
    cdef int i, e, k
    cdef long long f
    for i in range(n):
        f = frame_idx[i]
        for e in range(2):
            for k in range(3):
                ov[i, e, k] = (p[f, k] + R[f, k, 0] * local[i, e, 0]
                               + R[f, k, 1] * local[i, e, 1]
                               + R[f, k, 2] * local[i, e, 2])
    return out


cdef inline double _clamp01(double x) nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef double _seg_seg(const double* p0, const double* p1,
                     const double* q0, const double* q1) nogil:
    cdef double d1[3]
    cdef double d2[3]
    cdef double r[3]
    cdef double a = 0.0, e = 0.0, f = 0.0, c = 0.0, b = 0.0
    cdef double s, t, denom, dx, dist
    cdef int k
    cdef double eps = 1e-12
    for k in range(3):
        d1[k] = p1[k] - p0[k]
        d2[k] = q1[k] - q0[k]
        r[k] = p0[k] - q0[k]
        a += d1[k] * d1[k]
        e += d2[k] * d2[k]
        f += d2[k] * r[k]
        c += d1[k] * r[k]
        b += d1[k] * d2[k]
    if a <= eps and e <= eps:
        s = 0.0; t = 0.0
    elif a <= eps:
        s = 0.0
        t = _clamp01(f / e)
    elif e <= eps:
        t = 0.0
        s = _clamp01(-c / a)
    else:
        denom = a * e - b * b
        if denom > eps:
            s = _clamp01((b * f - c * e) / denom)
        else:
            s = 0.0
        t = (b * s + f) / e
        if t < 0.0:
            t = 0.0
            s = _clamp01(-c / a)
        elif t > 1.0:
            t = 1.0
            s = _clamp01((b - c) / a)
    dist = 0.0
    for k in range(3):
        dx = p0[k] + s * d1[k] - (q0[k] + t * d2[k])
        dist += dx * dx
    return sqrt(dist)


def pair_separations(const double[:, :, ::1] world_segs, const double[::1] radii,
                     const long long[:, ::1] pairs):
    cdef int m = pairs.shape[0]
    out = np.empty(m)
    cdef double[::1] ov = out
    cdef int k
    cdef long long i, j
    for k in range(m):
        i = pairs[k, 0]
        j = pairs[k, 1]
        ov[k] = _seg_seg(&world_segs[i, 0, 0], &world_segs[i, 1, 0],
                         &world_segs[j, 0, 0], &world_segs[j, 1, 0]) - (radii[i] + radii[j])
    return out
