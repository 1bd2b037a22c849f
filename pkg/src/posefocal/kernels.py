"""Hot numeric kernels over point sets and batches of states.

Every kernel exists twice: a numba version written as explicit loops
(``*_numba``) and a vectorised numpy version (``*_numpy``). The public name
is bound to one of them at import time, see :mod:`posefocal._accel`.
Both variants are always importable so they can be compared and benchmarked.

Arrays are float64. Point sets are ``(N, 3)``; batches of rotations are
``(n, 3, 3)``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "project_points",
    "pose_l1_mean",
    "pose_l2_mean",
    "rows_l1_sum",
    "rows_l2_mean",
    "apply_update_batch",
    "ideal_update_batch",
    "KERNELS",
]


# --------------------------------------------------------------------------
# projection


def _project_points_numpy(R, t, f, cx, cy, pts):
    cam = pts @ R.T + t
    z = cam[:, 2]
    uv = np.empty((pts.shape[0], 2))
    # callers reject z <= eps themselves; inf/nan here is expected, not an error
    with np.errstate(divide="ignore", invalid="ignore"):
        uv[:, 0] = f * cam[:, 0] / z + cx
        uv[:, 1] = f * cam[:, 1] / z + cy
    return uv, z


@njit
def _project_points_numba(R, t, f, cx, cy, pts):
    n = pts.shape[0]
    uv = np.empty((n, 2))
    z = np.empty(n)
    for i in range(n):
        px = pts[i, 0]
        py = pts[i, 1]
        pz = pts[i, 2]
        xc = R[0, 0] * px + R[0, 1] * py + R[0, 2] * pz + t[0]
        yc = R[1, 0] * px + R[1, 1] * py + R[1, 2] * pz + t[1]
        zc = R[2, 0] * px + R[2, 1] * py + R[2, 2] * pz + t[2]
        z[i] = zc
        uv[i, 0] = f * xc / zc + cx
        uv[i, 1] = f * yc / zc + cy
    return uv, z


# --------------------------------------------------------------------------
# point-set distances between two rigid transforms


def _pose_l1_mean_numpy(R1, t1, R2, t2, pts):
    d = (pts @ R1.T + t1) - (pts @ R2.T + t2)
    return float(np.abs(d).sum(axis=1).mean())


@njit
def _pose_l1_mean_numba(R1, t1, R2, t2, pts):
    n = pts.shape[0]
    acc = 0.0
    for i in range(n):
        s = 0.0
        for r in range(3):
            a = R1[r, 0] * pts[i, 0] + R1[r, 1] * pts[i, 1] + R1[r, 2] * pts[i, 2] + t1[r]
            b = R2[r, 0] * pts[i, 0] + R2[r, 1] * pts[i, 1] + R2[r, 2] * pts[i, 2] + t2[r]
            s += abs(a - b)
        acc += s
    return acc / n


def _pose_l2_mean_numpy(R1, t1, R2, t2, pts):
    d = (pts @ R1.T + t1) - (pts @ R2.T + t2)
    return float(np.sqrt((d * d).sum(axis=1)).mean())


@njit
def _pose_l2_mean_numba(R1, t1, R2, t2, pts):
    n = pts.shape[0]
    acc = 0.0
    for i in range(n):
        s = 0.0
        for r in range(3):
            a = R1[r, 0] * pts[i, 0] + R1[r, 1] * pts[i, 1] + R1[r, 2] * pts[i, 2] + t1[r]
            b = R2[r, 0] * pts[i, 0] + R2[r, 1] * pts[i, 1] + R2[r, 2] * pts[i, 2] + t2[r]
            s += (a - b) * (a - b)
        acc += np.sqrt(s)
    return acc / n


# --------------------------------------------------------------------------
# row-wise reductions on matched 2D point sets


def _rows_l1_sum_numpy(a, b):
    return float(np.abs(a - b).sum())


@njit
def _rows_l1_sum_numba(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            acc += abs(a[i, j] - b[i, j])
    return acc


def _rows_l2_mean_numpy(a, b):
    d = a - b
    return float(np.sqrt((d * d).sum(axis=1)).mean())


@njit
def _rows_l2_mean_numba(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        s = 0.0
        for j in range(a.shape[1]):
            s += (a[i, j] - b[i, j]) * (a[i, j] - b[i, j])
        acc += np.sqrt(s)
    return acc / a.shape[0]


# --------------------------------------------------------------------------
# batched update rule
#
# Returns (f_new, t_new, R_new, bad) where ``bad`` flags rows whose 6D
# rotation input is degenerate (norm below eps_gs) or whose v_z <= 0.


def _apply_update_batch_numpy(f, t, R, v_xy, v_z, v_r1, v_r2, v_f, eps_gs):
    f_new = np.exp(v_f) * f
    z_new = v_z * t[:, 2]
    t_new = np.empty_like(t)
    t_new[:, 0] = v_xy[:, 0] * z_new / f_new + v_z * t[:, 0]
    t_new[:, 1] = v_xy[:, 1] * z_new / f_new + v_z * t[:, 1]
    t_new[:, 2] = z_new

    n1 = np.sqrt((v_r1 * v_r1).sum(axis=1))
    bad = (n1 <= eps_gs) | (v_z <= 0.0)
    e1 = v_r1 / np.where(n1 > eps_gs, n1, 1.0)[:, None]
    u2 = v_r2 - (e1 * v_r2).sum(axis=1)[:, None] * e1
    n2 = np.sqrt((u2 * u2).sum(axis=1))
    bad |= n2 <= eps_gs
    e2 = u2 / np.where(n2 > eps_gs, n2, 1.0)[:, None]
    e3 = np.cross(e1, e2)
    dR = np.stack([e1, e2, e3], axis=2)
    R_new = dR @ R
    return f_new, t_new, R_new, bad


@njit
def _apply_update_batch_numba(f, t, R, v_xy, v_z, v_r1, v_r2, v_f, eps_gs):
    n = f.shape[0]
    f_new = np.empty(n)
    t_new = np.empty((n, 3))
    R_new = np.empty((n, 3, 3))
    bad = np.zeros(n, dtype=np.bool_)
    dR = np.empty((3, 3))
    for i in range(n):
        fn = np.exp(v_f[i]) * f[i]
        zn = v_z[i] * t[i, 2]
        f_new[i] = fn
        t_new[i, 0] = v_xy[i, 0] * zn / fn + v_z[i] * t[i, 0]
        t_new[i, 1] = v_xy[i, 1] * zn / fn + v_z[i] * t[i, 1]
        t_new[i, 2] = zn
        if v_z[i] <= 0.0:
            bad[i] = True

        a0 = v_r1[i, 0]
        a1 = v_r1[i, 1]
        a2 = v_r1[i, 2]
        n1 = np.sqrt(a0 * a0 + a1 * a1 + a2 * a2)
        if n1 <= eps_gs:
            bad[i] = True
            n1 = 1.0
        e10 = a0 / n1
        e11 = a1 / n1
        e12 = a2 / n1
        d = e10 * v_r2[i, 0] + e11 * v_r2[i, 1] + e12 * v_r2[i, 2]
        u0 = v_r2[i, 0] - d * e10
        u1 = v_r2[i, 1] - d * e11
        u2 = v_r2[i, 2] - d * e12
        n2 = np.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
        if n2 <= eps_gs:
            bad[i] = True
            n2 = 1.0
        e20 = u0 / n2
        e21 = u1 / n2
        e22 = u2 / n2
        dR[0, 0] = e10
        dR[1, 0] = e11
        dR[2, 0] = e12
        dR[0, 1] = e20
        dR[1, 1] = e21
        dR[2, 1] = e22
        dR[0, 2] = e11 * e22 - e12 * e21
        dR[1, 2] = e12 * e20 - e10 * e22
        dR[2, 2] = e10 * e21 - e11 * e20
        for r in range(3):
            for c in range(3):
                R_new[i, r, c] = dR[r, 0] * R[i, 0, c] + dR[r, 1] * R[i, 1, c] + dR[r, 2] * R[i, 2, c]
    return f_new, t_new, R_new, bad


def _ideal_update_batch_numpy(f, t, R, f_hat, t_hat, R_hat):
    v_f = np.log(f_hat / f)
    v_z = t_hat[:, 2] / t[:, 2]
    v_xy = f_hat[:, None] * (t_hat[:, :2] / t_hat[:, 2:3] - t[:, :2] / t[:, 2:3])
    dR = R_hat @ np.transpose(R, (0, 2, 1))
    return v_xy, v_z, dR[:, :, 0].copy(), dR[:, :, 1].copy(), v_f


@njit
def _ideal_update_batch_numba(f, t, R, f_hat, t_hat, R_hat):
    n = f.shape[0]
    v_xy = np.empty((n, 2))
    v_z = np.empty(n)
    v_r1 = np.empty((n, 3))
    v_r2 = np.empty((n, 3))
    v_f = np.empty(n)
    for i in range(n):
        v_f[i] = np.log(f_hat[i] / f[i])
        v_z[i] = t_hat[i, 2] / t[i, 2]
        v_xy[i, 0] = f_hat[i] * (t_hat[i, 0] / t_hat[i, 2] - t[i, 0] / t[i, 2])
        v_xy[i, 1] = f_hat[i] * (t_hat[i, 1] / t_hat[i, 2] - t[i, 1] / t[i, 2])
        # columns 0 and 1 of R_hat @ R^T
        for r in range(3):
            v_r1[i, r] = R_hat[i, r, 0] * R[i, 0, 0] + R_hat[i, r, 1] * R[i, 0, 1] + R_hat[i, r, 2] * R[i, 0, 2]
            v_r2[i, r] = R_hat[i, r, 0] * R[i, 1, 0] + R_hat[i, r, 1] * R[i, 1, 1] + R_hat[i, r, 2] * R[i, 1, 2]
    return v_xy, v_z, v_r1, v_r2, v_f


KERNELS = {
    "project_points": (_project_points_numpy, _project_points_numba),
    "pose_l1_mean": (_pose_l1_mean_numpy, _pose_l1_mean_numba),
    "pose_l2_mean": (_pose_l2_mean_numpy, _pose_l2_mean_numba),
    "rows_l1_sum": (_rows_l1_sum_numpy, _rows_l1_sum_numba),
    "rows_l2_mean": (_rows_l2_mean_numpy, _rows_l2_mean_numba),
    "apply_update_batch": (_apply_update_batch_numpy, _apply_update_batch_numba),
    "ideal_update_batch": (_ideal_update_batch_numpy, _ideal_update_batch_numba),
}
"""Name -> (numpy implementation, numba implementation)."""

_which = 1 if USE_NUMBA else 0

project_points = KERNELS["project_points"][_which]
pose_l1_mean = KERNELS["pose_l1_mean"][_which]
pose_l2_mean = KERNELS["pose_l2_mean"][_which]
rows_l1_sum = KERNELS["rows_l1_sum"][_which]
rows_l2_mean = KERNELS["rows_l2_mean"][_which]
apply_update_batch = KERNELS["apply_update_batch"][_which]
ideal_update_batch = KERNELS["ideal_update_batch"][_which]

BACKEND = "numba" if USE_NUMBA else "numpy"
