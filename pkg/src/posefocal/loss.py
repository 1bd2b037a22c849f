"""Training losses for joint pose and focal-length updates.

All losses are deterministic functions of their inputs. Point sets are
``(N, 3)`` arrays in the object frame (meters). The reprojection losses sum
over points while the pose distance averages; neither is renormalised.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import EPS_DEPTH, CameraIntrinsics, ProjectionError
from .update import apply_update, ideal_update

DEFAULT_ALPHA = 1e-2
DEFAULT_BETA = 1.0
DEFAULT_HUBER_DELTA = 1.0


@dataclass(frozen=True)
class LossBreakdown:
    pose: float
    huber_focal: float
    disent_reproj: float
    total: float


def _points(pts):
    pts = np.ascontiguousarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (N, 3) point set, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError("point set is empty")
    return pts


def pose_distance(pose1, pose2, pts, printed_sign=False):
    """Mean per-point L1 distance between two rigid transforms of ``pts``.

    ``printed_sign=True`` evaluates ``(R1 p + t1) - (R2 p - t2)`` instead,
    which is not zero for equal poses; it exists only for comparison.
    """
    pts = _points(pts)
    t2 = -pose2.translation if printed_sign else pose2.translation
    return kernels.pose_l1_mean(pose1.rotation, pose1.translation, pose2.rotation, t2, pts)


def disentangled_pose_terms(state, delta, target, pts, focal_in_xy_term=False):
    """The three hybrid-update distances ``(xy, depth, rotation)``.

    Each hybrid takes ideal components except for one group, which comes from
    ``delta``; the focal increment is always the ideal one, so focal errors
    reach the total only through the focal loss. ``focal_in_xy_term=True``
    instead puts the predicted focal increment into the in-plane hybrid.
    """
    ideal = ideal_update(state, target)
    xy = ideal.replace(v_x=delta.v_x, v_y=delta.v_y)
    if focal_in_xy_term:
        xy = xy.replace(v_f=delta.v_f)
    depth = ideal.replace(v_z=delta.v_z)
    rot = ideal.replace(v_r1=delta.v_r1, v_r2=delta.v_r2)
    return tuple(
        pose_distance(apply_update(state, hybrid).pose, target.pose, pts)
        for hybrid in (xy, depth, rot)
    )


def disentangled_pose_loss(state, delta, target, pts, focal_in_xy_term=False):
    return float(sum(disentangled_pose_terms(state, delta, target, pts, focal_in_xy_term)))


def huber_log_focal(f, f_hat, delta=DEFAULT_HUBER_DELTA):
    if not (f > 0 and f_hat > 0):
        raise ValueError(f"focal lengths must be positive, got {f} and {f_hat}")
    r = abs(np.log(f) - np.log(f_hat))
    if r <= delta:
        return float(0.5 * r * r)
    return float(delta * (r - 0.5 * delta))


def _project(R, t, f, center, pts):
    cx, cy = center
    uv, z = kernels.project_points(R, t, float(f), float(cx), float(cy), pts)
    bad = np.flatnonzero(~(z > EPS_DEPTH))
    if bad.size:
        raise ProjectionError(
            f"{bad.size} point(s) behind the camera, first {bad[:10].tolist()}", bad
        )
    return uv


def _proj_l1(R, t, f, R_hat, t_hat, f_hat, center, pts):
    return kernels.rows_l1_sum(
        _project(R, t, f, center, pts), _project(R_hat, t_hat, f_hat, center, pts)
    )


def reprojection_loss(pred, gt, pts, center):
    """Summed per-point L1 pixel distance between the two projections."""
    pts = _points(pts)
    return _proj_l1(pred.R, pred.t, pred.f, gt.R, gt.t, gt.f, center, pts)


def disentangled_reprojection_terms(pred, gt, pts, center):
    """``(pose term, focal term)``: pose errors at the true focal, then the
    focal error at the true pose; each already weighted by one half."""
    pts = _points(pts)
    pose_term = 0.5 * _proj_l1(pred.R, pred.t, gt.f, gt.R, gt.t, gt.f, center, pts)
    focal_term = 0.5 * _proj_l1(gt.R, gt.t, pred.f, gt.R, gt.t, gt.f, center, pts)
    return pose_term, focal_term


def disentangled_reprojection_loss(pred, gt, pts, center):
    a, b = disentangled_reprojection_terms(pred, gt, pts, center)
    return a + b


def total_loss(
    state,
    delta,
    target,
    pts,
    center,
    alpha=DEFAULT_ALPHA,
    beta=DEFAULT_BETA,
    huber_delta=DEFAULT_HUBER_DELTA,
    focal_in_xy_term=False,
):
    """Pose loss plus ``alpha`` times the focal loss for one refinement step."""
    if alpha < 0 or beta < 0:
        raise ValueError("loss weights must be non-negative")
    if isinstance(center, CameraIntrinsics):
        center = (center.cx, center.cy)
    pose = disentangled_pose_loss(state, delta, target, pts, focal_in_xy_term)
    pred = apply_update(state, delta)
    huber = huber_log_focal(pred.f, target.f, huber_delta)
    dr = disentangled_reprojection_loss(pred, target, pts, center)
    return LossBreakdown(
        pose=pose,
        huber_focal=huber,
        disent_reproj=dr,
        total=pose + alpha * (beta * huber + dr),
    )

