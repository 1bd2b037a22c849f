"""Benchmark error metrics, median/accuracy aggregation and report rows.

Point-matching and reprojection errors here use per-point L2 distances and
are computed through their own code paths, separate from the L1 training
losses in :mod:`posefocal.loss`.
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from . import kernels
from .geometry import CameraIntrinsics, project_points, rotation_geodesic
from .update import Detection2D

ROTATION_THRESHOLD = np.pi / 6
REPROJECTION_THRESHOLD = 0.1
IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class EvalRecord:
    e_Rt: float
    e_R: float
    e_t: float
    e_f: float
    e_P: float
    iou: float


ERROR_FIELDS = ("e_Rt", "e_R", "e_t", "e_f", "e_P", "iou")


@dataclass(frozen=True)
class MetricReport:
    """Medians of every :class:`EvalRecord` field plus threshold accuracies."""

    med_e_Rt: float
    med_e_R: float
    med_e_t: float
    med_e_f: float
    med_e_P: float
    med_iou: float
    acc_R_pi6: float
    acc_P_0p1: float
    acc_D_0p5: float
    count: int


REPORT_COLUMNS = tuple(f.name for f in fields(MetricReport))
"""Stable column order used when a report is written as a row."""


def _t_norm(t_hat):
    n = float(np.linalg.norm(t_hat))
    if not n > 0:
        raise ValueError("ground-truth translation has zero norm")
    return n


def point_matching_error(pred, gt, pts, d_bbox, d_img):
    """Average 3D point error, normalised by ground-truth distance and scaled
    by the relative size of the object in the image."""
    if not d_img > 0:
        raise ValueError("image diagonal must be positive")
    n = _t_norm(gt.translation)
    pts = np.ascontiguousarray(pts, dtype=float)
    if pts.shape[0] == 0:
        raise ValueError("point set is empty")
    avg = kernels.pose_l2_mean(pred.rotation, pred.translation, gt.rotation, gt.translation, pts)
    return (d_bbox / d_img) * avg / n


def rotation_error(R, R_hat):
    return rotation_geodesic(R_hat, R)


def translation_error(t, t_hat):
    t = np.asarray(t, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    return float(np.linalg.norm(t - t_hat)) / _t_norm(t_hat)


def focal_error(f, f_hat):
    if not f_hat > 0:
        raise ValueError("ground-truth focal length must be positive")
    return abs(f_hat - f) / f_hat


def reprojection_error(pred, gt, pts, center, d_bbox):
    """Average 2D reprojection error divided by the ground-truth box diagonal."""
    if not d_bbox > 0:
        raise ValueError("box diagonal must be positive")
    cx, cy = center
    uv = project_points(CameraIntrinsics(pred.f, cx, cy), pred.pose, pts)
    uv_hat = project_points(CameraIntrinsics(gt.f, cx, cy), gt.pose, pts)
    return kernels.rows_l2_mean(uv, uv_hat) / d_bbox


def bbox_iou(a, b):
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def evaluate(pred, gt, pts, center, gt_box, d_img, pred_box=None):
    """Full :class:`EvalRecord` for one prediction.

    Without ``pred_box`` the predicted box is the bounds of the model points
    projected under ``pred``.
    """
    if pred_box is None:
        cx, cy = center
        pred_box = Detection2D.from_points(
            project_points(CameraIntrinsics(pred.f, cx, cy), pred.pose, pts)
        )
    d_bbox = gt_box.diagonal
    return EvalRecord(
        e_Rt=point_matching_error(pred.pose, gt.pose, pts, d_bbox, d_img),
        e_R=rotation_error(pred.R, gt.R),
        e_t=translation_error(pred.t, gt.t),
        e_f=focal_error(pred.f, gt.f),
        e_P=reprojection_error(pred, gt, pts, center, d_bbox),
        iou=bbox_iou(pred_box, gt_box),
    )


def _median(values):
    s = sorted(values)
    n = len(s)
    mid = n // 2
    if n % 2:
        return float(s[mid])
    return 0.5 * (s[mid - 1] + s[mid])


def aggregate(records):
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    n = len(records)
    cols = {name: [getattr(r, name) for r in records] for name in ERROR_FIELDS}
    return MetricReport(
        med_e_Rt=_median(cols["e_Rt"]),
        med_e_R=_median(cols["e_R"]),
        med_e_t=_median(cols["e_t"]),
        med_e_f=_median(cols["e_f"]),
        med_e_P=_median(cols["e_P"]),
        med_iou=_median(cols["iou"]),
        acc_R_pi6=sum(e <= ROTATION_THRESHOLD for e in cols["e_R"]) / n,
        acc_P_0p1=sum(e <= REPROJECTION_THRESHOLD for e in cols["e_P"]) / n,
        acc_D_0p5=sum(v >= IOU_THRESHOLD for v in cols["iou"]) / n,
        count=n,
    )


def accuracy_curve(values, thresholds):
    """Fraction of ``values`` at or below each threshold."""
    v = np.sort(np.asarray(values, dtype=float))
    return [float(np.searchsorted(v, th, side="right")) / v.size for th in thresholds]


def report_row(report):
    return asdict(report)
