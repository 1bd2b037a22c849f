"""Pinhole projection, rotation representations and pose algebra.

Camera convention: right-handed, +z looks into the scene, image u grows to
the right and v grows downward. The principal point is an explicit offset.
Angles are radians throughout.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

EPS_DEPTH = 1e-6
EPS_GS = 1e-9
ROTATION_TOL = 1e-9


class ProjectionError(ValueError):
    """Raised when a point lies at or behind the camera plane.

    ``indices`` lists the offending point indices (a single ``0`` for
    single-point projection).
    """

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(int(i) for i in indices)


class DegenerateRotationError(ValueError):
    """Raised for a zero or collinear 6D rotation representation."""


def _frozen(a, shape):
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CameraIntrinsics:
    """Square-pixel pinhole intrinsics: focal length ``f`` and principal point."""

    f: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (np.isfinite(self.f) and self.f > 0):
            raise ValueError(f"focal length must be positive, got {self.f}")

    @classmethod
    def from_image(cls, f, width, height):
        """Intrinsics with the principal point at the image center."""
        return cls(float(f), width / 2.0, height / 2.0)

    def with_focal(self, f):
        return CameraIntrinsics(float(f), self.cx, self.cy)


@dataclass(frozen=True, eq=False)
class Pose:
    """Object-to-camera rigid transform; translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen(self.rotation, (3, 3)))
        object.__setattr__(self, "translation", _frozen(self.translation, (3,)))

    @classmethod
    def identity(cls, translation=(0.0, 0.0, 0.0)):
        return cls(np.eye(3), translation)

    def transform(self, pts):
        return np.asarray(pts, dtype=float) @ self.rotation.T + self.translation

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.rotation, other.rotation) and np.array_equal(
            self.translation, other.translation
        )

    __hash__ = None


def is_rotation(R, tol=ROTATION_TOL):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return (
        np.linalg.norm(R.T @ R - np.eye(3)) <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def intrinsics_matrix(intr):
    return np.array(
        [[intr.f, 0.0, intr.cx], [0.0, intr.f, intr.cy], [0.0, 0.0, 1.0]]
    )


def project_point(intr, pose, p):
    """Project one object-frame point to pixel coordinates ``(u, v)``."""
    xc, yc, zc = pose.rotation @ np.asarray(p, dtype=float) + pose.translation
    if not zc > EPS_DEPTH:
        raise ProjectionError(f"point at or behind the camera (z={zc:.3g})", (0,))
    return np.array([intr.f * xc / zc + intr.cx, intr.f * yc / zc + intr.cy])


def project_points(intr, pose, pts):
    """Project an ``(N, 3)`` point set; returns ``(N, 2)`` pixels."""
    pts = np.ascontiguousarray(pts, dtype=float)
    uv, z = kernels.project_points(
        pose.rotation, pose.translation, float(intr.f), float(intr.cx), float(intr.cy), pts
    )
    bad = np.flatnonzero(~(z > EPS_DEPTH))
    if bad.size:
        raise ProjectionError(
            f"{bad.size} point(s) at or behind the camera, first indices {bad[:10].tolist()}",
            bad,
        )
    return uv


def rotation_from_6d(v1, v2):
    """Rotation whose first two columns are the Gram-Schmidt basis of (v1, v2)."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = np.linalg.norm(v1)
    if not n1 > EPS_GS:
        raise DegenerateRotationError(f"first 6D vector has norm {n1:.3g}")
    e1 = v1 / n1
    u2 = v2 - np.dot(e1, v2) * e1
    n2 = np.linalg.norm(u2)
    if not n2 > EPS_GS:
        raise DegenerateRotationError("6D vectors are collinear")
    e2 = u2 / n2
    return np.column_stack([e1, e2, np.cross(e1, e2)])


def _vee_antisym(M):
    # half the vee of (M - M^T): equals sin(theta) * axis for a rotation
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def rotation_angle(M):
    """Rotation angle of ``M`` in [0, pi]."""
    s = np.linalg.norm(_vee_antisym(M))
    c = 0.5 * (np.trace(M) - 1.0)
    return float(np.arctan2(s, np.clip(c, -1.0, 1.0)))


def rotation_geodesic(R1, R2):
    """Geodesic distance ``||log(R1^T R2)||_F / sqrt(2)`` in radians.

    Evaluated as ``atan2(sin, cos)`` of the relative rotation, which keeps
    full relative precision for tiny angles where ``arccos`` does not.
    """
    return rotation_angle(np.asarray(R1, dtype=float).T @ np.asarray(R2, dtype=float))


def axis_angle_to_matrix(rotvec):
    """Rodrigues formula for a rotation vector (axis times angle)."""
    w = np.asarray(rotvec, dtype=float)
    theta = np.linalg.norm(w)
    K = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    if theta < 1e-8:
        # second-order series; exact to double precision at this size
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def matrix_to_axis_angle(R):
    """Rotation vector of ``R`` with angle in [0, pi]."""
    R = np.asarray(R, dtype=float)
    w = _vee_antisym(R)
    s = np.linalg.norm(w)
    c = 0.5 * (np.trace(R) - 1.0)
    theta = np.arctan2(s, np.clip(c, -1.0, 1.0))
    if theta < 1e-8:
        return w * (1.0 + theta * theta / 6.0)
    if theta < np.pi - 1e-4:
        return w * (theta / s)
    # near pi the antisymmetric part vanishes; read the axis off R + R^T
    B = 0.5 * (R + R.T) - c * np.eye(3)
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / np.sqrt(B[k, k])
    if np.dot(axis, w) < 0:
        axis = -axis
    return axis / np.linalg.norm(axis) * theta


def rotation_about(axis, angle):
    axis = np.asarray(axis, dtype=float)
    return axis_angle_to_matrix(axis / np.linalg.norm(axis) * angle)


def quaternion_to_matrix(q):
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_rotation(rng):
    """Uniformly distributed rotation from a normalised Gaussian quaternion."""
    while True:
        q = rng.standard_normal(4)
        n = np.linalg.norm(q)
        if n > 1e-12:
            return quaternion_to_matrix(q / n)


def euler_xyz_to_matrix(angles):
    """``Rz(c) @ Ry(b) @ Rx(a)`` for angles ``(a, b, c)``."""
    a, b, c = angles
    return (
        rotation_about((0, 0, 1), c)
        @ rotation_about((0, 1, 0), b)
        @ rotation_about((1, 0, 0), a)
    )
