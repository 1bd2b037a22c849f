"""Focal-aware update rule for the joint (rotation, translation, focal) state.

The update is applied in a fixed order: focal first, then depth, then the
in-plane translation (which is expressed in pixels of the *updated* focal
length), then rotation.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import EPS_GS, Pose, rotation_from_6d

DEFAULT_INIT_FOCAL = 600.0
DEFAULT_INIT_DEPTH = 1.0


def _vec3(v):
    arr = np.array(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ParamState:
    """Estimated object pose plus focal length (pixels)."""

    pose: Pose
    f: float

    def __post_init__(self):
        object.__setattr__(self, "f", float(self.f))
        if not (np.isfinite(self.f) and self.f > 0):
            raise ValueError(f"focal length must be positive, got {self.f}")
        if not self.pose.translation[2] > 0:
            raise ValueError(f"depth must be positive, got {self.pose.translation[2]}")

    @classmethod
    def from_arrays(cls, R, t, f):
        return cls(Pose(R, t), f)

    @property
    def R(self):
        return self.pose.rotation

    @property
    def t(self):
        return self.pose.translation

    def __eq__(self, other):
        if not isinstance(other, ParamState):
            return NotImplemented
        return self.f == other.f and self.pose == other.pose

    __hash__ = None


@dataclass(frozen=True, eq=False)
class UpdateVector:
    """Predicted increment: pixel shift of the projected center, depth ratio,
    6D rotation increment and log-focal increment."""

    v_x: float = 0.0
    v_y: float = 0.0
    v_z: float = 1.0
    v_r1: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    v_r2: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    v_f: float = 0.0

    def __post_init__(self):
        for name in ("v_x", "v_y", "v_z", "v_f"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "v_r1", _vec3(self.v_r1))
        object.__setattr__(self, "v_r2", _vec3(self.v_r2))

    def replace(self, **changes):
        values = {
            "v_x": self.v_x,
            "v_y": self.v_y,
            "v_z": self.v_z,
            "v_r1": self.v_r1,
            "v_r2": self.v_r2,
            "v_f": self.v_f,
        }
        values.update(changes)
        return UpdateVector(**values)

    def as_array(self):
        """Flat 12-vector ``[v_x, v_y, v_z, v_r1(3), v_r2(3), v_f]``."""
        return np.concatenate([[self.v_x, self.v_y, self.v_z], self.v_r1, self.v_r2, [self.v_f]])

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2], a[3:6], a[6:9], a[9])

    def __eq__(self, other):
        if not isinstance(other, UpdateVector):
            return NotImplemented
        return bool(np.array_equal(self.as_array(), other.as_array()))

    __hash__ = None


IDENTITY_UPDATE = UpdateVector()


@dataclass(frozen=True)
class Detection2D:
    """Axis-aligned pixel box ``[x1, y1, x2, y2]``."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"box must have positive area: {self.as_tuple()}")

    def as_tuple(self):
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def center(self):
        return (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))

    @property
    def diagonal(self):
        return float(np.hypot(self.x2 - self.x1, self.y2 - self.y1))

    @property
    def area(self):
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @classmethod
    def from_points(cls, uv):
        uv = np.asarray(uv, dtype=float)
        lo = uv.min(axis=0)
        hi = uv.max(axis=0)
        return cls(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def apply_update(state, delta):
    if not delta.v_z > 0:
        raise ValueError(f"depth ratio v_z must be positive, got {delta.v_z}")
    f_new = np.exp(delta.v_f) * state.f
    x, y, z = state.t
    z_new = delta.v_z * z
    # (v/f' + x/z) * z' rearranged so the identity update is bitwise exact
    x_new = delta.v_x * z_new / f_new + delta.v_z * x
    y_new = delta.v_y * z_new / f_new + delta.v_z * y
    R_new = rotation_from_6d(delta.v_r1, delta.v_r2) @ state.R
    return ParamState(Pose(R_new, (x_new, y_new, z_new)), f_new)


def ideal_update(state, target):
    """The update that maps ``state`` onto ``target`` in a single step."""
    x, y, z = state.t
    xh, yh, zh = target.t
    dR = target.R @ state.R.T
    return UpdateVector(
        v_x=target.f * (xh / zh - x / z),
        v_y=target.f * (yh / zh - y / z),
        v_z=zh / z,
        v_r1=dR[:, 0],
        v_r2=dR[:, 1],
        v_f=np.log(target.f / state.f),
    )


def init_state(det, intr_init):
    """Initial guess: identity rotation at 1 m, centered on the detection."""
    u, v = det.center
    z = DEFAULT_INIT_DEPTH
    t = ((u - intr_init.cx) * z / intr_init.f, (v - intr_init.cy) * z / intr_init.f, z)
    return ParamState(Pose(np.eye(3), t), intr_init.f)


def apply_update_batch(f, t, R, v_xy, v_z, v_r1, v_r2, v_f):
    """Vectorised :func:`apply_update` over ``n`` states.

    Raises on any degenerate row; returns ``(f_new, t_new, R_new)``.
    """
    c = np.ascontiguousarray
    f_new, t_new, R_new, bad = kernels.apply_update_batch(
        c(f, dtype=float), c(t, dtype=float), c(R, dtype=float), c(v_xy, dtype=float),
        c(v_z, dtype=float), c(v_r1, dtype=float), c(v_r2, dtype=float), c(v_f, dtype=float),
        EPS_GS,
    )
    if bad.any():
        rows = np.flatnonzero(bad)
        raise ValueError(
            f"{rows.size} degenerate update row(s) (6D rotation or v_z <= 0), "
            f"first {rows[:10].tolist()}"
        )
    return f_new, t_new, R_new


def ideal_update_batch(f, t, R, f_hat, t_hat, R_hat):
    """Vectorised :func:`ideal_update`; returns ``(v_xy, v_z, v_r1, v_r2, v_f)``."""
    c = np.ascontiguousarray
    return kernels.ideal_update_batch(
        c(f, dtype=float), c(t, dtype=float), c(R, dtype=float),
        c(f_hat, dtype=float), c(t_hat, dtype=float), c(R_hat, dtype=float),
    )
