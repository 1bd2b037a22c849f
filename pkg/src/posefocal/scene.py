"""Synthetic scenes, refiner-input perturbations and crop geometry.

Every sampler is a pure function of its seed and configuration. Seeds may be
an int or a sequence of ints (anything ``numpy.random.default_rng`` takes).
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraIntrinsics, Pose, ProjectionError, project_points, random_rotation
from .mesh import builtin_mesh, sample_mesh_points
from .update import Detection2D, ParamState


@dataclass(frozen=True)
class NoiseConfig:
    """Standard deviations of the refiner-input error model."""

    focal_rel_sigma: float = 0.15
    trans_xy_sigma: float = 0.01
    depth_sigma: float = 0.05
    euler_sigma: float = float(np.deg2rad(15.0))

    def __post_init__(self):
        for name in ("focal_rel_sigma", "trans_xy_sigma", "depth_sigma", "euler_sigma"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


ZERO_NOISE = NoiseConfig(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SceneConfig:
    focal_range: tuple = (200.0, 1000.0)
    depth_range: tuple = (0.8, 3.0)
    xy_box: float = 0.15
    image_w: int = 640
    image_h: int = 640
    n_points: int = 1000
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    init_focal: float = 600.0
    box_jitter: float = 0.0
    max_attempts: int = 1000

    def __post_init__(self):
        lo, hi = self.focal_range
        if not 0 < lo < hi:
            raise ValueError(f"focal_range must satisfy 0 < lo < hi, got {self.focal_range}")
        lo, hi = self.depth_range
        if not 0 < lo < hi:
            raise ValueError(f"depth_range must satisfy 0 < lo < hi, got {self.depth_range}")
        if not self.xy_box >= 0:
            raise ValueError("xy_box must be non-negative")
        if 0.5 * self.xy_box * np.sqrt(2) >= self.depth_range[0]:
            raise ValueError("xy_box too large for the minimum depth")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not self.init_focal > 0:
            raise ValueError("init_focal must be positive")
        if not self.box_jitter >= 0:
            raise ValueError("box_jitter must be non-negative")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def center(self):
        return (self.image_w / 2.0, self.image_h / 2.0)

    @property
    def image_diagonal(self):
        return float(np.hypot(self.image_w, self.image_h))


@dataclass(frozen=True, eq=False)
class SceneSample:
    gt: ParamState
    model_points: np.ndarray
    image_w: int
    image_h: int
    detection: Detection2D
    seed: int

    @property
    def center(self):
        return (self.image_w / 2.0, self.image_h / 2.0)

    @property
    def intrinsics(self):
        return CameraIntrinsics.from_image(self.gt.f, self.image_w, self.image_h)


class SceneSamplingError(RuntimeError):
    pass


def scene_points(mesh, n_points, seed):
    """Model points of the scene with this seed (own RNG stream)."""
    return sample_mesh_points(mesh, n_points, seed=[int(seed), 1])


def sample_scene(rng_seed, config=SceneConfig(), mesh=None):
    """Draw one ground-truth scene; resamples the pose until the object is
    fully visible, up to ``config.max_attempts`` times."""
    mesh = builtin_mesh("cube") if mesh is None else mesh
    seed = int(rng_seed)
    pts = scene_points(mesh, config.n_points, seed)
    rng = np.random.default_rng([seed, 0])
    half = 0.5 * config.xy_box
    for _ in range(config.max_attempts):
        R = random_rotation(rng)
        x, y = rng.uniform(-half, half, size=2)
        dist = rng.uniform(*config.depth_range)
        f = rng.uniform(*config.focal_range)
        z = np.sqrt(dist * dist - x * x - y * y)
        pose = Pose(R, (x, y, z))
        try:
            uv = project_points(
                CameraIntrinsics.from_image(f, config.image_w, config.image_h), pose, pts
            )
        except ProjectionError:
            continue
        if uv.min() < 0 or uv[:, 0].max() > config.image_w or uv[:, 1].max() > config.image_h:
            continue
        return SceneSample(
            gt=ParamState(pose, f),
            model_points=pts,
            image_w=config.image_w,
            image_h=config.image_h,
            detection=Detection2D.from_points(uv),
            seed=seed,
        )
    raise SceneSamplingError(
        f"object not fully inside the image after {config.max_attempts} attempts (seed {seed})"
    )


def scene_seeds(seed, n):
    """Per-scene integer seeds derived from an experiment seed."""
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(n, dtype=np.uint32)]


def _euler_batch(a, b, c):
    n = a.shape[0]
    out = np.empty((n, 3, 3))
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    # Rz(c) @ Ry(b) @ Rx(a)
    out[:, 0, 0] = cc * cb
    out[:, 0, 1] = cc * sb * sa - sc * ca
    out[:, 0, 2] = cc * sb * ca + sc * sa
    out[:, 1, 0] = sc * cb
    out[:, 1, 1] = sc * sb * sa + cc * ca
    out[:, 1, 2] = sc * sb * ca - cc * sa
    out[:, 2, 0] = -sb
    out[:, 2, 1] = cb * sa
    out[:, 2, 2] = cb * ca
    return out


def _positive_normal(rng, mean, sigma, n):
    out = mean + sigma * rng.standard_normal(n)
    bad = ~(out > 0)
    while bad.any():
        out[bad] = mean + sigma * rng.standard_normal(int(bad.sum()))
        bad = ~(out > 0)
    return out


def perturb_state_batch(gt, noise, seed, n):
    """``n`` independent perturbations of ``gt``; returns ``(f, t, R)`` arrays.

    Focal and depth are Gaussian around the truth, re-drawn until positive.
    The rotation error is three Gaussian Euler angles applied on the left.
    """
    rng = np.random.default_rng(seed)
    f = _positive_normal(rng, gt.f, noise.focal_rel_sigma * gt.f, n)
    t = np.empty((n, 3))
    t[:, 0] = gt.t[0] + noise.trans_xy_sigma * rng.standard_normal(n)
    t[:, 1] = gt.t[1] + noise.trans_xy_sigma * rng.standard_normal(n)
    t[:, 2] = _positive_normal(rng, gt.t[2], noise.depth_sigma, n)
    ang = noise.euler_sigma * rng.standard_normal((3, n))
    if noise.euler_sigma == 0:
        R = np.broadcast_to(gt.R, (n, 3, 3)).copy()
    else:
        R = _euler_batch(ang[0], ang[1], ang[2]) @ gt.R
    return f, t, R


def perturb_state(gt, noise, seed):
    f, t, R = perturb_state_batch(gt, noise, seed, 1)
    return ParamState(Pose(R[0], t[0]), f[0])


def compute_crop(det, projected_center, r, lam=1.4):
    """Crop ``(w, h)`` around the projected object center that contains the
    box, matches aspect ratio ``r`` and is enlarged by ``lam``."""
    xc, yc = projected_center
    x_dist = max(abs(det.x1 - xc), abs(det.x2 - xc))
    y_dist = max(abs(det.y1 - yc), abs(det.y2 - yc))
    w = max(x_dist, y_dist / r) * 2 * lam
    h = max(x_dist / r, y_dist) * 2 * lam
    return w, h
