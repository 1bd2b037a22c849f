"""Iterative refinement driven by oracle predictors.

A predictor maps the current state (and, being an oracle, the ground truth)
to an :class:`~posefocal.update.UpdateVector`. Three oracles exist:

``ideal``
    the exact one-step update.
``damped``
    moves a fraction ``gamma`` of the way in each parameter's natural space:
    log-focal, log-depth, normalised image-plane center and the rotation
    geodesic. Each of these errors then shrinks by exactly ``1 - gamma``.
``noisy``
    for the first ``noise_iters`` iterations jumps straight to a perturbed
    copy of the ground truth (refiner-input error model), afterwards behaves
    like ``damped``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import CameraIntrinsics, axis_angle_to_matrix, matrix_to_axis_angle, project_points
from .metrics import aggregate, evaluate
from .scene import NoiseConfig, SceneConfig, perturb_state, sample_scene, scene_seeds
from .update import Detection2D, UpdateVector, apply_update, ideal_update, init_state

PREDICTOR_KINDS = ("ideal", "damped", "noisy")


@dataclass(frozen=True)
class PredictorSpec:
    kind: str = "ideal"
    gamma: float = 1.0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    noise_iters: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PREDICTOR_KINDS:
            raise ValueError(f"unknown predictor {self.kind!r}; choose from {PREDICTOR_KINDS}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.noise_iters < 0:
            raise ValueError("noise_iters must be >= 0")


@dataclass(frozen=True)
class TrajectoryStep:
    k: int
    state: object
    record: object


def damped_update(state, target, gamma):
    """Fractional step toward ``target``; ``gamma == 1`` is the ideal update."""
    ideal = ideal_update(state, target)
    if gamma == 1:
        return ideal
    v_f = gamma * ideal.v_f
    v_z = np.exp(gamma * np.log(ideal.v_z))
    f_new = np.exp(v_f) * state.f
    x, y, z = state.t
    xh, yh, zh = target.t
    # normalised center moves gamma of the way; pixels measured at the new focal
    v_x = gamma * f_new * (xh / zh - x / z)
    v_y = gamma * f_new * (yh / zh - y / z)
    w = matrix_to_axis_angle(target.R @ state.R.T)
    dR = axis_angle_to_matrix(gamma * w)
    return UpdateVector(v_x, v_y, v_z, dR[:, 0], dR[:, 1], v_f)


def predict(spec, state, gt, k):
    if spec.kind == "ideal":
        return ideal_update(state, gt)
    if spec.kind == "noisy" and k < spec.noise_iters:
        target = perturb_state(gt, spec.noise, seed=[int(spec.seed), int(k)])
        return ideal_update(state, target)
    return damped_update(state, gt, spec.gamma)


def _default_box(gt, pts, center):
    cx, cy = center
    return Detection2D.from_points(project_points(CameraIntrinsics(gt.f, cx, cy), gt.pose, pts))


def run_refinement(init, gt, pts, center, spec, K, gt_box=None, d_img=None):
    """Iterate the update rule ``K`` times; returns ``K + 1`` trajectory steps.

    ``gt_box`` defaults to the bounds of the projected model points and
    ``d_img`` to the diagonal of an image centred on ``center``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    pts = np.ascontiguousarray(pts, dtype=float)
    if gt_box is None:
        gt_box = _default_box(gt, pts, center)
    if d_img is None:
        d_img = 2.0 * float(np.hypot(*center))
    state = init
    traj = [TrajectoryStep(0, state, evaluate(state, gt, pts, center, gt_box, d_img))]
    for k in range(K):
        state = apply_update(state, predict(spec, state, gt, k))
        traj.append(TrajectoryStep(k + 1, state, evaluate(state, gt, pts, center, gt_box, d_img)))
    return traj


def initial_detection(scene, config):
    """The box handed to initialisation, optionally jittered."""
    det = scene.detection
    if config.box_jitter <= 0:
        return det
    rng = np.random.default_rng([scene.seed, 2])
    x1, y1, x2, y2 = np.asarray(det.as_tuple()) + config.box_jitter * rng.standard_normal(4)
    return Detection2D(min(x1, x2), min(y1, y2), max(x1, x2) + 1e-9, max(y1, y2) + 1e-9)


def predictor_for_scene(spec, scene_seed):
    derived = np.random.SeedSequence([int(spec.seed), int(scene_seed)]).generate_state(1)[0]
    return replace(spec, seed=int(derived))


def refine_scene(scene, config, spec, K):
    intr0 = CameraIntrinsics(config.init_focal, *scene.center)
    init = init_state(initial_detection(scene, config), intr0)
    d_img = float(np.hypot(scene.image_w, scene.image_h))
    return run_refinement(
        init,
        scene.gt,
        scene.model_points,
        scene.center,
        predictor_for_scene(spec, scene.seed),
        K,
        gt_box=scene.detection,
        d_img=d_img,
    )


def generate_scenes(config, n_scenes, seed, mesh=None):
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    return [sample_scene(s, config, mesh) for s in scene_seeds(seed, n_scenes)]


def reports_by_iteration(trajectories):
    K1 = len(trajectories[0])
    return [aggregate(traj[k].record for traj in trajectories) for k in range(K1)]


def run_experiment(scene_config=SceneConfig(), predictor_spec=PredictorSpec(), K=15,
                   n_scenes=100, seed=0, mesh=None, scenes=None):
    """Per-iteration :class:`~posefocal.metrics.MetricReport` list (``K + 1`` long).

    Scenes are generated from ``seed`` unless ``scenes`` is given.
    """
    if scenes is None:
        scenes = generate_scenes(scene_config, n_scenes, seed, mesh)
    trajectories = [refine_scene(s, scene_config, predictor_spec, K) for s in scenes]
    return reports_by_iteration(trajectories)
