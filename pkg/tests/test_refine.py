from dataclasses import replace

import numpy as np
import pytest

from conftest import random_rotation, random_state
from posefocal import loss
from posefocal.config import profile_config
from posefocal.geometry import Pose, axis_angle_to_matrix, rotation_geodesic
from posefocal.metrics import ERROR_FIELDS
from posefocal.refine import (
    PredictorSpec,
    damped_update,
    generate_scenes,
    predict,
    refine_scene,
    run_experiment,
    run_refinement,
)
from posefocal.scene import SceneConfig
from posefocal.update import ParamState, apply_update, ideal_update

CENTER = (320.0, 240.0)
FAST = replace(SceneConfig(), n_points=100)
PTS = np.random.default_rng(3).uniform(-0.1, 0.1, size=(50, 3))


def _gt(rng):
    return ParamState(Pose(random_rotation(rng), (0.04, -0.03, 1.7)), 700.0)


def test_predictor_spec_validation():
    with pytest.raises(ValueError):
        PredictorSpec(kind="learned")
    with pytest.raises(ValueError):
        PredictorSpec(kind="damped", gamma=0.0)
    with pytest.raises(ValueError):
        PredictorSpec(kind="damped", gamma=1.5)


def test_ideal_one_shot(rng, cube_points):
    for _ in range(50):
        init, gt = random_state(rng), random_state(rng)
        traj = run_refinement(init, gt, cube_points, CENTER, PredictorSpec(), K=3)
        assert len(traj) == 4 and traj[0].state == init
        for step in traj[1:]:
            r = step.record
            assert max(r.e_Rt, r.e_R, r.e_t, r.e_f, r.e_P) <= 1e-9
            assert 1 - r.iou <= 1e-9


def test_damped_gamma_one_is_ideal(rng):
    for _ in range(20):
        s, t = random_state(rng), random_state(rng)
        assert damped_update(s, t, 1.0) == ideal_update(s, t)
        assert predict(PredictorSpec("damped", gamma=1.0), s, t, 0) == ideal_update(s, t)


def test_damped_focal_half_step():
    gt = ParamState(Pose(np.eye(3), (0.0, 0.0, 2.0)), 2400.0)
    s = ParamState(gt.pose, 600.0)
    out = apply_update(s, damped_update(s, gt, 0.5))
    assert out.f == pytest.approx(1200.0, rel=1e-14)
    assert out.pose == gt.pose


def _decay(init, gt, gamma, err, K=15):
    traj = run_refinement(init, gt, PTS, CENTER,
                          PredictorSpec("damped", gamma=gamma), K)
    e0 = err(traj[0].state)
    for step in traj:
        want = (1 - gamma) ** step.k * e0
        # logs of O(1e3) focals are only resolved to ~1e-15 absolute
        assert err(step.state) == pytest.approx(want, rel=1e-9, abs=1e-14), step.k


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_damped_decay_focal_only(rng, gamma):
    gt = _gt(rng)
    _decay(ParamState(gt.pose, 2400.0), gt, gamma, lambda s: np.log(s.f / gt.f))


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_damped_decay_depth_only(rng, gamma):
    # scale along the viewing ray so only the depth is wrong
    gt = _gt(rng)
    init = ParamState(Pose(gt.R, gt.t * (2.6 / gt.t[2])), gt.f)
    _decay(init, gt, gamma, lambda s: np.log(s.t[2] / gt.t[2]))


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_damped_decay_rotation_only(rng, gamma):
    gt = _gt(rng)
    init = ParamState(Pose(axis_angle_to_matrix([0.5, -1.2, 0.9]) @ gt.R, gt.t), gt.f)
    _decay(init, gt, gamma, lambda s: rotation_geodesic(s.R, gt.R))


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_damped_components_stay_decoupled(rng, gamma):
    gt = _gt(rng)
    init = ParamState(gt.pose, 300.0)
    traj = run_refinement(init, gt, PTS, CENTER, PredictorSpec("damped", gamma=gamma), 5)
    for step in traj:
        assert step.state.pose == gt.pose


def test_damped_pose_distance_monotone(rng, cube_points):
    spec = PredictorSpec("damped", gamma=0.5)
    for _ in range(200):
        init, gt = random_state(rng), random_state(rng)
        traj = run_refinement(init, gt, cube_points, CENTER, spec, K=15)
        d = [loss.pose_distance(s.state.pose, gt.pose, cube_points) for s in traj]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(d, d[1:])), d


def test_noisy_predictor_uses_perturbed_target_first():
    gt = ParamState(Pose(np.eye(3), (0, 0, 2.0)), 500.0)
    s = ParamState(Pose(np.eye(3), (0.01, 0, 1.0)), 600.0)
    spec = PredictorSpec("noisy", gamma=0.5, seed=3)
    first = apply_update(s, predict(spec, s, gt, 0))
    assert first != gt
    assert predict(spec, s, gt, 1) == damped_update(s, gt, 0.5)


def test_refine_scene_deterministic():
    scene = generate_scenes(FAST, 1, seed=4)[0]
    spec = PredictorSpec("noisy", gamma=0.5, seed=1)
    a = refine_scene(scene, FAST, spec, 10)
    b = refine_scene(scene, FAST, spec, 10)
    assert [x.record for x in a] == [x.record for x in b]
    assert all(x.state == y.state for x, y in zip(a, b))


def test_run_experiment_single_ideal_scene():
    reps = run_experiment(FAST, PredictorSpec(), K=2, n_scenes=1, seed=0)
    assert len(reps) == 3 and reps[1].count == 1
    for name in ERROR_FIELDS[:-1]:
        assert getattr(reps[1], f"med_{name}") <= 1e-9
    assert reps[1].med_iou == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("profile, K", [("pix3d", 15), ("cars", 55)])
def test_profiles_accepted(profile, K):
    cfg, k = profile_config(profile, FAST)
    assert k == K
    reps = run_experiment(cfg, PredictorSpec("damped", gamma=0.5), K=k, n_scenes=3, seed=1)
    assert len(reps) == K + 1
    assert reps[-1].med_e_f < reps[0].med_e_f


def test_run_experiment_deterministic():
    spec = PredictorSpec("noisy", gamma=0.5, seed=9)
    assert run_experiment(FAST, spec, K=5, n_scenes=8, seed=2) == run_experiment(FAST, spec, K=5, n_scenes=8, seed=2)


def test_k_must_be_positive(rng, cube_points):
    s = random_state(rng)
    with pytest.raises(ValueError):
        run_refinement(s, s, cube_points, CENTER, PredictorSpec(), K=0)
