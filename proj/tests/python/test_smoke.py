import math

import numpy as np
import pytest

import poseref as pr


def test_rotation_and_transform_roundtrip():
    r = pr.Rotation.rot_z(math.pi / 2)
    assert abs(r.angle() - math.pi / 2) < 1e-12
    t = pr.RigidTransform(r, np.array([1.0, 2.0, 3.0]))
    p = t.apply(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(p, [1.0, 3.0, 3.0])
    back = t.inverse().apply(p)
    assert np.allclose(back, [1.0, 0.0, 0.0], atol=1e-12)


def test_compose_matches_matrix_product():
    a = pr.RigidTransform(pr.Rotation.rot_x(0.3), np.array([0.1, 0.0, -0.2]))
    b = pr.RigidTransform(pr.Rotation.rot_y(-0.7), np.array([0.0, 0.5, 0.0]))
    c = pr.compose(a, b)
    assert np.allclose(c.matrix(), a.matrix() @ b.matrix(), atol=1e-12)


def test_chamfer_distance():
    a = pr.PointCloud(np.array([[0.0, 0.0, 0.0]]))
    b = pr.PointCloud(np.array([[1.0, 0.0, 0.0]]))
    assert pr.chamfer_distance(a, b) == pytest.approx(2.0)
    assert pr.chamfer_distance(a, a) == 0.0


def test_symmetry_selection():
    syms = pr.enumerate_symmetries(pr.SymmetryClass(pr.SymmetryVariant.ROTATIONAL, 5.0))
    assert len(syms) == 72
    gt = pr.RigidTransform()
    est = pr.RigidTransform(pr.Rotation.rot_z(math.radians(93.0)), np.zeros(3))
    idx, pose = pr.closest_symmetric_pose(gt, est, syms)
    residual = pr.rotation_angle_between(pose.rotation, est.rotation)
    assert residual <= math.radians(2.5) + 1e-12


def test_expert_and_rewards():
    space = pr.ActionSpace()
    gt = pr.RigidTransform()
    est = pr.RigidTransform(pr.Rotation(), np.array([-0.5, 0.0, 0.0]))
    syms = pr.enumerate_symmetries(pr.SymmetryClass(pr.SymmetryVariant.NONE, 5.0))
    action = pr.expert_action(gt, est, syms, space)
    assert space.value(action.translation[0]) == pytest.approx(0.27)
    assert pr.alignment_reward(0.5, 0.3, pr.AlignmentRewardConfig()) == pytest.approx(0.5)


def test_end_to_end_expert_episode():
    cfg = pr.ScenarioConfig()
    cfg.min_objects = 1
    cfg.max_objects = 1
    cfg.points_per_object = 256
    sample = pr.generate_scene(cfg, 7)
    assert sample.num_objects == 1

    aug = pr.AugmentationConfig()
    aug.rotation_error_max_deg = 30.0
    aug.translation_error_max_units = 0.3
    aug.points_per_object = 200

    env_cfg = pr.EnvConfig()
    env = pr.RefinementEnv(sample, aug, 0.0, seed=3, config=env_cfg)
    trajectories = env.run(pr.PolicyKind.EXPERT)
    assert len(trajectories) == 1
    traj = trajectories[0]
    assert len(traj.steps) == env_cfg.iterations

    gt = sample.gt_pose(0)
    final = traj.steps[-1].pose_after
    model_err = np.linalg.norm(final.translation - gt.translation)
    assert model_err < 0.005
    assert traj.steps[-1].chamfer_after <= traj.init_chamfer


def test_metrics():
    rec = pr.EvalRecord()
    rec.add = 0.01
    rec.adi = 0.005
    rec.diameter = 0.2
    rec.symmetric = False
    assert rec.ad() == 0.01
    assert pr.recall_at([rec], 0.10) == 1.0
    assert pr.auc([rec], 0.10, 100) == pytest.approx(0.9, abs=0.02)
