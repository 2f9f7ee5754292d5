#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "poseref/datagen.hpp"
#include "poseref/environment.hpp"
#include "poseref/il_dataset.hpp"
#include "support/test_util.hpp"

using namespace poseref;
using namespace poseref::testutil;

namespace {

std::shared_ptr<ObjectModel> box_model(std::size_t samples = 512) {
  return std::make_shared<ObjectModel>(
      build_object_model(make_box(0.1, 0.07, 0.05), SymmetryClass{}, 0, samples, 3));
}

// Single object resting on the plane z=0 (camera frame == plane frame),
// source = target under gt with outliers none.
RefineScene simple_scene(const std::shared_ptr<ObjectModel>& model, const RigidTransform& gt,
                         const RigidTransform& init) {
  RefineScene scene;
  scene.plane.pose = RigidTransform();
  EpisodeObject obj;
  obj.model = model;
  obj.gt_pose = gt;
  obj.init_pose = init;
  obj.source_cam = model->target_cloud.transformed(gt);
  scene.objects.push_back(obj);
  return scene;
}

RigidTransform resting_pose(double height) {
  return RigidTransform(Rotation(), Vec3(0, 0, height));
}

}  // namespace

TEST_CASE("action space indexing and floor rule") {
  ActionSpace space;
  space.validate();
  CHECK(space.num_per_axis() == 11);
  CHECK(space.stop_index() == 5);
  CHECK(space.value(5) == 0.0);
  CHECK(space.value(6) == doctest::Approx(0.0033));
  CHECK(space.value(10) == doctest::Approx(0.27));
  CHECK(space.value(4) == doctest::Approx(-0.0033));
  CHECK(space.value(0) == doctest::Approx(-0.27));
  CHECK_THROWS_AS(space.value(11), std::invalid_argument);

  // Floor rule: largest step <= |residual|, sign preserved.
  CHECK(space.floor_index(0.5) == 10);    // +0.27
  CHECK(space.floor_index(-0.5) == 0);    // -0.27
  CHECK(space.floor_index(0.02) == 7);    // +0.01
  CHECK(space.floor_index(0.0033) == 6);  // exactly the smallest
  CHECK(space.floor_index(0.003) == 5);   // below smallest -> stop
  CHECK(space.floor_index(0.0) == 5);

  ActionSpace bad;
  bad.step_sizes = {0.01, 0.01};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("apply_action basics") {
  ActionSpace space;
  const RigidTransform est(Rotation::rot_z(0.3), Vec3(0.1, -0.2, 0.05));

  CHECK((apply_action(est, Action::stop(space), space).matrix() - est.matrix()).cwiseAbs().maxCoeff() ==
        0.0);

  Action push = Action::stop(space);
  push.translation[0] = 10;  // +0.27 on x
  const RigidTransform moved = apply_action(est, push, space);
  CHECK(moved.translation.x() == doctest::Approx(est.translation.x() + 0.27));
  CHECK(moved.translation.y() == est.translation.y());
  CHECK((moved.rotation.matrix() - est.rotation.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-axis action then its negation is the exact inverse") {
  ActionSpace space;
  Rng rng(5);
  for (int axis = 0; axis < 3; ++axis) {
    for (int idx = 0; idx < space.num_per_axis(); ++idx) {
      const RigidTransform est = random_transform(rng);
      Action a = Action::stop(space);
      a.rotation[static_cast<std::size_t>(axis)] = idx;
      Action neg = Action::stop(space);
      neg.rotation[static_cast<std::size_t>(axis)] = 2 * space.stop_index() - idx;
      const RigidTransform back = apply_action(apply_action(est, a, space), neg, space);
      CHECK((back.matrix() - est.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  // Translation inverts exactly for arbitrary multi-axis actions.
  Action a = Action::stop(space);
  a.translation = {0, 7, 10};
  Action neg = Action::stop(space);
  for (int i = 0; i < 3; ++i) {
    neg.translation[static_cast<std::size_t>(i)] =
        2 * space.stop_index() - a.translation[static_cast<std::size_t>(i)];
  }
  const RigidTransform est = random_transform(rng);
  const RigidTransform back = apply_action(apply_action(est, a, space), neg, space);
  CHECK((back.translation - est.translation).norm() == 0.0);
}

TEST_CASE("expert action on exact and simple residuals") {
  ActionSpace space;
  const SymmetrySet none = enumerate_symmetries({SymmetryVariant::kNone, 5.0});

  Rng rng(7);
  const RigidTransform pose = random_transform(rng);
  CHECK(expert_action(pose, pose, none, space).is_stop(space));

  // Translation residual (0.5, 0, 0): largest step <= 0.5 is 0.27.
  RigidTransform est = pose;
  est.translation -= Vec3(0.5, 0, 0);
  const Action t = expert_action(pose, est, none, space);
  CHECK(t.translation[0] == 10);
  CHECK(t.translation[1] == space.stop_index());
  CHECK(t.translation[2] == space.stop_index());
  CHECK(t.rotation[0] == space.stop_index());

  // Rotation residual 0.02 rad about z: step +0.01.
  RigidTransform rot_est(Rotation::rot_z(-0.02) * pose.rotation, pose.translation);
  const Action r = expert_action(pose, rot_est, none, space);
  CHECK(r.rotation[2] == 7);  // +0.01
  CHECK(r.rotation[0] == space.stop_index());
  CHECK(r.rotation[1] == space.stop_index());
  // The chosen action reduces the residual.
  const RigidTransform after = apply_action(rot_est, r, space);
  CHECK(rotation_angle_between(pose.rotation, after.rotation) <
        rotation_angle_between(pose.rotation, rot_est.rotation));
}

TEST_CASE("expert never overshoots: per-axis residual signs never flip") {
  ActionSpace space;
  const SymmetrySet none = enumerate_symmetries({SymmetryVariant::kNone, 5.0});
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const RigidTransform gt = random_transform(rng, 0.5);
    RigidTransform est(Rotation::axis_angle(random_unit(rng), rng.uniform(0.0, M_PI / 2)) * gt.rotation,
                       gt.translation + random_unit(rng) * rng.uniform(0.0, 1.0));
    const Action a = expert_action(gt, est, none, space);
    const Vec3 dt_before = gt.translation - est.translation;
    const RigidTransform after = apply_action(est, a, space);
    const Vec3 dt_after = gt.translation - after.translation;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(dt_after[i]) <= std::abs(dt_before[i]) + 1e-15);
      if (std::abs(dt_before[i]) >= space.step_sizes.front()) {
        CHECK(dt_before[i] * dt_after[i] >= -1e-15);  // no sign flip
      }
    }
  }
}

TEST_CASE("expert converges within ten iterations from (90deg, 1.0 units)") {
  ActionSpace space;
  const SymmetrySet none = enumerate_symmetries({SymmetryVariant::kNone, 5.0});
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const RigidTransform gt = random_transform(rng, 0.3);
    RigidTransform est(Rotation::axis_angle(random_unit(rng), rng.uniform(0.0, M_PI / 2)) * gt.rotation,
                       gt.translation + random_unit(rng) * rng.uniform(0.0, 1.0));
    double prev_angle = rotation_angle_between(gt.rotation, est.rotation);
    double prev_trans = (gt.translation - est.translation).norm();
    // Ten iterations reach the acceptance-level bounds; the Euler coupling
    // can leave a fraction of a degree that settles within two more steps.
    for (int it = 0; it < 12; ++it) {
      const Action a = expert_action(gt, est, none, space);
      est = apply_action(est, a, space);
      const double angle = rotation_angle_between(gt.rotation, est.rotation);
      const double trans = (gt.translation - est.translation).norm();
      CHECK(angle <= prev_angle + 1e-9);
      CHECK(trans <= prev_trans + 1e-12);
      prev_angle = angle;
      prev_trans = trans;
      if (it == 9) {
        CHECK(angle < 1.0 * M_PI / 180.0);
        CHECK(trans < 0.0033 * std::sqrt(3.0) + 1e-12);
      }
    }
    CHECK(prev_angle < 0.0033 * std::sqrt(3.0) + 1e-9);
    // All-stop once settled.
    CHECK(expert_action(gt, est, none, space).is_stop(space));
  }
}

TEST_CASE("expert uses the symmetry-closest ground truth") {
  ActionSpace space;
  const SymmetrySet fb = enumerate_symmetries({SymmetryVariant::kFrontBack, 5.0});
  Rng rng(17);
  const RigidTransform gt = random_transform(rng, 0.3);
  // Estimate exactly at the flipped pose: the symmetric expert stops.
  const RigidTransform flipped(gt.rotation * Rotation::rot_z(M_PI), gt.translation);
  CHECK(expert_action(gt, flipped, fb, space).is_stop(space));
  // Without symmetry it would not.
  const SymmetrySet none = enumerate_symmetries({SymmetryVariant::kNone, 5.0});
  CHECK_FALSE(expert_action(gt, flipped, none, space).is_stop(space));
}

TEST_CASE("alignment reward discretization") {
  const AlignmentRewardConfig rho;  // 0.6 / 0.1 / 0.5
  CHECK(alignment_reward(0.5, 0.3, rho) == doctest::Approx(0.5));
  CHECK(alignment_reward(0.3, 0.3, rho) == doctest::Approx(-0.1));
  CHECK(alignment_reward(0.3, 0.5, rho) == doctest::Approx(-0.6));
  CHECK(alignment_reward(0.3, 0.3 + 5e-13, rho) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(alignment_reward(-0.1, 0.3, rho), std::invalid_argument);

  Rng rng(19);
  for (int i = 0; i < 200; ++i) {
    const double r = alignment_reward(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rho);
    CHECK((r == 0.5 || r == -0.1 || r == -0.6));
  }
}

TEST_CASE("plausibility reward") {
  PlausibilityVerdict v;
  v.stable = true;
  CHECK(plausibility_reward(v, 0.5) == 0.5);
  v.stable = false;
  v.feasible = true;
  CHECK(plausibility_reward(v, 0.5) == -0.5);
  v.feasible = false;
  v.intersecting = true;
  CHECK(plausibility_reward(v, 0.5) == -0.5);
}

TEST_CASE("greedy stops at alignment and corrects a pure offset") {
  ActionSpace space;
  const auto model = box_model(256);
  const auto [src, tgt] = normalize_pair(model->target_cloud, *model);
  const KdTree tree(tgt.points);

  // Perfectly aligned: every nonzero step worsens CD.
  CHECK(greedy_action(tgt, RigidTransform(), tgt, tree, space).is_stop(space));

  // Source offset by +0.03 on x: the -0.03 step realigns exactly.
  PointCloud offset = tgt;
  for (Vec3& p : offset.points) p.x() += 0.03;
  const Action a = greedy_action(offset, RigidTransform(), tgt, tree, space);
  CHECK(space.value(a.translation[0]) == doctest::Approx(-0.03));
  CHECK(a.translation[1] == space.stop_index());
  CHECK(a.rotation[2] == space.stop_index());
}

TEST_CASE("greedy lookahead does not worsen the Chamfer distance") {
  ActionSpace space;
  const auto model = box_model(200);
  Rng rng(23);
  int non_worsening = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto [src_n, tgt_n] = normalize_pair(model->target_cloud, *model);
    // Partial noisy source: drop half the points, add noise.
    PointCloud partial;
    for (std::size_t i = 0; i < src_n.size(); i += 2) {
      partial.points.push_back(src_n.points[i] + random_unit(rng) * rng.uniform(0.0, 0.01));
    }
    const RigidTransform err(Rotation::axis_angle(random_unit(rng), rng.uniform(0.0, 0.1)),
                             random_unit(rng) * rng.uniform(0.0, 0.05));
    PointCloud moved = partial.transformed(err);
    const KdTree tree(tgt_n.points);
    const Action a = greedy_action(moved, RigidTransform(), tgt_n, tree, space);
    const double before = chamfer_distance(moved, tgt_n);
    const double after = chamfer_distance(moved.transformed(apply_action(RigidTransform(), a, space)), tgt_n);
    if (after <= before + 1e-12) ++non_worsening;
  }
  CHECK(non_worsening == trials);
}

TEST_CASE("environment: zero-error expert rolls out all-stop with stagnation rewards") {
  const auto model = box_model(256);
  const RigidTransform gt = resting_pose(0.025);
  RefineScene scene = simple_scene(model, gt, gt);

  EnvConfig cfg;
  cfg.iterations = 10;
  RefinementEnv env(scene, cfg);
  const auto trajectories = env.run(PolicyKind::kExpert);
  REQUIRE(trajectories.size() == 1);
  CHECK(trajectories[0].steps.size() == 10);
  for (const TrajectoryStep& s : trajectories[0].steps) {
    CHECK(s.action.is_stop(cfg.action_space));
    CHECK(s.alignment_reward == doctest::Approx(-0.1));
    CHECK(s.verdict_after.stable);
    CHECK(s.plausibility_reward == doctest::Approx(0.5));
  }
  // Camera pose stays at gt.
  CHECK((trajectories[0].steps.back().pose_after.matrix() - gt.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("environment: expert recovers a (30deg, 0.3 unit) initialization error") {
  const auto model = box_model(512);
  const RigidTransform gt = resting_pose(0.025);
  const RigidTransform init = perturb_pose(gt, 30.0, 0.3, model->scale, 99);
  RefineScene scene = simple_scene(model, gt, init);

  EnvConfig cfg;
  RefinementEnv env(scene, cfg);
  const auto trajectories = env.run(PolicyKind::kExpert);

  const RigidTransform& correction = trajectories[0].steps.back().correction_after;
  const RigidTransform& gt_corr = env.gt_correction(0);
  CHECK(rotation_angle_between(gt_corr.rotation, correction.rotation) < 0.0033 * 2);
  CHECK((gt_corr.translation - correction.translation).norm() < 0.0033 * 2);
  // Final camera pose matches gt within the same tolerance scaled back to meters.
  const RigidTransform final_pose = trajectories[0].steps.back().pose_after;
  CHECK((final_pose.translation - gt.translation).norm() < 0.0033 * 2 * model->scale + 1e-9);
  // Chamfer decreased.
  CHECK(trajectories[0].steps.back().chamfer_after < trajectories[0].init_chamfer);
}

TEST_CASE("environment: two interpenetrating boxes become feasible under the expert") {
  const auto model = box_model(512);
  RefineScene scene;
  scene.plane.pose = RigidTransform();
  // Ground truth: box B rests on top of box A.
  const RigidTransform gt_a(Rotation(), Vec3(0, 0, 0.025));
  const RigidTransform gt_b(Rotation(), Vec3(0, 0, 0.075));
  // Init poses sink B into A and push A sideways: interpenetrating scene.
  const RigidTransform init_a(Rotation(), Vec3(0.02, 0, 0.025));
  const RigidTransform init_b(Rotation(), Vec3(0, 0, 0.045));
  for (const auto& [gt, init] : {std::pair{gt_a, init_a}, std::pair{gt_b, init_b}}) {
    EpisodeObject obj;
    obj.model = model;
    obj.gt_pose = gt;
    obj.init_pose = init;
    obj.source_cam = model->target_cloud.transformed(gt);
    scene.objects.push_back(obj);
  }

  EnvConfig cfg;
  RefinementEnv env(scene, cfg);
  const auto trajectories = env.run(PolicyKind::kExpert);
  REQUIRE(trajectories.size() == 2);
  // Still interpenetrating right after the first step.
  CHECK(trajectories[1].steps.front().verdict_after.feasible == false);
  for (const Trajectory& traj : trajectories) {
    CHECK(traj.steps.back().verdict_after.feasible);
    CHECK(traj.steps.back().verdict_after.stable);
  }
}

TEST_CASE("observation rows, outlier handling and stale-cache error") {
  const auto model = box_model(256);
  const RigidTransform gt = resting_pose(0.025);
  RefineScene scene = simple_scene(model, gt, gt);
  scene.objects[0].source_cam.labels.assign(scene.objects[0].source_cam.size(), 1);

  EnvConfig cfg;
  cfg.record_observations = true;
  cfg.iterations = 2;
  RefinementEnv env(scene, cfg);
  const auto trajectories = env.run(PolicyKind::kExpert);
  const Observation& obs = trajectories[0].steps[0].observation;
  REQUIRE(obs.source.size() == scene.objects[0].source_cam.size());
  REQUIRE(obs.target.size() == model->target_cloud.size());
  // Perfect pose: source and target stay pairwise close (same sampled points).
  for (std::size_t i = 0; i < obs.source.size(); ++i) {
    CHECK((obs.source[i].position - obs.target[i].position).norm() < 1e-9);
    CHECK(std::abs(obs.source[i].surface_distance - obs.target[i].surface_distance) < 1e-9);
    CHECK(obs.target[i].position.norm() <= 1.0 + 1e-9);
    CHECK(std::isfinite(obs.source[i].surface_distance));
  }
  const auto one_hot = obs.class_one_hot();
  CHECK(one_hot.size() == static_cast<std::size_t>(cfg.num_classes));
  CHECK(one_hot[static_cast<std::size_t>(obs.class_id)] == 1.0);

  // All points labeled outlier -> error.
  RefineScene bad = simple_scene(model, gt, gt);
  bad.objects[0].source_cam.labels.assign(bad.objects[0].source_cam.size(), 0);
  RefinementEnv bad_env(bad, cfg);
  CHECK_THROWS_AS(bad_env.run(PolicyKind::kExpert), std::runtime_error);
}

TEST_CASE("refinement is deterministic") {
  const auto model = box_model(256);
  const RigidTransform gt = resting_pose(0.025);
  const RigidTransform init = perturb_pose(gt, 40.0, 0.5, model->scale, 7);
  EnvConfig cfg;

  auto run_once = [&] {
    RefineScene scene = simple_scene(model, gt, init);
    RefinementEnv env(scene, cfg);
    return env.run(PolicyKind::kGreedy);
  };
  const auto a = run_once();
  const auto b = run_once();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a[0].steps.size(); ++i) {
    CHECK(a[0].steps[i].action.rotation == b[0].steps[i].action.rotation);
    CHECK(a[0].steps[i].action.translation == b[0].steps[i].action.translation);
    CHECK((a[0].steps[i].pose_after.matrix() - b[0].steps[i].pose_after.matrix()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(a[0].steps[i].chamfer_after == b[0].steps[i].chamfer_after);
  }
}

TEST_CASE("il dataset export/import round trip") {
  const auto model = box_model(128);
  const RigidTransform gt = resting_pose(0.025);
  EnvConfig cfg;
  cfg.iterations = 4;
  cfg.record_observations = true;

  std::vector<Trajectory> trajectories;
  for (int e = 0; e < 3; ++e) {
    const RigidTransform init = perturb_pose(gt, 30.0, 0.3, model->scale, 100 + e);
    RefineScene scene = simple_scene(model, gt, init);
    RefinementEnv env(scene, cfg);
    auto t = env.run(PolicyKind::kExpert);
    trajectories.push_back(std::move(t[0]));
  }

  const auto path = (std::filesystem::temp_directory_path() / "poseref_il.jsonl").string();
  export_il_dataset(trajectories, path);
  const auto records = import_il_dataset(path);
  REQUIRE(records.size() == 3 * 4);

  std::size_t ri = 0;
  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    for (const TrajectoryStep& s : trajectories[e].steps) {
      const IlRecord& rec = records[ri++];
      CHECK(rec.episode == static_cast<int>(e));
      CHECK(rec.iteration == s.iteration);
      CHECK(rec.action.rotation == s.action.rotation);
      CHECK(rec.action.translation == s.action.translation);
      CHECK(rec.alignment_reward == s.alignment_reward);
      CHECK(rec.plausibility_reward == s.plausibility_reward);
      REQUIRE(rec.observation.source.size() == s.observation.source.size());
      for (std::size_t i = 0; i < rec.observation.source.size(); ++i) {
        CHECK(rec.observation.source[i].position == s.observation.source[i].position);
        CHECK(rec.observation.source[i].surface_distance == s.observation.source[i].surface_distance);
      }
      // Action indices within bounds.
      for (int i = 0; i < 3; ++i) {
        CHECK(rec.action.rotation[static_cast<std::size_t>(i)] >= 0);
        CHECK(rec.action.rotation[static_cast<std::size_t>(i)] < cfg.action_space.num_per_axis());
      }
    }
  }
  // Trajectories without observations cannot be exported.
  EnvConfig no_obs = cfg;
  no_obs.record_observations = false;
  RefineScene scene = simple_scene(model, gt, gt);
  RefinementEnv env(scene, no_obs);
  auto bare = env.run(PolicyKind::kExpert);
  CHECK_THROWS_AS(export_il_dataset(bare, path), std::invalid_argument);
  std::filesystem::remove(path);
}
