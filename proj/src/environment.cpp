#include "poseref/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poseref/normals.hpp"

namespace poseref {

void ActionSpace::validate() const {
  if (step_sizes.empty()) throw std::invalid_argument("ActionSpace: no step sizes");
  double prev = 0.0;
  for (double s : step_sizes) {
    if (s <= prev) throw std::invalid_argument("ActionSpace: sizes must be positive and strictly increasing");
    prev = s;
  }
}

double ActionSpace::value(int index) const {
  const int n = static_cast<int>(step_sizes.size());
  if (index < 0 || index > 2 * n) throw std::invalid_argument("ActionSpace: index out of range");
  if (index == n) return 0.0;
  if (index < n) return -step_sizes[static_cast<std::size_t>(n - 1 - index)];
  return step_sizes[static_cast<std::size_t>(index - n - 1)];
}

int ActionSpace::floor_index(double residual) const {
  const int n = static_cast<int>(step_sizes.size());
  const double mag = std::abs(residual);
  if (mag < step_sizes.front()) return n;
  int j = 0;
  for (int i = 0; i < n; ++i) {
    if (step_sizes[static_cast<std::size_t>(i)] <= mag) j = i;
  }
  return residual > 0.0 ? n + 1 + j : n - 1 - j;
}

Action Action::stop(const ActionSpace& space) {
  Action a;
  a.rotation.fill(space.stop_index());
  a.translation.fill(space.stop_index());
  return a;
}

bool Action::is_stop(const ActionSpace& space) const {
  const int s = space.stop_index();
  return rotation[0] == s && rotation[1] == s && rotation[2] == s && translation[0] == s &&
         translation[1] == s && translation[2] == s;
}

RigidTransform apply_action(const RigidTransform& estimate, const Action& action,
                            const ActionSpace& space) {
  const Vec3 rot_steps(space.value(action.rotation[0]), space.value(action.rotation[1]),
                       space.value(action.rotation[2]));
  const Vec3 trans_steps(space.value(action.translation[0]), space.value(action.translation[1]),
                         space.value(action.translation[2]));
  const Rotation step = rotation_from_euler_xyz(rot_steps);
  return RigidTransform(step * estimate.rotation, estimate.translation + trans_steps);
}

Action expert_action(const RigidTransform& gt, const RigidTransform& estimate,
                     const SymmetrySet& syms, const ActionSpace& space) {
  const auto [idx, gt_sym] = closest_symmetric_pose(gt, estimate, syms);
  const Rotation residual_rot = gt_sym.rotation * estimate.rotation.inverse();
  const Vec3 residual_trans = gt_sym.translation - estimate.translation;
  const Vec3 euler = euler_xyz(residual_rot);
  Action a;
  for (int axis = 0; axis < 3; ++axis) {
    a.rotation[static_cast<std::size_t>(axis)] = space.floor_index(euler[axis]);
    a.translation[static_cast<std::size_t>(axis)] = space.floor_index(residual_trans[axis]);
  }
  return a;
}

namespace {

// Chamfer distance with a prebuilt tree on the fixed side.
double chamfer_vs_fixed(const PointCloud& moved, const PointCloud& fixed, const KdTree& fixed_tree) {
  const KdTree moved_tree(moved.points);
  double sum_mf = 0.0;
  for (const Vec3& p : moved.points) sum_mf += fixed_tree.nearest(p).distance;
  double sum_fm = 0.0;
  for (const Vec3& p : fixed.points) sum_fm += moved_tree.nearest(p).distance;
  return sum_mf / static_cast<double>(moved.size()) + sum_fm / static_cast<double>(fixed.size());
}

PointCloud apply_correction(const PointCloud& source, const RigidTransform& correction) {
  return source.transformed(correction);
}

}  // namespace

Action greedy_action(const PointCloud& source_norm0, const RigidTransform& estimate,
                     const PointCloud& target_norm, const KdTree& target_tree,
                     const ActionSpace& space) {
  space.validate();
  Action chosen = Action::stop(space);
  const double stop_cd =
      chamfer_vs_fixed(apply_correction(source_norm0, estimate), target_norm, target_tree);

  // Per axis independently: single-axis lookahead against the current estimate.
  for (int axis = 0; axis < 6; ++axis) {
    double best_cd = stop_cd;
    int best_index = space.stop_index();
    for (int index = 0; index < space.num_per_axis(); ++index) {
      if (index == space.stop_index()) continue;
      Action candidate = Action::stop(space);
      if (axis < 3) {
        candidate.rotation[static_cast<std::size_t>(axis)] = index;
      } else {
        candidate.translation[static_cast<std::size_t>(axis - 3)] = index;
      }
      const RigidTransform next = apply_action(estimate, candidate, space);
      const double cd = chamfer_vs_fixed(apply_correction(source_norm0, next), target_norm, target_tree);
      if (cd < best_cd) {  // ties keep stop / earlier index
        best_cd = cd;
        best_index = index;
      }
    }
    if (axis < 3) {
      chosen.rotation[static_cast<std::size_t>(axis)] = best_index;
    } else {
      chosen.translation[static_cast<std::size_t>(axis - 3)] = best_index;
    }
  }
  return chosen;
}

double alignment_reward(double prev_cd, double next_cd, const AlignmentRewardConfig& rho) {
  if (prev_cd < 0.0 || next_cd < 0.0) {
    throw std::invalid_argument("alignment_reward: Chamfer distances must be non-negative");
  }
  if (std::abs(next_cd - prev_cd) <= 1e-12) return -rho.stagnate;
  return next_cd > prev_cd ? -rho.worsen : rho.improve;
}

double plausibility_reward(const PlausibilityVerdict& verdict, double rho_p) {
  return verdict.stable ? rho_p : -rho_p;
}

std::vector<double> Observation::class_one_hot() const {
  std::vector<double> v(static_cast<std::size_t>(num_classes), 0.0);
  if (class_id >= 0 && class_id < num_classes) v[static_cast<std::size_t>(class_id)] = 1.0;
  return v;
}

std::vector<RigidTransform> Trajectory::poses() const {
  std::vector<RigidTransform> out;
  out.reserve(steps.size() + 1);
  out.push_back(init_pose);
  for (const TrajectoryStep& s : steps) out.push_back(s.pose_after);
  return out;
}

RefinementEnv::RefinementEnv(RefineScene scene, EnvConfig cfg)
    : scene_(std::move(scene)), cfg_(std::move(cfg)) {
  cfg_.action_space.validate();
  if (scene_.objects.empty()) throw std::invalid_argument("RefinementEnv: empty scene");
  if (cfg_.iterations < 1) throw std::invalid_argument("RefinementEnv: iterations must be >= 1");

  const std::size_t n = scene_.objects.size();
  source_norm0_.resize(n);
  target_norm_.resize(n);
  target_tree_.resize(n);
  aligned_gt_.resize(n);
  aligned_gt_tree_.resize(n);
  gt_norm_.resize(n);
  correction_.assign(n, RigidTransform());
  syms_.resize(n);
  source_plane_.resize(n);

  for (std::size_t oi = 0; oi < n; ++oi) {
    EpisodeObject& obj = scene_.objects[oi];
    if (!obj.model) throw std::invalid_argument("RefinementEnv: object without model");
    if (obj.source_cam.empty()) throw std::invalid_argument("RefinementEnv: empty source cloud");
    if (!obj.source_cam.has_normals()) {
      obj.source_cam = estimate_normals(obj.source_cam, std::min<std::size_t>(10, obj.source_cam.size()),
                                        Vec3::Zero());
    }
    const ObjectModel& model = *obj.model;

    // Source brought into the canonical frame by the initial estimate, then normalized.
    const auto [src_norm, tgt_norm] =
        normalize_pair(obj.source_cam.transformed(obj.init_pose.inverse()), model);
    source_norm0_[oi] = src_norm;
    target_norm_[oi] = tgt_norm;
    target_tree_[oi].build(tgt_norm.points);

    // Normalized-space ground-truth correction: N o (T_init^-1 T_gt)^-1 o N^-1.
    const RigidTransform a_inv = compose(obj.gt_pose.inverse(), obj.init_pose);
    gt_norm_[oi] = conjugate_by_normalization(a_inv, model.centroid, model.scale);

    aligned_gt_[oi] = source_norm0_[oi].transformed(gt_norm_[oi]);
    aligned_gt_tree_[oi].build(aligned_gt_[oi].points);

    syms_[oi] = enumerate_symmetries(model.symmetry);
    source_plane_[oi] = obj.source_cam.transformed(scene_.plane.pose);
  }
}

RigidTransform RefinementEnv::camera_pose(std::size_t oi) const {
  const EpisodeObject& obj = scene_.objects[oi];
  const RigidTransform denorm = conjugate_by_denormalization(
      correction_[oi].inverse(), obj.model->centroid, obj.model->scale);
  return compose(obj.init_pose, denorm);
}

const RigidTransform& RefinementEnv::correction(std::size_t oi) const { return correction_[oi]; }
const RigidTransform& RefinementEnv::gt_correction(std::size_t oi) const { return gt_norm_[oi]; }
const SymmetrySet& RefinementEnv::symmetries(std::size_t oi) const { return syms_[oi]; }

void RefinementEnv::recompute_fields(int iteration) {
  // Snapshot of current camera-frame poses for the whole scene.
  SceneState snapshot;
  snapshot.plane = scene_.plane;
  snapshot.gravity = scene_.gravity;
  snapshot.objects.reserve(scene_.objects.size());
  for (std::size_t oi = 0; oi < scene_.objects.size(); ++oi) {
    SceneObject so;
    so.model = scene_.objects[oi].model;
    so.estimate = camera_pose(oi);
    snapshot.objects.push_back(std::move(so));
  }
  const PlaneFrameScene frame = to_plane_frame(snapshot);
  const SceneDistanceIndex index(frame, scene_.gravity, cfg_.plausibility);

  const std::size_t n = scene_.objects.size();
  source_fields_.resize(n);
  target_fields_.resize(n);
  verdicts_.resize(n);
  for (std::size_t oi = 0; oi < n; ++oi) {
    source_fields_[oi] = index.query(source_plane_[oi], oi);
    target_fields_[oi] = index.query(frame.targets[oi], oi);

    const CriticalPoints cp = critical_points(target_fields_[oi], cfg_.plausibility.epsilon);
    std::vector<Vec3> supports;
    supports.reserve(cp.supported.size());
    for (std::size_t idx : cp.supported) supports.push_back(frame.targets[oi].points[idx]);
    const Vec3 com_plane =
        compose(scene_.plane.pose, snapshot.objects[oi].estimate).apply(scene_.objects[oi].model->com);
    verdicts_[oi] = plausibility_verdict(cp, stability_check(com_plane, supports, scene_.gravity));
  }
  field_iteration_ = iteration;
}

Observation RefinementEnv::observation(std::size_t oi) const {
  if (field_iteration_ != current_iteration_) {
    throw std::logic_error("RefinementEnv::observation: stale surface-distance cache");
  }
  const EpisodeObject& obj = scene_.objects[oi];
  Observation obs;
  obs.class_id = obj.model->class_id;
  obs.num_classes = cfg_.num_classes;

  const PointCloud current = source_norm0_[oi].transformed(correction_[oi]);
  const double inv_scale = 1.0 / obj.model->scale;

  obs.source.resize(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    obs.source[i] = {current.points[i], current.normals[i],
                     source_fields_[oi].entries[i].distance * inv_scale};
  }
  obs.target.resize(target_norm_[oi].size());
  for (std::size_t i = 0; i < target_norm_[oi].size(); ++i) {
    obs.target[i] = {target_norm_[oi].points[i], target_norm_[oi].normals[i],
                     target_fields_[oi].entries[i].distance * inv_scale};
  }

  obs.source_foreground.assign(current.size(), 1);
  if (obj.source_cam.has_labels()) {
    std::size_t fg = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      obs.source_foreground[i] = obj.source_cam.labels[i] != 0 ? 1 : 0;
      fg += obs.source_foreground[i];
    }
    if (fg == 0) throw std::runtime_error("RefinementEnv::observation: empty foreground set");
  }
  return obs;
}

double RefinementEnv::chamfer_to_aligned(std::size_t oi, const RigidTransform& correction) const {
  const PointCloud moved = source_norm0_[oi].transformed(correction);
  const KdTree moved_tree(moved.points);
  double sum_ma = 0.0;
  for (const Vec3& p : moved.points) sum_ma += aligned_gt_tree_[oi].nearest(p).distance;
  double sum_am = 0.0;
  for (const Vec3& p : aligned_gt_[oi].points) sum_am += moved_tree.nearest(p).distance;
  return sum_ma / static_cast<double>(moved.size()) +
         sum_am / static_cast<double>(aligned_gt_[oi].size());
}

std::vector<Trajectory> RefinementEnv::run(PolicyKind policy, const ExternalPolicy* external,
                                           const ScoringContext* scoring) {
  if (policy == PolicyKind::kExternal && external == nullptr) {
    throw std::invalid_argument("RefinementEnv::run: external policy missing");
  }
  if (scoring != nullptr &&
      (scoring->observed_depth == nullptr || scoring->observed_normals == nullptr ||
       scoring->masks.size() != scene_.objects.size())) {
    throw std::invalid_argument("RefinementEnv::run: incomplete scoring context");
  }

  const std::size_t n = scene_.objects.size();
  std::vector<Trajectory> trajectories(n);
  std::vector<double> prev_cd(n);

  current_iteration_ = 0;
  recompute_fields(0);

  for (std::size_t oi = 0; oi < n; ++oi) {
    Trajectory& traj = trajectories[oi];
    traj.object_index = static_cast<int>(oi);
    traj.class_id = scene_.objects[oi].model->class_id;
    traj.init_pose = scene_.objects[oi].init_pose;
    traj.gt_pose = scene_.objects[oi].gt_pose;
    traj.init_chamfer = chamfer_to_aligned(oi, correction_[oi]);
    prev_cd[oi] = traj.init_chamfer;
    if (scoring != nullptr) {
      const auto [depth, normals] = render(scene_.objects[oi].model->mesh, traj.init_pose, scoring->cam);
      traj.init_score = score_pose(depth, normals, *scoring->observed_depth,
                                   *scoring->observed_normals, scoring->masks[oi], scoring->score);
    }
  }

  for (int iter = 0; iter < cfg_.iterations; ++iter) {
    // Select all actions against the same barrier state.
    std::vector<Action> actions(n, Action::stop(cfg_.action_space));
    std::vector<Observation> observations(n);
    for (std::size_t oi = 0; oi < n; ++oi) {
      const bool needs_obs = cfg_.record_observations || policy == PolicyKind::kExternal;
      if (needs_obs) observations[oi] = observation(oi);
      switch (policy) {
        case PolicyKind::kExpert:
          actions[oi] = expert_action(gt_norm_[oi], correction_[oi], syms_[oi], cfg_.action_space);
          break;
        case PolicyKind::kGreedy:
          actions[oi] = greedy_action(source_norm0_[oi], correction_[oi], target_norm_[oi],
                                      target_tree_[oi], cfg_.action_space);
          break;
        case PolicyKind::kExternal:
          actions[oi] = (*external)(observations[oi], oi);
          break;
      }
    }

    // Barrier: apply all pose updates, then refresh the scene fields once.
    for (std::size_t oi = 0; oi < n; ++oi) {
      correction_[oi] = apply_action(correction_[oi], actions[oi], cfg_.action_space);
    }
    current_iteration_ = iter + 1;
    recompute_fields(iter + 1);

    for (std::size_t oi = 0; oi < n; ++oi) {
      TrajectoryStep step;
      step.iteration = iter;
      step.action = actions[oi];
      step.correction_after = correction_[oi];
      step.pose_after = camera_pose(oi);
      step.chamfer_after = chamfer_to_aligned(oi, correction_[oi]);
      step.alignment_reward = alignment_reward(prev_cd[oi], step.chamfer_after, cfg_.rho);
      prev_cd[oi] = step.chamfer_after;
      step.verdict_after = verdicts_[oi];
      step.plausibility_reward = plausibility_reward(step.verdict_after, cfg_.rho_p);
      if (cfg_.record_observations) step.observation = std::move(observations[oi]);
      if (scoring != nullptr) {
        const auto [depth, normals] =
            render(scene_.objects[oi].model->mesh, step.pose_after, scoring->cam);
        step.score = score_pose(depth, normals, *scoring->observed_depth,
                                *scoring->observed_normals, scoring->masks[oi], scoring->score);
      }
      trajectories[oi].steps.push_back(std::move(step));
    }
  }
  return trajectories;
}

}  // namespace poseref
