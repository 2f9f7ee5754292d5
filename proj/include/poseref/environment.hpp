#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "poseref/plausibility.hpp"
#include "poseref/scoring.hpp"
#include "poseref/symmetry.hpp"

namespace poseref {

// Discrete per-axis refinement steps. `step_sizes` holds the positive
// magnitudes, strictly increasing; each axis additionally has the signed
// variants and a stop action. Rotation steps are radians, translation steps
// are units of the normalized representation.
struct ActionSpace {
  std::vector<double> step_sizes = {0.0033, 0.01, 0.03, 0.09, 0.27};

  void validate() const;

  // Per-axis action indices run [-s_max..0..+s_max] packed as 0..2n:
  // index < n is a negative step, n is stop, index > n is positive.
  int num_per_axis() const { return static_cast<int>(step_sizes.size()) * 2 + 1; }
  int stop_index() const { return static_cast<int>(step_sizes.size()); }
  double value(int index) const;

  // Expert floor rule: the largest step with magnitude <= |residual| and
  // matching sign; stop when |residual| is below the smallest step.
  int floor_index(double residual) const;
};

struct Action {
  std::array<int, 3> rotation{};     // per-axis indices into the ActionSpace
  std::array<int, 3> translation{};

  static Action stop(const ActionSpace& space);
  bool is_stop(const ActionSpace& space) const;
};

// Disentangled pose update: the rotation steps left-compose onto the estimate
// as Rx*Ry*Rz of the signed values; translation steps add per axis.
RigidTransform apply_action(const RigidTransform& estimate, const Action& action,
                            const ActionSpace& space);

// Symmetry-aware expert: replaces the ground truth by its closest symmetric
// equivalent, splits the residual into intrinsic x-y-z Euler angles and
// per-axis translation offsets, and floors each onto the action space.
Action expert_action(const RigidTransform& gt, const RigidTransform& estimate,
                     const SymmetrySet& syms, const ActionSpace& space);

// GT-free one-step lookahead: per axis independently, the step that minimizes
// the Chamfer distance between the moved source and the target; ties stop.
// `target_tree` must be built over `target_norm.points`.
Action greedy_action(const PointCloud& source_norm0, const RigidTransform& estimate,
                     const PointCloud& target_norm, const KdTree& target_tree,
                     const ActionSpace& space);

struct AlignmentRewardConfig {
  double worsen = 0.6;    // rho^-
  double stagnate = 0.1;  // rho^0
  double improve = 0.5;   // rho^+
};

// Discrete reward for the Chamfer-distance change: -rho^- on worsening,
// -rho^0 on stagnation (equality within 1e-12), +rho^+ on improvement.
double alignment_reward(double prev_cd, double next_cd, const AlignmentRewardConfig& rho);

double plausibility_reward(const PlausibilityVerdict& verdict, double rho_p);

struct ObservationPoint {
  Vec3 position;            // normalized frame
  Vec3 normal;
  double surface_distance;  // plane-frame surface distance / d_Y
};

struct Observation {
  std::vector<ObservationPoint> source;
  std::vector<ObservationPoint> target;
  std::vector<std::uint8_t> source_foreground;  // 1 = foreground, 0 = outlier
  int class_id = 0;
  int num_classes = 1;

  std::vector<double> class_one_hot() const;
};

struct EnvConfig {
  ActionSpace action_space;
  AlignmentRewardConfig rho;
  double rho_p = 0.5;
  PlausibilityConfig plausibility;
  int iterations = 10;
  int num_classes = 4;
  bool record_observations = false;
};

// One object episode: observed source, initial estimate and ground truth as
// canonical->camera poses.
struct EpisodeObject {
  std::shared_ptr<const ObjectModel> model;
  PointCloud source_cam;
  RigidTransform init_pose;
  RigidTransform gt_pose;
};

struct RefineScene {
  PlaneModel plane;
  std::vector<EpisodeObject> objects;
  Vec3 gravity = Vec3(0, 0, -1);
};

struct TrajectoryStep {
  int iteration = 0;
  Action action;
  double alignment_reward = 0.0;
  double plausibility_reward = 0.0;
  double chamfer_after = 0.0;
  RigidTransform correction_after;  // normalized-space estimate
  RigidTransform pose_after;        // canonical -> camera
  PlausibilityVerdict verdict_after;
  double score = std::numeric_limits<double>::quiet_NaN();
  Observation observation;  // filled when record_observations is set
};

struct Trajectory {
  int object_index = 0;
  int class_id = 0;
  RigidTransform init_pose;
  RigidTransform gt_pose;
  double init_chamfer = 0.0;
  double init_score = std::numeric_limits<double>::quiet_NaN();
  std::vector<TrajectoryStep> steps;

  // Camera-frame pose sequence: init first, then one pose per step.
  std::vector<RigidTransform> poses() const;
};

enum class PolicyKind { kExpert, kGreedy, kExternal };

// External policies see the observation and return an action; this is the
// plug-in point for a trained agent.
using ExternalPolicy = std::function<Action(const Observation&, std::size_t object_index)>;

// Observed images for per-step pose scoring inside the refinement loop.
struct ScoringContext {
  CameraIntrinsics cam;
  const DepthImage* observed_depth = nullptr;
  const NormalImage* observed_normals = nullptr;
  std::vector<PixelMask> masks;  // one per object
  ScoreConfig score;
};

// Scene-parallel iterative refinement. Surface distances are recomputed once
// per iteration for the whole scene; actions apply at a barrier.
class RefinementEnv {
 public:
  RefinementEnv(RefineScene scene, EnvConfig cfg);

  std::size_t num_objects() const { return scene_.objects.size(); }
  const EnvConfig& config() const { return cfg_; }

  // Current canonical->camera pose of one object.
  RigidTransform camera_pose(std::size_t object_index) const;
  // Normalized-space correction estimate.
  const RigidTransform& correction(std::size_t object_index) const;
  // Normalized-space ground-truth correction.
  const RigidTransform& gt_correction(std::size_t object_index) const;
  const SymmetrySet& symmetries(std::size_t object_index) const;

  // Observation from the current iteration's distance fields. Throws
  // std::logic_error if the fields are stale, std::runtime_error if the
  // object has no foreground point.
  Observation observation(std::size_t object_index) const;

  // Runs the full iteration budget and returns one trajectory per object.
  std::vector<Trajectory> run(PolicyKind policy, const ExternalPolicy* external = nullptr,
                              const ScoringContext* scoring = nullptr);

 private:
  void recompute_fields(int iteration);
  double chamfer_to_aligned(std::size_t oi, const RigidTransform& correction) const;

  RefineScene scene_;
  EnvConfig cfg_;

  std::vector<PointCloud> source_norm0_;
  std::vector<PointCloud> target_norm_;
  std::vector<KdTree> target_tree_;
  std::vector<PointCloud> aligned_gt_;  // X*: source under the gt correction
  std::vector<KdTree> aligned_gt_tree_;
  std::vector<RigidTransform> gt_norm_;
  std::vector<RigidTransform> correction_;
  std::vector<SymmetrySet> syms_;
  std::vector<PointCloud> source_plane_;  // P applied to the camera source

  int field_iteration_ = -1;
  std::vector<SurfaceDistanceField> source_fields_;
  std::vector<SurfaceDistanceField> target_fields_;
  std::vector<PlausibilityVerdict> verdicts_;
  int current_iteration_ = 0;
};

}  // namespace poseref
