#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "poseref/kdtree.hpp"
#include "poseref/model.hpp"
#include "poseref/point_cloud.hpp"

namespace poseref {

// Supporting plane. `pose` maps camera-frame points into the plane frame:
// origin on the plane, z-axis along the outward (camera-facing) normal.
struct PlaneModel {
  RigidTransform pose;
  std::size_t inlier_count = 0;

  // Outward plane normal expressed in camera coordinates.
  Vec3 normal_in_camera() const { return pose.rotation.inverse() * Vec3(0, 0, 1); }
};

// RANSAC plane fit over the background points (camera frame). The refit is a
// least-squares plane over the winning inliers; the normal is oriented toward
// the camera origin. Deterministic for a fixed seed.
// Throws std::invalid_argument when no valid (non-collinear) sample exists.
PlaneModel fit_plane_ransac(const PointCloud& background, std::size_t iterations,
                            double inlier_threshold, std::uint64_t seed);

// One object placed in a scene.
struct SceneObject {
  std::shared_ptr<const ObjectModel> model;
  PointCloud source_cam;    // observed points, camera frame
  RigidTransform estimate;  // current estimated pose, canonical -> camera
};

struct SceneState {
  PlaneModel plane;
  std::vector<SceneObject> objects;
  Vec3 gravity = Vec3(0, 0, -1);  // plane frame
};

// Scene clouds expressed in the plane frame: sources by P, targets by
// P composed with the current estimate.
struct PlaneFrameScene {
  std::vector<PointCloud> sources;
  std::vector<PointCloud> targets;
};

PlaneFrameScene to_plane_frame(const SceneState& scene);

struct PlausibilityConfig {
  double epsilon = 0.01;  // critical-point threshold, meters
  std::size_t k = 5;      // neighbors for the inside/support quorum
  // Fraction of k that must agree. Unanimity: a solid is the intersection of
  // its faces' half-spaces, so one dissenting neighbor (a face whose
  // half-space excludes the query) vetoes the inside verdict. A majority
  // quorum misfires for points behind a single face plane but outside the
  // solid, e.g. beside a stacked box.
  double quorum = 1.0;
};

// Signed distance sample for one query point: minimum over the plane and all
// other objects' target clouds, negative inside a surface (Eq. of the inside
// test decided by a k-neighbor quorum).
struct SurfaceDistanceEntry {
  double distance = 0.0;
  Vec3 nearest_normal = Vec3(0, 0, 1);
  Vec3 nearest_point = Vec3::Zero();
  // Fraction of the k nearest neighbors of the winning surface whose normal
  // opposes gravity (supports the query point). The plane counts as 0 or 1.
  double support_fraction = 0.0;
};

struct SurfaceDistanceField {
  std::vector<SurfaceDistanceEntry> entries;
  double quorum = 1.0;

  std::size_t size() const { return entries.size(); }
};

// Prebuilt nearest-neighbor indices over the plane-frame target clouds;
// read-only once built, so per-object queries may run concurrently.
class SceneDistanceIndex {
 public:
  SceneDistanceIndex(const PlaneFrameScene& scene, Vec3 gravity, PlausibilityConfig cfg);

  // Surface distances for `query` (plane frame). `exclude` removes one object
  // (its own target) from the candidate surfaces; pass npos to keep all.
  SurfaceDistanceField query(const PointCloud& query_points, std::size_t exclude) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<KdTree> trees_;
  std::vector<const PointCloud*> targets_;
  std::vector<PointCloud> owned_targets_;
  Vec3 gravity_;
  PlausibilityConfig cfg_;
};

// Convenience one-shot form; builds the index and queries one cloud given in
// camera frame (it is moved into the plane frame alongside the scene).
SurfaceDistanceField surface_distance(const PointCloud& query_points, const SceneState& scene,
                                      std::size_t exclude, std::size_t k, double quorum);

struct CriticalPoints {
  std::vector<std::size_t> intersecting;  // d < -epsilon
  std::vector<std::size_t> contact;       // |d| < epsilon
  std::vector<std::size_t> supported;     // contact with opposing normal quorum
};

CriticalPoints critical_points(const SurfaceDistanceField& field, double epsilon);

// Cosine dead zone for the per-neighbor votes. Flush-coplanar faces (e.g. a
// box stacked on an equal-footprint box) put query points exactly on another
// object's face plane, where the cosine is zero up to rounding noise; a vote
// there must not count as alignment.
inline constexpr double kVoteCosineMargin = 0.02;

// Inside vote for one neighbor: the neighbor normal points from the query
// toward the surface point with a margin above perpendicular.
inline bool inside_vote(const Vec3& normal, const Vec3& surface_point, const Vec3& query) {
  const Vec3 offset = surface_point - query;
  return normal.dot(offset) > kVoteCosineMargin * offset.norm();
}

// Support vote for one neighbor: the neighbor normal opposes gravity.
inline bool support_vote(const Vec3& normal, const Vec3& gravity) {
  return normal.dot(gravity) < -kVoteCosineMargin;
}

// Projects the center of mass and the supported points along gravity onto the
// plane and tests hull containment. Fewer than 3 non-collinear supports, or
// gravity parallel to the plane, is unstable.
bool stability_check(const Vec3& com_plane, const std::vector<Vec3>& supported_points,
                     const Vec3& gravity);

struct PlausibilityVerdict {
  bool intersecting = false;
  bool floating = false;
  bool feasible = false;
  bool stable = false;
};

PlausibilityVerdict plausibility_verdict(const CriticalPoints& cp, bool stability);

// Full per-object plausibility pass over a scene: plane-frame transform,
// surface distances on each object's target cloud, critical points, stability.
std::vector<PlausibilityVerdict> scene_verdicts(const SceneState& scene,
                                                const PlausibilityConfig& cfg);

// 2D helpers (exposed for tests).
// Convex hull in counter-clockwise order, collinear points dropped.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points);
// Boundary-inclusive within tol.
bool point_in_convex_hull(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& hull,
                          double tol = 1e-9);

}  // namespace poseref
