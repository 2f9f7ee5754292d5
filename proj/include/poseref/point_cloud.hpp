#pragma once

#include <cstdint>
#include <vector>

#include "poseref/geometry.hpp"

namespace poseref {

// Point cloud with optional per-point unit normals and integer labels.
// Optional arrays are either empty or the same length as `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<int> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_labels() const { return !labels.empty(); }

  // Throws std::invalid_argument on length mismatch or non-unit normals.
  void validate(double normal_tol = 1e-6) const;

  // Rotates points and normals, translates points.
  PointCloud transformed(const RigidTransform& t) const;

  // Affine map p -> (p - shift) * scale. Normals unchanged.
  PointCloud shifted_scaled(const Vec3& shift, double scale) const;

  Vec3 centroid() const;

  // Maximal distance from `center` to any point.
  double max_radius(const Vec3& center) const;

  // Maximal pairwise distance (exact, quadratic scan).
  double diameter() const;
};

// Symmetric Chamfer distance: mean nearest-neighbor distance from a to b plus
// mean nearest-neighbor distance from b to a (unsquared). Throws on empty input.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

}  // namespace poseref
