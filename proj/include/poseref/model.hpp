#pragma once

#include <cstdint>
#include <utility>

#include "poseref/mesh.hpp"
#include "poseref/point_cloud.hpp"
#include "poseref/symmetry.hpp"

namespace poseref {

// Object model in its canonical frame: mesh, sampled target cloud with face
// normals, and the constants derived from the target cloud.
struct ObjectModel {
  TriangleMesh mesh;
  PointCloud target_cloud;
  Vec3 centroid = Vec3::Zero();  // mu_Y: centroid of the target cloud
  double scale = 0.0;            // d_Y: max distance from mu_Y to any target point
  double diameter = 0.0;         // max pairwise target distance
  SymmetryClass symmetry;
  Vec3 com = Vec3::Zero();  // center of mass, canonical frame
  int class_id = 0;
};

// Samples the target cloud and fills in all derived constants. The center of
// mass defaults to the mesh volume centroid; pass com_override to replace it
// (e.g. from a scene annotation).
ObjectModel build_object_model(TriangleMesh mesh, const SymmetryClass& symmetry, int class_id,
                               std::size_t sample_count, std::uint64_t seed,
                               const Vec3* com_override = nullptr);

// Normalization with respect to the model target: both clouds are shifted by
// -mu_Y and scaled by 1/d_Y. Normals are unchanged. Throws if d_Y is zero.
std::pair<PointCloud, PointCloud> normalize_pair(const PointCloud& source,
                                                 const ObjectModel& model);

// Inverse of the normalization affine map: w -> d_Y * w + mu_Y.
PointCloud denormalize(const PointCloud& cloud, const ObjectModel& model);

// Conjugates a rigid transform by the normalization map N(p) = (p - mu)/d:
// returns N o t o N^-1 (still rigid; the uniform scales cancel).
RigidTransform conjugate_by_normalization(const RigidTransform& t, const Vec3& mu, double d);

// Inverse conjugation: N^-1 o t o N.
RigidTransform conjugate_by_denormalization(const RigidTransform& t, const Vec3& mu, double d);

}  // namespace poseref
