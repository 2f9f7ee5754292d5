#include "poseref/model.hpp"

#include <stdexcept>

namespace poseref {

ObjectModel build_object_model(TriangleMesh mesh, const SymmetryClass& symmetry, int class_id,
                               std::size_t sample_count, std::uint64_t seed,
                               const Vec3* com_override) {
  mesh.compute_face_normals();
  mesh.validate();
  ObjectModel model;
  model.target_cloud = sample_mesh_surface(mesh, sample_count, seed);
  model.centroid = model.target_cloud.centroid();
  model.scale = model.target_cloud.max_radius(model.centroid);
  model.diameter = model.target_cloud.diameter();
  model.symmetry = symmetry;
  model.com = com_override ? *com_override : mesh.volume_centroid();
  model.class_id = class_id;
  model.mesh = std::move(mesh);
  if (model.scale <= 0.0) {
    throw std::invalid_argument("build_object_model: degenerate model (d_Y = 0)");
  }
  return model;
}

std::pair<PointCloud, PointCloud> normalize_pair(const PointCloud& source,
                                                 const ObjectModel& model) {
  if (model.scale <= 0.0) {
    throw std::invalid_argument("normalize_pair: degenerate model (d_Y = 0)");
  }
  const double inv = 1.0 / model.scale;
  return {source.shifted_scaled(model.centroid, inv),
          model.target_cloud.shifted_scaled(model.centroid, inv)};
}

PointCloud denormalize(const PointCloud& cloud, const ObjectModel& model) {
  return cloud.shifted_scaled(-model.centroid / model.scale, model.scale);
}

RigidTransform conjugate_by_normalization(const RigidTransform& t, const Vec3& mu, double d) {
  if (d <= 0.0) throw std::invalid_argument("conjugate_by_normalization: d must be positive");
  // N(t(N^-1 w)) = R w + (R mu + tr - mu) / d
  return RigidTransform(t.rotation, (t.rotation * mu + t.translation - mu) / d);
}

RigidTransform conjugate_by_denormalization(const RigidTransform& t, const Vec3& mu, double d) {
  if (d <= 0.0) throw std::invalid_argument("conjugate_by_denormalization: d must be positive");
  // N^-1(t(N w)) = R w + (d tr + mu - R mu)
  return RigidTransform(t.rotation, d * t.translation + mu - t.rotation * mu);
}

}  // namespace poseref
