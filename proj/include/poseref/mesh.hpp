#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "poseref/geometry.hpp"
#include "poseref/point_cloud.hpp"

namespace poseref {

// Triangle mesh with per-face unit normals.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<Vec3> face_normals;

  std::size_t num_faces() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  // Recomputes face normals from vertex winding. Zero-area faces get a zero
  // normal; validate() rejects those.
  void compute_face_normals();

  // Checks index ranges and unit face normals.
  void validate(double normal_tol = 1e-6) const;

  double face_area(std::size_t f) const;
  double total_area() const;

  TriangleMesh transformed(const RigidTransform& t) const;

  // Volume centroid by signed-tetrahedron sums; requires a closed mesh.
  Vec3 volume_centroid() const;

  // Axis-aligned bounds.
  void bounds(Vec3& lo, Vec3& hi) const;
};

// Uniform surface sampling: faces chosen with probability proportional to
// area, points placed uniformly per face. Each sample carries the normal of
// the face it came from. Deterministic for a fixed seed.
// Throws std::invalid_argument if the mesh has no positive-area face.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace poseref
