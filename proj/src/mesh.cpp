#include "poseref/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poseref/rng.hpp"

namespace poseref {

void TriangleMesh::compute_face_normals() {
  face_normals.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3& a = vertices[faces[f][0]];
    const Vec3& b = vertices[faces[f][1]];
    const Vec3& c = vertices[faces[f][2]];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    face_normals[f] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
}

void TriangleMesh::validate(double normal_tol) const {
  for (const auto& f : faces) {
    for (std::uint32_t idx : f) {
      if (idx >= vertices.size()) throw std::invalid_argument("TriangleMesh: face index out of range");
    }
  }
  if (face_normals.size() != faces.size()) {
    throw std::invalid_argument("TriangleMesh: face normals missing");
  }
  for (const Vec3& n : face_normals) {
    if (std::abs(n.norm() - 1.0) > normal_tol) {
      throw std::invalid_argument("TriangleMesh: non-unit face normal");
    }
  }
}

double TriangleMesh::face_area(std::size_t f) const {
  const Vec3& a = vertices[faces[f][0]];
  const Vec3& b = vertices[faces[f][1]];
  const Vec3& c = vertices[faces[f][2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriangleMesh::total_area() const {
  double s = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) s += face_area(f);
  return s;
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& t) const {
  TriangleMesh out = *this;
  for (Vec3& v : out.vertices) v = t.apply(v);
  for (Vec3& n : out.face_normals) n = t.rotation * n;
  return out;
}

Vec3 TriangleMesh::volume_centroid() const {
  // Signed tetrahedra against the origin.
  double vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& f : faces) {
    const Vec3& a = vertices[f[0]];
    const Vec3& b = vertices[f[1]];
    const Vec3& c = vertices[f[2]];
    const double v = a.dot(b.cross(c)) / 6.0;
    vol += v;
    moment += v * (a + b + c) / 4.0;
  }
  if (std::abs(vol) < 1e-15) {
    throw std::invalid_argument("TriangleMesh::volume_centroid: degenerate volume");
  }
  return moment / vol;
}

void TriangleMesh::bounds(Vec3& lo, Vec3& hi) const {
  if (vertices.empty()) throw std::invalid_argument("TriangleMesh::bounds: no vertices");
  lo = hi = vertices[0];
  for (const Vec3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw std::invalid_argument("sample_mesh_surface: empty mesh");

  std::vector<double> cumulative(mesh.num_faces());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (total <= 0.0) throw std::invalid_argument("sample_mesh_surface: all faces degenerate");

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(n);
  out.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform(0.0, total);
    const std::size_t f = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const auto& face = mesh.faces[std::min(f, mesh.num_faces() - 1)];
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    // Uniform barycentric placement.
    const double s = std::sqrt(rng.uniform());
    const double t = rng.uniform();
    const Vec3 p = (1.0 - s) * a + s * (1.0 - t) * b + s * t * c;
    out.points.push_back(p);
    out.normals.push_back(mesh.face_normals[std::min(f, mesh.num_faces() - 1)]);
  }
  return out;
}

}  // namespace poseref
