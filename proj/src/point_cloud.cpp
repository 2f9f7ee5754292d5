#include "poseref/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

#include "poseref/kdtree.hpp"

namespace poseref {

void PointCloud::validate(double normal_tol) const {
  if (has_normals() && normals.size() != points.size()) {
    throw std::invalid_argument("PointCloud: normals length mismatch");
  }
  if (has_labels() && labels.size() != points.size()) {
    throw std::invalid_argument("PointCloud: labels length mismatch");
  }
  for (const Vec3& n : normals) {
    if (std::abs(n.norm() - 1.0) > normal_tol) {
      throw std::invalid_argument("PointCloud: non-unit normal");
    }
  }
}

PointCloud PointCloud::transformed(const RigidTransform& t) const {
  PointCloud out = *this;
  for (Vec3& p : out.points) p = t.apply(p);
  for (Vec3& n : out.normals) n = t.rotation * n;
  return out;
}

PointCloud PointCloud::shifted_scaled(const Vec3& shift, double scale) const {
  PointCloud out = *this;
  for (Vec3& p : out.points) p = (p - shift) * scale;
  return out;
}

Vec3 PointCloud::centroid() const {
  if (empty()) throw std::invalid_argument("PointCloud::centroid: empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

double PointCloud::max_radius(const Vec3& center) const {
  double r = 0.0;
  for (const Vec3& p : points) r = std::max(r, (p - center).norm());
  return r;
}

double PointCloud::diameter() const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      d2 = std::max(d2, (points[i] - points[j]).squaredNorm());
    }
  }
  return std::sqrt(d2);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("chamfer_distance: empty cloud");
  }
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  double sum_ab = 0.0;
  for (const Vec3& p : a.points) sum_ab += tree_b.nearest(p).distance;
  double sum_ba = 0.0;
  for (const Vec3& p : b.points) sum_ba += tree_a.nearest(p).distance;
  return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

}  // namespace poseref
