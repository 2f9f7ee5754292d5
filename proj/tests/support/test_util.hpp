#pragma once

#include <vector>

#include "poseref/geometry.hpp"
#include "poseref/point_cloud.hpp"
#include "poseref/rng.hpp"

namespace poseref::testutil {

inline Vec3 random_unit(Rng& rng) {
  const auto v = rng.unit_vector();
  return Vec3(v[0], v[1], v[2]);
}

inline Rotation random_rotation(Rng& rng) {
  return Rotation::axis_angle(random_unit(rng), rng.uniform(0.0, M_PI));
}

inline RigidTransform random_transform(Rng& rng, double trans_range = 1.0) {
  return RigidTransform(random_rotation(rng),
                        Vec3(rng.uniform(-trans_range, trans_range),
                             rng.uniform(-trans_range, trans_range),
                             rng.uniform(-trans_range, trans_range)));
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double extent = 1.0) {
  PointCloud c;
  c.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                          rng.uniform(-extent, extent));
  }
  return c;
}

// O(n) exact nearest neighbors, ties broken by index; the oracle for KdTree.
inline std::vector<std::pair<std::size_t, double>> linear_knn(const std::vector<Vec3>& pts,
                                                              const Vec3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  all.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - q).norm(), i);
  std::sort(all.begin(), all.end());
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(all[i].second, all[i].first);
  return out;
}

// O(n^2) Chamfer oracle (symmetric sum of mean nearest distances).
inline double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  auto one_way = [](const PointCloud& from, const PointCloud& to) {
    double sum = 0.0;
    for (const Vec3& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to.points) best = std::min(best, (p - q).norm());
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return one_way(a, b) + one_way(b, a);
}

}  // namespace poseref::testutil
