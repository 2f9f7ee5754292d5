#include "poseref/plausibility.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poseref/rng.hpp"

namespace poseref {

namespace {

struct PlaneParams {
  Vec3 normal;
  Vec3 point;
};

std::size_t count_inliers(const std::vector<Vec3>& pts, const PlaneParams& plane, double thr) {
  std::size_t n = 0;
  for (const Vec3& p : pts) {
    if (std::abs(plane.normal.dot(p - plane.point)) <= thr) ++n;
  }
  return n;
}

}  // namespace

PlaneModel fit_plane_ransac(const PointCloud& background, std::size_t iterations,
                            double inlier_threshold, std::uint64_t seed) {
  const auto& pts = background.points;
  if (pts.size() < 3) throw std::invalid_argument("fit_plane_ransac: fewer than 3 points");

  Rng rng(seed);
  bool found = false;
  PlaneParams best{};
  std::size_t best_count = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const std::size_t i = rng.uniform_index(pts.size());
    const std::size_t j = rng.uniform_index(pts.size());
    const std::size_t k = rng.uniform_index(pts.size());
    if (i == j || j == k || i == k) continue;
    const Vec3 n = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
    const double len = n.norm();
    if (len < 1e-12) continue;  // collinear sample
    const PlaneParams cand{n / len, pts[i]};
    const std::size_t count = count_inliers(pts, cand, inlier_threshold);
    if (count > best_count) {
      best_count = count;
      best = cand;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("fit_plane_ransac: degenerate input (no plane sample)");

  // Least-squares refit on the inliers.
  Vec3 centroid = Vec3::Zero();
  std::vector<Vec3> inliers;
  for (const Vec3& p : pts) {
    if (std::abs(best.normal.dot(p - best.point)) <= inlier_threshold) {
      inliers.push_back(p);
      centroid += p;
    }
  }
  centroid /= static_cast<double>(inliers.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : inliers) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 normal = eig.eigenvectors().col(0).normalized();

  // Outward: toward the camera origin.
  if (normal.dot(-centroid) < 0.0) normal = -normal;

  // Deterministic in-plane basis.
  const Vec3 helper = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (helper - helper.dot(normal) * normal).normalized();
  const Vec3 v = normal.cross(u);
  Mat3 plane_to_cam;
  plane_to_cam.col(0) = u;
  plane_to_cam.col(1) = v;
  plane_to_cam.col(2) = normal;

  PlaneModel model;
  const RigidTransform plane_in_cam(Rotation::from_matrix(plane_to_cam), centroid);
  model.pose = plane_in_cam.inverse();
  const PlaneParams refit{normal, centroid};
  model.inlier_count = count_inliers(pts, refit, inlier_threshold);
  return model;
}

PlaneFrameScene to_plane_frame(const SceneState& scene) {
  PlaneFrameScene out;
  out.sources.reserve(scene.objects.size());
  out.targets.reserve(scene.objects.size());
  for (const SceneObject& obj : scene.objects) {
    out.sources.push_back(obj.source_cam.transformed(scene.plane.pose));
    out.targets.push_back(
        obj.model->target_cloud.transformed(compose(scene.plane.pose, obj.estimate)));
  }
  return out;
}

SceneDistanceIndex::SceneDistanceIndex(const PlaneFrameScene& scene, Vec3 gravity,
                                       PlausibilityConfig cfg)
    : gravity_(std::move(gravity)), cfg_(cfg) {
  owned_targets_ = scene.targets;
  trees_.reserve(owned_targets_.size());
  targets_.reserve(owned_targets_.size());
  for (const PointCloud& t : owned_targets_) {
    trees_.emplace_back(t.points);
    targets_.push_back(&t);
  }
}

SurfaceDistanceField SceneDistanceIndex::query(const PointCloud& query_points,
                                               std::size_t exclude) const {
  if (query_points.empty()) {
    throw std::invalid_argument("SceneDistanceIndex::query: empty query cloud");
  }
  SurfaceDistanceField field;
  field.quorum = cfg_.quorum;
  field.entries.resize(query_points.size());

  for (std::size_t qi = 0; qi < query_points.size(); ++qi) {
    const Vec3& x = query_points.points[qi];

    // Plane candidate: distance is the plane-frame z.
    SurfaceDistanceEntry best;
    best.distance = x.z();
    best.nearest_normal = Vec3(0, 0, 1);
    best.nearest_point = Vec3(x.x(), x.y(), 0.0);
    best.support_fraction = support_vote(Vec3(0, 0, 1), gravity_) ? 1.0 : 0.0;

    for (std::size_t oi = 0; oi < targets_.size(); ++oi) {
      if (oi == exclude || targets_[oi]->empty()) continue;
      const PointCloud& target = *targets_[oi];
      const std::size_t k = std::min(cfg_.k, target.size());
      const auto nbrs = trees_[oi].knn(x, k);

      std::size_t inside_votes = 0;
      std::size_t support_votes = 0;
      for (const auto& nb : nbrs) {
        const Vec3& ny = target.normals[nb.index];
        const Vec3& y = target.points[nb.index];
        if (inside_vote(ny, y, x)) ++inside_votes;
        if (support_vote(ny, gravity_)) ++support_votes;
      }
      const bool inside =
          static_cast<double>(inside_votes) >= cfg_.quorum * static_cast<double>(k);
      double d = nbrs[0].distance;
      if (inside) d = -d;
      if (d < best.distance) {
        best.distance = d;
        best.nearest_normal = target.normals[nbrs[0].index];
        best.nearest_point = target.points[nbrs[0].index];
        best.support_fraction =
            static_cast<double>(support_votes) / static_cast<double>(k);
      }
    }
    field.entries[qi] = best;
  }
  return field;
}

SurfaceDistanceField surface_distance(const PointCloud& query_points, const SceneState& scene,
                                      std::size_t exclude, std::size_t k, double quorum) {
  PlausibilityConfig cfg;
  cfg.k = k;
  cfg.quorum = quorum;
  const PlaneFrameScene frame = to_plane_frame(scene);
  const SceneDistanceIndex index(frame, scene.gravity, cfg);
  return index.query(query_points.transformed(scene.plane.pose), exclude);
}

CriticalPoints critical_points(const SurfaceDistanceField& field, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("critical_points: epsilon must be positive");
  CriticalPoints cp;
  for (std::size_t i = 0; i < field.entries.size(); ++i) {
    const SurfaceDistanceEntry& e = field.entries[i];
    if (e.distance < -epsilon) cp.intersecting.push_back(i);
    if (std::abs(e.distance) < epsilon) {
      cp.contact.push_back(i);
      if (e.support_fraction >= field.quorum) cp.supported.push_back(i);
    }
  }
  return cp;
}

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points) {
  // Andrew's monotone chain; strictly convex turns, collinear points dropped.
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const auto& a, const auto& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;

  std::vector<Eigen::Vector2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_convex_hull(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& hull,
                          double tol) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross < -tol) return false;  // CCW hull: inside means left of every edge
  }
  return true;
}

bool stability_check(const Vec3& com_plane, const std::vector<Vec3>& supported_points,
                     const Vec3& gravity) {
  if (supported_points.size() < 3) return false;
  if (std::abs(gravity.z()) < 1e-9) return false;  // gravity parallel to the plane

  auto project = [&](const Vec3& p) {
    const double t = p.z() / gravity.z();
    const Vec3 q = p - t * gravity;
    return Eigen::Vector2d(q.x(), q.y());
  };

  std::vector<Eigen::Vector2d> flat;
  flat.reserve(supported_points.size());
  for (const Vec3& p : supported_points) flat.push_back(project(p));
  const auto hull = convex_hull_2d(std::move(flat));
  if (hull.size() < 3) return false;  // collinear supports
  return point_in_convex_hull(project(com_plane), hull);
}

PlausibilityVerdict plausibility_verdict(const CriticalPoints& cp, bool stability) {
  PlausibilityVerdict v;
  v.intersecting = !cp.intersecting.empty();
  v.floating = cp.contact.empty();
  v.feasible = !v.intersecting && !v.floating;
  v.stable = v.feasible && stability;
  return v;
}

std::vector<PlausibilityVerdict> scene_verdicts(const SceneState& scene,
                                                const PlausibilityConfig& cfg) {
  const PlaneFrameScene frame = to_plane_frame(scene);
  const SceneDistanceIndex index(frame, scene.gravity, cfg);
  std::vector<PlausibilityVerdict> verdicts(scene.objects.size());
  for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
    const SurfaceDistanceField field = index.query(frame.targets[oi], oi);
    const CriticalPoints cp = critical_points(field, cfg.epsilon);
    std::vector<Vec3> supports;
    supports.reserve(cp.supported.size());
    for (std::size_t idx : cp.supported) supports.push_back(frame.targets[oi].points[idx]);
    const Vec3 com_plane =
        compose(scene.plane.pose, scene.objects[oi].estimate).apply(scene.objects[oi].model->com);
    const bool stable = stability_check(com_plane, supports, scene.gravity);
    verdicts[oi] = plausibility_verdict(cp, stable);
  }
  return verdicts;
}

}  // namespace poseref
