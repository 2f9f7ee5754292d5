#include "poseref/metrics.hpp"

#include <stdexcept>

#include "poseref/kdtree.hpp"

namespace poseref {

double add_distance(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est) {
  if (model.empty()) throw std::invalid_argument("add_distance: empty model cloud");
  double sum = 0.0;
  for (const Vec3& m : model.points) {
    sum += (est.apply(m) - gt.apply(m)).norm();
  }
  return sum / static_cast<double>(model.size());
}

double adi_distance(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est) {
  if (model.empty()) throw std::invalid_argument("adi_distance: empty model cloud");
  std::vector<Vec3> under_gt(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) under_gt[i] = gt.apply(model.points[i]);
  const KdTree tree(under_gt);
  double sum = 0.0;
  for (const Vec3& m : model.points) {
    sum += tree.nearest(est.apply(m)).distance;
  }
  return sum / static_cast<double>(model.size());
}

double recall_at(const std::vector<EvalRecord>& records, double threshold_fraction) {
  if (records.empty()) throw std::invalid_argument("recall_at: no records");
  std::size_t hits = 0;
  for (const EvalRecord& r : records) {
    if (r.ad() <= threshold_fraction * r.diameter) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double auc(const std::vector<EvalRecord>& records, double max_threshold, std::size_t bins) {
  if (records.empty()) throw std::invalid_argument("auc: no records");
  if (bins < 1) throw std::invalid_argument("auc: bins must be >= 1");
  double sum = 0.0;
  for (std::size_t b = 1; b <= bins; ++b) {
    const double th = max_threshold * static_cast<double>(b) / static_cast<double>(bins);
    std::size_t hits = 0;
    for (const EvalRecord& r : records) {
      if (r.ad() <= th) ++hits;
    }
    sum += static_cast<double>(hits) / static_cast<double>(records.size());
  }
  return sum / static_cast<double>(bins);
}

}  // namespace poseref
