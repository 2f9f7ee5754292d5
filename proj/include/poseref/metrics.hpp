#pragma once

#include <vector>

#include "poseref/point_cloud.hpp"

namespace poseref {

// Mean distance between matched model points under the two poses.
double add_distance(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est);

// Mean nearest-neighbor distance between the transformed model point sets.
double adi_distance(const PointCloud& model, const RigidTransform& gt, const RigidTransform& est);

struct EvalRecord {
  int class_id = 0;
  double add = 0.0;       // meters
  double adi = 0.0;       // meters
  double diameter = 0.0;  // meters
  bool symmetric = false;

  // ADI for symmetric objects, ADD otherwise.
  double ad() const { return symmetric ? adi : add; }
};

// Fraction of records with AD <= threshold_fraction * diameter.
double recall_at(const std::vector<EvalRecord>& records, double threshold_fraction);

// Mean recall over `bins` evenly spaced absolute thresholds in
// (0, max_threshold]; a step-rule integral of the recall curve, in [0,1].
double auc(const std::vector<EvalRecord>& records, double max_threshold, std::size_t bins);

}  // namespace poseref
