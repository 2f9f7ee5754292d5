#pragma once

#include "poseref/point_cloud.hpp"

namespace poseref {

// Per-point normal estimation from the k-nearest-neighbor covariance
// (smallest eigenvector), sign-flipped so each normal faces `viewpoint`.
// Degenerate neighborhoods (covariance rank < 2) fall back to (0,0,1),
// which is likewise flipped toward the viewpoint.
// Requires cloud.size() >= k >= 3.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& viewpoint);

}  // namespace poseref
