#include "poseref/normals.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "poseref/kdtree.hpp"

namespace poseref {

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& viewpoint) {
  if (k < 3) throw std::invalid_argument("estimate_normals: k must be >= 3");
  if (cloud.size() < k) throw std::invalid_argument("estimate_normals: fewer than k points");

  const KdTree tree(cloud.points);
  PointCloud out = cloud;
  out.normals.resize(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = tree.knn(cloud.points[i], k);
    Vec3 mean = Vec3::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(k);

    Mat3 cov = Mat3::Zero();
    for (const auto& nb : nbrs) {
      const Vec3 d = cloud.points[nb.index] - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 evals = eig.eigenvalues();  // ascending
    Vec3 n;
    // Rank < 2: the two smallest eigenvalues vanish (collinear neighborhood).
    if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300)) {
      n = Vec3(0.0, 0.0, 1.0);
    } else {
      n = eig.eigenvectors().col(0).normalized();
    }
    if (n.dot(viewpoint - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

}  // namespace poseref
