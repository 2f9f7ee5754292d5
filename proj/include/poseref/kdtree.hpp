#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "poseref/geometry.hpp"

namespace poseref {

struct KnnResult {
  std::size_t index;
  double distance;
};

// Exact nearest-neighbor search over a fixed set of 3D points.
// Median-split kd-tree; queries return exact results (no approximation).
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const std::vector<Vec3>& points) { build(points); }

  void build(const std::vector<Vec3>& points);

  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }

  // k nearest neighbors sorted by ascending distance; ties broken by index.
  // Requires 1 <= k <= size(). Throws std::invalid_argument otherwise.
  std::vector<KnnResult> knn(const Vec3& query, std::size_t k) const;

  KnnResult nearest(const Vec3& query) const { return knn(query, 1)[0]; }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    std::uint32_t begin = 0;  // leaf range into order_
    std::uint32_t end = 0;
    double split = 0.0;
    std::int8_t axis = -1;  // -1 marks a leaf
  };

  int build_recursive(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> pts_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr std::uint32_t kLeafSize = 16;
};

}  // namespace poseref
