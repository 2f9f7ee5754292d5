#include "poseref/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poseref {

namespace {

struct Candidate {
  double dist2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
  }
};

}  // namespace

void KdTree::build(const std::vector<Vec3>& points) {
  pts_ = points;
  order_.resize(pts_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.clear();
  root_ = pts_.empty() ? -1 : build_recursive(0, static_cast<std::uint32_t>(pts_.size()));
}

int KdTree::build_recursive(std::uint32_t begin, std::uint32_t end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }

  // Split along the widest extent axis.
  Vec3 lo = pts_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return pts_[a][axis] < pts_[b][axis];
                   });

  node.axis = static_cast<std::int8_t>(axis);
  node.split = pts_[order_[mid]][axis];

  // Degenerate spread: all coordinates equal along every axis; keep as leaf.
  if (!((hi - lo).maxCoeff() > 0.0)) {
    node.axis = -1;
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }

  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build_recursive(begin, mid);
  const int right = build_recursive(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::vector<KnnResult> KdTree::knn(const Vec3& query, std::size_t k) const {
  if (empty()) throw std::invalid_argument("KdTree::knn: empty cloud");
  if (k < 1 || k > size()) throw std::invalid_argument("KdTree::knn: k out of range");

  std::vector<Candidate> heap;  // max-heap on (dist2, index)
  heap.reserve(k);
  const auto worse = [](const Candidate& a, const Candidate& b) { return a < b; };

  const auto consider = [&](std::size_t idx) {
    const Candidate c{(pts_[idx] - query).squaredNorm(), idx};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end(), worse);
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  };

  // Iterative traversal, near side first.
  std::vector<int> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    if (ni < 0) continue;
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) consider(order_[i]);
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    if (heap.size() < k || diff * diff <= heap.front().dist2) {
      stack.push_back(far);
    }
    stack.push_back(near);  // processed first (LIFO)
  }

  std::sort(heap.begin(), heap.end());
  std::vector<KnnResult> out;
  out.reserve(heap.size());
  for (const Candidate& c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
  return out;
}

}  // namespace poseref
