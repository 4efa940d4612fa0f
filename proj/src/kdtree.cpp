#include "havana/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace havana {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!order_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(order_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     const Scalar ca = points_[a][axis];
                     const Scalar cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<int> KdTree::knn(const Vec3& query, int k) const {
  if (k <= 0) throw std::invalid_argument("KdTree::knn: k must be positive");
  std::vector<KnnEntry> heap;
  heap.reserve(static_cast<std::size_t>(k));
  if (root_ >= 0) search_knn(root_, query, static_cast<std::size_t>(k), heap);
  std::sort(heap.begin(), heap.end());
  std::vector<int> result(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i) result[i] = heap[i].index;
  return result;
}

void KdTree::search_knn(int node, const Vec3& query, std::size_t k,
                        std::vector<KnnEntry>& heap) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      const KnnEntry entry{(points_[idx] - query).squaredNorm(), idx};
      if (heap.size() < k) {
        heap.push_back(entry);
        std::push_heap(heap.begin(), heap.end());
      } else if (entry < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = entry;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const Scalar diff = query[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search_knn(near, query, k, heap);
  // Descend the far side unless every point there is strictly worse than the
  // current worst candidate; on equality a smaller index could still win.
  if (heap.size() < k || diff * diff <= heap.front().d2) {
    search_knn(far, query, k, heap);
  }
}

std::vector<int> KdTree::radius(const Vec3& query, Scalar r) const {
  if (!(r >= 0.0)) {
    throw std::invalid_argument("KdTree::radius: radius must be non-negative");
  }
  std::vector<int> out;
  if (root_ >= 0) search_radius(root_, query, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::search_radius(int node, const Vec3& query, Scalar r2,
                           std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
    }
    return;
  }
  const Scalar diff = query[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search_radius(near, query, r2, out);
  if (diff * diff <= r2) search_radius(far, query, r2, out);
}

}  // namespace havana
