#pragma once

#include <vector>

#include "havana/types.hpp"

namespace havana {

/// Balanced kd-tree over a fixed point set. Query results are defined to be
/// identical to a brute-force linear scan: distances compared exactly, ties
/// broken by the smaller point index.
class KdTree {
public:
  explicit KdTree(std::vector<Vec3> points);

  /// The k nearest indices in non-decreasing distance (ties by smaller
  /// index). Returns all points when the set has fewer than k.
  std::vector<int> knn(const Vec3& query, int k) const;

  /// All indices with |p - query| <= radius, in ascending index order.
  std::vector<int> radius(const Vec3& query, Scalar r) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    Scalar split = 0.0;   // splitting coordinate (internal nodes)
    int left = -1;
    int right = -1;
    int begin = 0;        // leaf range into order_
    int end = 0;
  };

  struct KnnEntry {
    Scalar d2;
    int index;
    bool operator<(const KnnEntry& o) const {
      return d2 < o.d2 || (d2 == o.d2 && index < o.index);
    }
  };

  int build(int begin, int end);
  void search_knn(int node, const Vec3& query, std::size_t k,
                  std::vector<KnnEntry>& heap) const;
  void search_radius(int node, const Vec3& query, Scalar r2,
                     std::vector<int>& out) const;

  static constexpr int kLeafSize = 16;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace havana
