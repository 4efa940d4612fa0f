#include "havana/block.hpp"

#include <stdexcept>

namespace havana {

std::optional<Block> extract_sphere(const PointCloud& cloud,
                                    const KdTree& index, const Vec3& center,
                                    Scalar radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("extract_sphere: radius must be positive");
  }
  std::vector<int> inside = index.radius(center, radius);
  if (inside.empty()) return std::nullopt;

  Block block;
  block.parent = &cloud;
  block.indices = std::move(inside);
  block.center = center;
  block.radius = radius;

  Vec3 sum = Vec3::Zero();
  for (int idx : block.indices) sum += cloud.positions[idx];
  block.centroid = sum / static_cast<Scalar>(block.indices.size());

  block.local_positions.reserve(block.indices.size());
  for (int idx : block.indices) {
    block.local_positions.push_back(cloud.positions[idx] - block.centroid);
  }
  return block;
}

Block apply_transform(const Block& block, const SimilarityTransform& t) {
  if (block.empty()) {
    throw std::invalid_argument("apply_transform: empty block");
  }
  Block out = block;
  for (Vec3& p : out.local_positions) p = t.apply(p);
  return out;
}

SimilarityTransform sample_transform(Rng& rng, Scalar rot_lo, Scalar rot_hi,
                                     Scalar scale_lo, Scalar scale_hi) {
  if (rot_lo > rot_hi || scale_lo > scale_hi || scale_lo <= 0.0) {
    throw std::invalid_argument("sample_transform: invalid range");
  }
  SimilarityTransform t;
  t.rotation_deg = rng.uniform(rot_lo, rot_hi);
  t.scale = rng.uniform(scale_lo, scale_hi);
  return t;
}

}  // namespace havana
