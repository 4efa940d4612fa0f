#pragma once

#include <optional>
#include <vector>

#include "havana/kdtree.hpp"
#include "havana/point_cloud.hpp"
#include "havana/rng.hpp"
#include "havana/types.hpp"

namespace havana {

/// Rotation about the vertical axis followed by uniform scaling, both about
/// the local origin (blocks store centroid-relative coordinates).
struct SimilarityTransform {
  Scalar rotation_deg = 0.0;  // in [0, 360)
  Scalar scale = 1.0;

  Vec3 apply(const Vec3& p) const {
    const Scalar a = deg_to_rad(rotation_deg);
    const Scalar c = std::cos(a);
    const Scalar s = std::sin(a);
    return Vec3(scale * (c * p.x() - s * p.y()),
                scale * (s * p.x() + c * p.y()), scale * p.z());
  }

  SimilarityTransform inverse() const {
    SimilarityTransform t;
    t.rotation_deg = rotation_deg == 0.0 ? 0.0 : 360.0 - rotation_deg;
    t.scale = 1.0 / scale;
    return t;
  }
};

/// Spherical subset of a cloud with centroid-relative local coordinates.
struct Block {
  const PointCloud* parent = nullptr;
  std::vector<int> indices;
  Vec3 center = Vec3::Zero();    // sphere center used for extraction
  Scalar radius = 0.0;
  Vec3 centroid = Vec3::Zero();  // origin of the local frame
  std::vector<Vec3> local_positions;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// All points within `radius` of `center`, re-centered at their centroid.
/// Empty spheres are signalled by nullopt so callers can resample.
std::optional<Block> extract_sphere(const PointCloud& cloud,
                                    const KdTree& index, const Vec3& center,
                                    Scalar radius);

/// Rotates then scales the local positions; indices and frame unchanged.
Block apply_transform(const Block& block, const SimilarityTransform& t);

/// Uniform draw from [rot_lo, rot_hi) degrees and [scale_lo, scale_hi).
SimilarityTransform sample_transform(Rng& rng, Scalar rot_lo, Scalar rot_hi,
                                     Scalar scale_lo, Scalar scale_hi);

}  // namespace havana
