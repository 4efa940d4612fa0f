#pragma once

#include <vector>

#include "havana/kdtree.hpp"
#include "havana/types.hpp"

namespace havana {

enum class CenterMode {
  kMedoid,  // neighborhood member minimizing total distance to the others
  kMean,
};

struct FeatureConfig {
  int neighbor_count = 20;
  CenterMode center = CenterMode::kMedoid;
};

/// Sorted eigenpairs of a symmetric 3x3 matrix, lambda1 >= lambda2 >= lambda3.
struct EigenResult {
  Vec3 lambdas = Vec3::Zero();
  Mat3 eigvecs = Mat3::Identity();  // columns e1, e2, e3 paired with lambdas

  Vec3 e(int i) const { return eigvecs.col(i); }
};

/// Per-point feature rows [planarity, surface_variation, verticality,
/// normal_z_abs] plus eigen diagnostics.
struct GeometricFeatureSet {
  static constexpr int kDim = 4;
  static constexpr const char* kColumnNames[kDim] = {
      "planarity", "surface_variation", "verticality", "normal_z"};

  MatXR values;                    // n x 4
  std::vector<EigenResult> eigen;  // diagnostics, one per point
  std::vector<int> neighborhood_size;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// Covariance of the listed neighborhood about its medoid (or mean):
/// (1/N) * sum (c_n - c_bar)(c_n - c_bar)^T. Fewer than 3 members is treated
/// as degenerate and yields the zero matrix.
Mat3 covariance_tensor(const std::vector<Vec3>& points,
                       const std::vector<int>& neighborhood,
                       CenterMode center = CenterMode::kMedoid);

/// Eigendecomposition with descending eigenvalues; eigenvalues in
/// [-1e-10, 0) are clamped to zero and each eigenvector is flipped so its
/// largest-magnitude component is positive. Throws std::invalid_argument
/// when the input is asymmetric beyond 1e-10.
EigenResult eigendecompose_sym3(const Mat3& m);

/// Features over the inline point set of `index` using its k nearest
/// neighbors (self included). Degenerate neighborhoods (lambda1 = 0 or
/// trace 0) produce all-zero feature rows.
GeometricFeatureSet compute_features(const KdTree& index,
                                     const FeatureConfig& cfg = {});

}  // namespace havana
