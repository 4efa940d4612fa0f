#pragma once

#include <cstdint>
#include <vector>

#include "havana/features.hpp"
#include "havana/rng.hpp"
#include "havana/types.hpp"

namespace havana {

struct PseudoLabels {
  std::vector<int> assignment;      // cluster id per point, 0..K-1
  MatXR centroids;                  // K x d
  Scalar inertia = 0.0;             // sum of squared distances to assignment
  std::vector<Scalar> inertia_trace;  // after every assignment pass
  int iterations = 0;
};

/// Column-wise zero-mean unit-variance scaling (population variance);
/// zero-variance columns are left at 0.
MatXR standardize_features(const MatXR& features);

/// Lloyd iterations from k-means++ seeding until the assignment reaches a
/// fixed point or max_iter passes. Assignment ties go to the lower centroid
/// id; emptied clusters are re-seeded at the point farthest from its
/// assigned centroid.
PseudoLabels kmeans(const MatXR& data, int k, int max_iter, Rng& rng);
PseudoLabels kmeans(const MatXR& data, int k, int max_iter,
                    std::uint64_t seed);

}  // namespace havana
