#include "havana/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace havana {

MatXR standardize_features(const MatXR& features) {
  const Eigen::Index n = features.rows();
  if (n < 1) {
    throw std::invalid_argument("standardize_features: empty matrix");
  }
  MatXR out(n, features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const Scalar mean = features.col(c).mean();
    const Scalar var =
        (features.col(c).array() - mean).square().sum() / static_cast<Scalar>(n);
    // Constant columns accumulate rounding noise of order eps^2 in `var`;
    // treat anything at that level as zero variance.
    if (var <= 1e-24 * std::max(Scalar(1), mean * mean)) {
      out.col(c).setZero();
    } else {
      out.col(c) = (features.col(c).array() - mean) / std::sqrt(var);
    }
  }
  return out;
}

namespace {

Scalar sq_dist(const MatXR& data, Eigen::Index row, const MatXR& centroids,
               Eigen::Index c) {
  return (data.row(row) - centroids.row(c)).squaredNorm();
}

// Nearest centroid, ties to the lower id.
int nearest_centroid(const MatXR& data, Eigen::Index row,
                     const MatXR& centroids) {
  int best = 0;
  Scalar best_d = sq_dist(data, row, centroids, 0);
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const Scalar d = sq_dist(data, row, centroids, c);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

MatXR kmeanspp_init(const MatXR& data, int k, Rng& rng) {
  const Eigen::Index n = data.rows();
  MatXR centroids(k, data.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  const std::size_t first = rng.uniform_index(static_cast<std::size_t>(n));
  centroids.row(0) = data.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;

  std::vector<Scalar> d2(static_cast<std::size_t>(n),
                         std::numeric_limits<Scalar>::infinity());
  for (int c = 1; c < k; ++c) {
    Scalar total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = sq_dist(data, i, centroids, c - 1);
      if (d < d2[static_cast<std::size_t>(i)]) {
        d2[static_cast<std::size_t>(i)] = d;
      }
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const Scalar u = rng.uniform() * total;
      Scalar cumulative = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cumulative += d2[static_cast<std::size_t>(i)];
        if (u < cumulative) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;  // u landed on the rounding tail
    }
    if (pick < 0 || chosen[static_cast<std::size_t>(pick)]) {
      // Degenerate mass (duplicate points): first index not yet used.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centroids.row(c) = data.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
  }
  return centroids;
}

}  // namespace

PseudoLabels kmeans(const MatXR& data, int k, int max_iter, Rng& rng) {
  const Eigen::Index n = data.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");

  PseudoLabels result;
  result.centroids = kmeanspp_init(data, k, rng);
  result.assignment.resize(static_cast<std::size_t>(n));

  auto assign_all = [&](std::vector<int>& assignment) {
    Scalar inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest_centroid(data, i, result.centroids);
      assignment[static_cast<std::size_t>(i)] = c;
      inertia += sq_dist(data, i, result.centroids, c);
    }
    return inertia;
  };

  result.inertia = assign_all(result.assignment);
  result.inertia_trace.push_back(result.inertia);

  std::vector<int> next(result.assignment.size());
  for (int it = 0; it < max_iter; ++it) {
    // Means of the current assignment.
    MatXR sums = MatXR::Zero(k, data.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = result.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += data.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.centroids.row(c) =
            sums.row(c) / static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Re-seed at the point currently farthest from its own centroid.
        Eigen::Index far = 0;
        Scalar far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Scalar d = sq_dist(
              data, i, result.centroids,
              result.assignment[static_cast<std::size_t>(i)]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        result.centroids.row(c) = data.row(far);
      }
    }

    const Scalar inertia = assign_all(next);
    result.inertia = inertia;
    result.inertia_trace.push_back(inertia);
    result.iterations = it + 1;
    const bool fixed_point = next == result.assignment;
    result.assignment.swap(next);
    if (fixed_point) break;
  }
  return result;
}

PseudoLabels kmeans(const MatXR& data, int k, int max_iter,
                    std::uint64_t seed) {
  Rng rng(seed);
  return kmeans(data, k, max_iter, rng);
}

}  // namespace havana
