#include "havana/mining.hpp"

#include <stdexcept>

namespace havana {

void MiningConfig::validate() const {
  if (n_positive < 1) {
    throw std::invalid_argument("mining: n_positive must be >= 1");
  }
  if (n_negative_anchors < 1 || n_negative_anchors > n_positive) {
    throw std::invalid_argument(
        "mining: need 1 <= n_negative_anchors <= n_positive");
  }
  if (!(t_p > 0.0) || !(t_n > t_p)) {
    throw std::invalid_argument("mining: margins must satisfy t_n > t_p > 0");
  }
}

BlockPair generate_block_pair(const PointCloud& cloud, const KdTree& index,
                              Scalar radius, Rng& rng, Scalar scale_lo,
                              Scalar scale_hi, int min_points) {
  if (cloud.empty()) throw DataError("generate_block_pair: empty cloud");
  constexpr int kMaxAttempts = 32;
  std::optional<Block> sphere;
  for (int attempt = 0; attempt < kMaxAttempts && !sphere; ++attempt) {
    const std::size_t center = rng.uniform_index(cloud.size());
    std::optional<Block> candidate =
        extract_sphere(cloud, index, cloud.positions[center], radius);
    if (candidate && static_cast<int>(candidate->size()) >= min_points) {
      sphere = std::move(candidate);
    }
  }
  if (!sphere) {
    throw DataError(
        "generate_block_pair: no sphere with enough points after 32 tries");
  }

  const SimilarityTransform t1 =
      sample_transform(rng, 0.0, 360.0, scale_lo, scale_hi);
  const SimilarityTransform t2 =
      sample_transform(rng, 0.0, 360.0, scale_lo, scale_hi);

  BlockPair pair;
  pair.x1 = apply_transform(*sphere, t1);
  pair.x2 = apply_transform(*sphere, t2);
  pair.correspondences.reserve(sphere->size());
  for (int m = 0; m < static_cast<int>(sphere->size()); ++m) {
    pair.correspondences.emplace_back(m, m);
  }
  return pair;
}

std::vector<std::pair<int, int>> mine_positives(
    const std::vector<std::pair<int, int>>& correspondences, int n_positive,
    Rng& rng) {
  if (correspondences.empty()) {
    throw std::invalid_argument("mine_positives: no correspondences");
  }
  const int want = std::min(n_positive, static_cast<int>(correspondences.size()));
  const std::vector<int> picks = rng.sample_without_replacement(
      static_cast<int>(correspondences.size()), want);
  std::vector<std::pair<int, int>> theta;
  theta.reserve(static_cast<std::size_t>(want));
  for (int p : picks) theta.push_back(correspondences[static_cast<std::size_t>(p)]);
  return theta;
}

namespace {

// Nearest row of `pool` to `anchors.row(anchor)`, skipping `exclude` and,
// when `match_label` >= 0, any row whose label equals it. Ties by smaller
// row index. Returns -1 when every candidate is filtered out.
int hardest_candidate(const EmbeddingBatch& anchors, int anchor,
                      const EmbeddingBatch& pool,
                      const std::vector<int>& pool_labels, int exclude,
                      int match_label) {
  int best = -1;
  Scalar best_d2 = 0.0;
  for (Eigen::Index k = 0; k < pool.rows(); ++k) {
    if (static_cast<int>(k) == exclude) continue;
    if (match_label >= 0 &&
        pool_labels[static_cast<std::size_t>(k)] == match_label) {
      continue;
    }
    const Scalar d2 = (pool.row(k) - anchors.row(anchor)).squaredNorm();
    if (best < 0 || d2 < best_d2) {
      best = static_cast<int>(k);
      best_d2 = d2;
    }
  }
  return best;
}

EmbeddingBatch normalize_rows(const EmbeddingBatch& v) {
  EmbeddingBatch out = v;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Scalar n = out.row(r).norm();
    if (n > 0.0) out.row(r) /= n;
  }
  return out;
}

}  // namespace

PairSet mine_negatives(const EmbeddingBatch& v1, const EmbeddingBatch& v2,
                       const std::vector<std::pair<int, int>>& theta,
                       const std::vector<int>& labels1,
                       const std::vector<int>& labels2,
                       const MiningConfig& cfg, Rng& rng) {
  cfg.validate();
  if (theta.empty()) throw std::invalid_argument("mine_negatives: empty theta");
  const bool abspan = cfg.strategy == MiningStrategy::kAbspan;
  if (abspan && (labels1.size() != static_cast<std::size_t>(v1.rows()) ||
                 labels2.size() != static_cast<std::size_t>(v2.rows()))) {
    throw std::invalid_argument(
        "mine_negatives: abspan needs pseudo labels for every point");
  }

  PairSet pairs;
  pairs.positives = theta;

  const int n_anchors =
      std::min(cfg.n_negative_anchors, static_cast<int>(theta.size()));
  const std::vector<int> picks = rng.sample_without_replacement(
      static_cast<int>(theta.size()), n_anchors);

  const EmbeddingBatch* m1 = &v1;
  const EmbeddingBatch* m2 = &v2;
  EmbeddingBatch n1, n2;
  if (cfg.normalize_embeddings) {
    n1 = normalize_rows(v1);
    n2 = normalize_rows(v2);
    m1 = &n1;
    m2 = &n2;
  }

  pairs.negatives_1.reserve(static_cast<std::size_t>(n_anchors));
  pairs.negatives_2.reserve(static_cast<std::size_t>(n_anchors));
  for (int p : picks) {
    const auto [i, j] = theta[static_cast<std::size_t>(p)];
    const int match_label_2 =
        abspan ? labels2[static_cast<std::size_t>(j)] : -1;
    const int k2 = hardest_candidate(*m1, i, *m2, labels2, j, match_label_2);
    pairs.negatives_1.push_back({i, j, k2, k2 >= 0});
    if (k2 >= 0) ++pairs.valid_count_1;

    const int match_label_1 =
        abspan ? labels1[static_cast<std::size_t>(i)] : -1;
    const int k1 = hardest_candidate(*m2, j, *m1, labels1, i, match_label_1);
    pairs.negatives_2.push_back({j, i, k1, k1 >= 0});
    if (k1 >= 0) ++pairs.valid_count_2;
  }
  return pairs;
}

}  // namespace havana
