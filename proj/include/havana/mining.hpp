#pragma once

#include <utility>
#include <vector>

#include "havana/block.hpp"
#include "havana/types.hpp"

namespace havana {

/// Per-point embeddings for one block, one n x 64 row per point.
using EmbeddingBatch = MatXR;

enum class MiningStrategy {
  kAbspan,   // hardest candidate whose pseudo label differs from the match's
  kHardest,  // unconstrained hardest candidate (baseline)
};

struct MiningConfig {
  int n_positive = 4096;
  int n_negative_anchors = 2048;
  Scalar t_p = 0.2;
  Scalar t_n = 2.0;
  MiningStrategy strategy = MiningStrategy::kAbspan;
  bool normalize_embeddings = false;  // rank candidates on unit-norm rows

  void validate() const;
};

struct NegativePair {
  int anchor = -1;    // point index in the anchor's block
  int match = -1;     // anchor's positive counterpart, same block as negative
  int negative = -1;  // point index in the opposite block, -1 when invalid
  bool valid = false;
};

/// Mined positives (theta) plus one hardest valid negative per anchor and
/// direction. valid_count_1 / valid_count_2 are |theta_i| and |theta_j|.
struct PairSet {
  std::vector<std::pair<int, int>> positives;  // (i in block 1, j in block 2)
  std::vector<NegativePair> negatives_1;       // anchors in block 1
  std::vector<NegativePair> negatives_2;       // anchors in block 2
  int valid_count_1 = 0;
  int valid_count_2 = 0;
};

struct BlockPair {
  Block x1;
  Block x2;
  std::vector<std::pair<int, int>> correspondences;  // identity over indices
};

/// Draws a sphere centered on a random existing point (retrying up to 32
/// centers until it holds >= min_points) and applies two independent random
/// transforms. Throws DataError when no populated sphere is found.
BlockPair generate_block_pair(const PointCloud& cloud, const KdTree& index,
                              Scalar radius, Rng& rng, Scalar scale_lo = 0.8,
                              Scalar scale_hi = 1.2, int min_points = 2);

/// min(n_positive, available) correspondences sampled uniformly without
/// replacement.
std::vector<std::pair<int, int>> mine_positives(
    const std::vector<std::pair<int, int>>& correspondences, int n_positive,
    Rng& rng);

/// Samples n_negative_anchors anchor pairs from theta and mines, per anchor
/// and direction, the nearest opposite-block candidate (anchor's own match
/// excluded; ties by smaller index). Strategy abspan additionally requires
/// the candidate's pseudo label to differ from the match's label and marks
/// the anchor invalid when no such candidate exists. labels1/labels2 may be
/// empty for the hardest strategy.
PairSet mine_negatives(const EmbeddingBatch& v1, const EmbeddingBatch& v2,
                       const std::vector<std::pair<int, int>>& theta,
                       const std::vector<int>& labels1,
                       const std::vector<int>& labels2,
                       const MiningConfig& cfg, Rng& rng);

}  // namespace havana
