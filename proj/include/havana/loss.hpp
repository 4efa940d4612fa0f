#pragma once

#include "havana/mining.hpp"
#include "havana/types.hpp"

namespace havana {

struct LossResult {
  Scalar value = 0.0;
  MatXR grad_v1;  // d loss / d v1, same shape as v1
  MatXR grad_v2;
};

/// Hinge contrastive loss over mined pairs:
///   sum over theta      [d(v1_i, v2_j) - t_p]+^2        / |theta|
/// + sum over negatives_1 0.5 * [t_n - d(v1_i, v2_k)]+^2 / |theta_i|
/// + sum over negatives_2 0.5 * [t_n - d(v1_k, v2_j)]+^2 / |theta_j|
/// with d = Euclidean distance. Directions with zero valid negatives
/// contribute nothing. Gradients are analytic with the mined selection held
/// fixed. Throws NumericError on non-finite embeddings.
LossResult contrastive_loss(const EmbeddingBatch& v1, const EmbeddingBatch& v2,
                            const PairSet& pairs, const MiningConfig& cfg);

}  // namespace havana
