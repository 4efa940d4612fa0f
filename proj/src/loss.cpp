#include "havana/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace havana {

LossResult contrastive_loss(const EmbeddingBatch& v1, const EmbeddingBatch& v2,
                            const PairSet& pairs, const MiningConfig& cfg) {
  if (!v1.allFinite() || !v2.allFinite()) {
    throw NumericError("contrastive_loss: non-finite embedding");
  }
  if (pairs.positives.empty()) {
    throw std::invalid_argument("contrastive_loss: no positive pairs");
  }

  LossResult out;
  out.grad_v1 = MatXR::Zero(v1.rows(), v1.cols());
  out.grad_v2 = MatXR::Zero(v2.rows(), v2.cols());

  const Scalar inv_theta = 1.0 / static_cast<Scalar>(pairs.positives.size());
  for (const auto& [i, j] : pairs.positives) {
    const VecX diff = (v1.row(i) - v2.row(j)).transpose();
    const Scalar d = diff.norm();
    const Scalar hinge = d - cfg.t_p;
    if (hinge <= 0.0) continue;
    out.value += hinge * hinge * inv_theta;
    if (d > 0.0) {
      const VecX g = (2.0 * hinge * inv_theta / d) * diff;
      out.grad_v1.row(i) += g.transpose();
      out.grad_v2.row(j) -= g.transpose();
    }
  }

  // Negative hinges push anchor and mined candidate apart; each direction is
  // normalized by its own valid-anchor count.
  auto add_negative = [&](const NegativePair& np, const EmbeddingBatch& va,
                          const EmbeddingBatch& vn, MatXR& grad_a,
                          MatXR& grad_n, int count) {
    if (!np.valid) return;
    const VecX diff = (va.row(np.anchor) - vn.row(np.negative)).transpose();
    const Scalar d = diff.norm();
    const Scalar hinge = cfg.t_n - d;
    if (hinge <= 0.0) return;
    const Scalar inv = 1.0 / static_cast<Scalar>(count);
    out.value += 0.5 * hinge * hinge * inv;
    if (d > 0.0) {
      const VecX g = (-hinge * inv / d) * diff;
      grad_a.row(np.anchor) += g.transpose();
      grad_n.row(np.negative) -= g.transpose();
    }
  };

  if (pairs.valid_count_1 > 0) {
    for (const NegativePair& np : pairs.negatives_1) {
      add_negative(np, v1, v2, out.grad_v1, out.grad_v2, pairs.valid_count_1);
    }
  }
  if (pairs.valid_count_2 > 0) {
    for (const NegativePair& np : pairs.negatives_2) {
      add_negative(np, v2, v1, out.grad_v2, out.grad_v1, pairs.valid_count_2);
    }
  }
  return out;
}

}  // namespace havana
