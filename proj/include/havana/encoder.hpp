#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "havana/block.hpp"
#include "havana/mining.hpp"
#include "havana/rng.hpp"
#include "havana/types.hpp"

namespace havana {

struct EncoderConfig {
  bool use_intensity = false;
  bool use_return_count = false;
  bool use_height = true;
  std::array<int, 3> block_widths{32, 64, 64};
  int aggregation_k = 16;
  Scalar leaky_slope = 0.1;

  static constexpr int kOutputDim = 64;

  int input_channels() const {
    return 1 + (use_intensity ? 1 : 0) + (use_return_count ? 1 : 0) +
           (use_height ? 1 : 0);
  }
  void validate() const;
};

struct StageParams {
  MatX w1;  // in x width
  VecX b1;
  MatX w2;  // 2*width x width (own features concatenated with pooled)
  VecX b2;
};

struct HeadParams {
  MatX w;  // 64 x classes
  VecX b;
};

struct Parameters {
  std::array<StageParams, 3> stages;
  MatX out_w;  // last width x 64
  VecX out_b;
  std::optional<HeadParams> head;
};

/// Named view over every tensor of a Parameters in a fixed order (the
/// checkpoint/update order). Exactly one of mat/vec is set.
struct TensorRef {
  std::string name;
  MatX* mat = nullptr;
  VecX* vec = nullptr;
};
std::vector<TensorRef> tensor_refs(Parameters& params);

Parameters zeros_like(const Parameters& params);

/// Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
Parameters init_params(const EncoderConfig& cfg, Rng& rng);
HeadParams init_head(int n_classes, Rng& rng);

/// k nearest in-block neighbors per point, self included.
std::vector<std::vector<int>> build_neighbor_lists(
    const std::vector<Vec3>& points, int k);

/// Input columns: constant 1, then optional intensity, return count, and
/// normalized height (z - z_min) / (2 * radius), per config. Enabled
/// attributes missing from the parent cloud raise DataError.
MatXR build_input_features(const Block& block, const EncoderConfig& cfg);

struct StageCache {
  MatXR input;
  MatXR pre_act;  // before the leaky nonlinearity
  MatXR concat;   // [activated | pooled]
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax;
};

struct ForwardCache {
  std::array<StageCache, 3> stages;
  MatXR out_input;
  std::vector<std::vector<int>> neighbors;
};

/// Three stages of (affine -> leaky -> neighborhood max-pool concatenated
/// with own features -> affine), then a final affine to 64 channels. Pass a
/// cache to retain what backward() needs.
EmbeddingBatch forward(const MatXR& input,
                       const std::vector<std::vector<int>>& neighbors,
                       const Parameters& params, const EncoderConfig& cfg,
                       ForwardCache* cache = nullptr);

/// Exact reverse-mode gradients for the matching forward(); max-pool routes
/// to the argmax neighbor recorded in the cache. Head gradients (if any)
/// stay zero.
Parameters backward(const ForwardCache& cache, const Parameters& params,
                    const EncoderConfig& cfg, const MatXR& d_embeddings);

struct HeadResult {
  Scalar loss = 0.0;
  MatXR probabilities;    // n x classes, rows sum to 1
  MatXR grad_embeddings;  // n x 64
  HeadParams grad;
};

/// Affine 64 -> C, softmax, mean cross-entropy over points where mask is
/// set. Throws std::invalid_argument on an empty mask.
HeadResult segmentation_head(const EmbeddingBatch& embeddings,
                             const HeadParams& head,
                             const std::vector<int>& labels,
                             const std::vector<bool>& mask);

}  // namespace havana
