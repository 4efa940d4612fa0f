#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "havana/checkpoint.hpp"
#include "havana/encoder.hpp"
#include "havana/features.hpp"
#include "havana/mining.hpp"
#include "havana/point_cloud.hpp"
#include "havana/types.hpp"

namespace havana {

struct TrainConfig {
  Scalar learning_rate = 0.001;
  Scalar decay_factor = 0.98;
  int decay_every = 5;  // epochs between decays (fine-tune schedule)
  int iterations_per_epoch = 100;
  int epochs = 1;
  int batch_blocks = 4;
  std::uint64_t seed = 0;
  MiningConfig mining;
  Scalar label_fraction = 1.0;  // fine-tuning crop, in (0, 1]
  Scalar radius = 10.0;         // block sphere radius, meters
  int kmeans_k = 9;
  int kmeans_max_iter = 100;
  FeatureConfig features;
  EncoderConfig encoder;
  Scalar scale_lo = 0.8;
  Scalar scale_hi = 1.2;
  int min_block_points = 32;  // resample smaller training spheres
  bool freeze_encoder = false;
  int classes = 0;  // fine-tune class count; 0 derives from the labels

  void validate() const;
};

/// base * decay^floor(epoch / decay_every), the power taken by repeated
/// multiplication so every platform produces identical bits.
Scalar finetune_learning_rate(const TrainConfig& cfg, int epoch);

/// p <- p - lr * g over every tensor. Shapes must match.
void sgd_step(Parameters& params, const Parameters& grads,
              Scalar learning_rate);

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<Scalar> loss_trace;  // mean batch loss per iteration
};

/// Self-supervised loop: per iteration draw block pairs, compute geometric
/// features, cluster them into pseudo labels, embed both blocks, mine
/// positives and hardest valid negatives, apply the hinge loss, and take an
/// SGD step at the constant base rate. Deterministic given the seed.
PretrainResult pretrain(const std::vector<PointCloud>& clouds,
                        const TrainConfig& cfg);

/// Supervised training of encoder plus softmax head on labeled clouds.
/// label_fraction < 1 restricts supervision to a spatially contiguous crop
/// (points below the x-coordinate quantile). Starts from `init` when given,
/// otherwise from fresh seeded parameters.
Checkpoint finetune(const std::optional<Checkpoint>& init,
                    const std::vector<PointCloud>& clouds,
                    const TrainConfig& cfg);

struct Prediction {
  MatXR probabilities;      // n x classes, rows sum to 1
  std::vector<int> labels;  // argmax, ties to the lower class id
};

/// Covers the cloud with spheres centered on a radius/2 lattice, sweeping
/// lattice offsets until every point is predicted at least `votes` times,
/// then averages the per-point class probabilities.
Prediction predict_with_voting(const Checkpoint& ckpt, const PointCloud& cloud,
                               int votes, Scalar radius);

/// Config echo helpers for the checkpoint JSON blob.
std::string config_echo_json(const TrainConfig& cfg, std::uint64_t rng_draws);
EncoderConfig encoder_config_from_json(const std::string& config_json);
Scalar radius_from_json(const std::string& config_json, Scalar fallback);

struct MineStatsRow {
  MiningStrategy strategy = MiningStrategy::kAbspan;
  std::uint64_t seed = 0;
  int n_valid = 0;
  int n_same_pseudo = 0;  // valid negatives sharing the match's pseudo label
  std::optional<Scalar> contamination;  // valid negatives sharing true class
  Scalar mean_neg_distance = 0.0;
};

/// Paired mining probe on a labeled cloud: per seed, one block pair is
/// drawn, embedded with fresh seeded parameters, and mined with each
/// requested strategy from identical anchor draws.
std::vector<MineStatsRow> mine_stats(const PointCloud& cloud,
                                     const TrainConfig& cfg, bool run_abspan,
                                     bool run_hardest, int n_seeds);

}  // namespace havana
