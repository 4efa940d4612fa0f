#include "havana/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "havana/kdtree.hpp"
#include "havana/kmeans.hpp"
#include "havana/loss.hpp"
#include "havana/metrics.hpp"

namespace havana {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning_rate must be positive");
  }
  if (!(decay_factor > 0.0) || decay_factor > 1.0) {
    throw std::invalid_argument("train: decay_factor must be in (0, 1]");
  }
  if (decay_every < 1) {
    throw std::invalid_argument("train: decay_every must be >= 1");
  }
  if (iterations_per_epoch < 0 || epochs < 0) {
    throw std::invalid_argument("train: counts must be non-negative");
  }
  if (batch_blocks < 1) {
    throw std::invalid_argument("train: batch_blocks must be >= 1");
  }
  if (!(label_fraction > 0.0) || label_fraction > 1.0) {
    throw std::invalid_argument("train: label_fraction must be in (0, 1]");
  }
  if (!(radius > 0.0)) {
    throw std::invalid_argument("train: radius must be positive");
  }
  if (kmeans_k < 1 || kmeans_max_iter < 1) {
    throw std::invalid_argument("train: k-means settings must be positive");
  }
  if (!(scale_lo > 0.0) || scale_lo > scale_hi) {
    throw std::invalid_argument("train: invalid scale range");
  }
  if (min_block_points < 2) {
    throw std::invalid_argument("train: min_block_points must be >= 2");
  }
  mining.validate();
  encoder.validate();
}

Scalar finetune_learning_rate(const TrainConfig& cfg, int epoch) {
  if (epoch < 0) throw std::invalid_argument("learning rate: negative epoch");
  Scalar factor = 1.0;
  for (int i = 0; i < epoch / cfg.decay_every; ++i) factor *= cfg.decay_factor;
  return cfg.learning_rate * factor;
}

namespace {

// Lockstep walk over the tensors of two parameter sets; throws on any
// structural mismatch.
template <typename Fn>
void for_each_tensor_pair(Parameters& a, const Parameters& b, Fn&& fn) {
  std::vector<TensorRef> ra = tensor_refs(a);
  std::vector<TensorRef> rb = tensor_refs(const_cast<Parameters&>(b));
  if (ra.size() != rb.size()) {
    throw std::invalid_argument("parameters: tensor sets do not match");
  }
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i].name != rb[i].name) {
      throw std::invalid_argument("parameters: tensor name mismatch at '" +
                                  ra[i].name + "'");
    }
    const bool mat = ra[i].mat != nullptr;
    if (mat != (rb[i].mat != nullptr)) {
      throw std::invalid_argument("parameters: tensor kind mismatch at '" +
                                  ra[i].name + "'");
    }
    if (mat && (ra[i].mat->rows() != rb[i].mat->rows() ||
                ra[i].mat->cols() != rb[i].mat->cols())) {
      throw std::invalid_argument("parameters: shape mismatch at '" +
                                  ra[i].name + "'");
    }
    if (!mat && ra[i].vec->size() != rb[i].vec->size()) {
      throw std::invalid_argument("parameters: shape mismatch at '" +
                                  ra[i].name + "'");
    }
    fn(ra[i], rb[i]);
  }
}

void accumulate(Parameters& dst, const Parameters& src) {
  for_each_tensor_pair(dst, src, [](TensorRef& d, const TensorRef& s) {
    if (d.mat) {
      *d.mat += *s.mat;
    } else {
      *d.vec += *s.vec;
    }
  });
}

void scale(Parameters& params, Scalar s) {
  for (TensorRef& ref : tensor_refs(params)) {
    if (ref.mat) {
      *ref.mat *= s;
    } else {
      *ref.vec *= s;
    }
  }
}

struct PreparedPair {
  BlockPair pair;
  std::vector<int> pseudo1;
  std::vector<int> pseudo2;
  MatXR input1;
  MatXR input2;
  std::vector<std::vector<int>> nbrs1;
  std::vector<std::vector<int>> nbrs2;
};

std::vector<std::vector<int>> knn_lists(const KdTree& tree, int k) {
  std::vector<std::vector<int>> lists(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    lists[i] = tree.knn(tree.points()[i], k);
  }
  return lists;
}

// Block pair plus everything mining needs: per-block geometric features,
// one shared k-means clustering over both blocks, encoder inputs, and
// aggregation neighborhoods.
PreparedPair prepare_pair(const PointCloud& cloud, const KdTree& tree,
                          const TrainConfig& cfg, Rng& rng) {
  PreparedPair prep;
  prep.pair = generate_block_pair(cloud, tree, cfg.radius, rng, cfg.scale_lo,
                                  cfg.scale_hi, cfg.min_block_points);
  const Eigen::Index n = static_cast<Eigen::Index>(prep.pair.x1.size());

  KdTree t1(prep.pair.x1.local_positions);
  KdTree t2(prep.pair.x2.local_positions);
  const GeometricFeatureSet f1 = compute_features(t1, cfg.features);
  const GeometricFeatureSet f2 = compute_features(t2, cfg.features);

  MatXR stacked(2 * n, GeometricFeatureSet::kDim);
  stacked << f1.values, f2.values;
  const int k = std::min<int>(cfg.kmeans_k, static_cast<int>(2 * n));
  const PseudoLabels pseudo =
      kmeans(standardize_features(stacked), k, cfg.kmeans_max_iter, rng);
  prep.pseudo1.assign(pseudo.assignment.begin(),
                      pseudo.assignment.begin() + n);
  prep.pseudo2.assign(pseudo.assignment.begin() + n, pseudo.assignment.end());

  prep.input1 = build_input_features(prep.pair.x1, cfg.encoder);
  prep.input2 = build_input_features(prep.pair.x2, cfg.encoder);
  prep.nbrs1 = knn_lists(t1, cfg.encoder.aggregation_k);
  prep.nbrs2 = knn_lists(t2, cfg.encoder.aggregation_k);
  return prep;
}

MatXR head_probabilities(const EmbeddingBatch& embeddings,
                         const HeadParams& head) {
  const MatXR logits = (embeddings * head.w).rowwise() + head.b.transpose();
  MatXR probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - peak).exp();
    probs.row(i) = shifted / shifted.sum();
  }
  return probs;
}

}  // namespace

void sgd_step(Parameters& params, const Parameters& grads,
              Scalar learning_rate) {
  for_each_tensor_pair(params, grads, [&](TensorRef& p, const TensorRef& g) {
    if (p.mat) {
      *p.mat -= learning_rate * *g.mat;
    } else {
      *p.vec -= learning_rate * *g.vec;
    }
  });
}

PretrainResult pretrain(const std::vector<PointCloud>& clouds,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (clouds.empty()) throw std::invalid_argument("pretrain: no input clouds");
  for (const PointCloud& cloud : clouds) {
    cloud.validate();
    if (cloud.empty()) throw DataError("pretrain: empty input cloud");
  }

  Rng rng(cfg.seed);
  Parameters params = init_params(cfg.encoder, rng);
  std::vector<KdTree> trees;
  trees.reserve(clouds.size());
  for (const PointCloud& cloud : clouds) trees.emplace_back(cloud.positions);

  PretrainResult out;
  const long total =
      static_cast<long>(cfg.epochs) * static_cast<long>(cfg.iterations_per_epoch);
  out.loss_trace.reserve(static_cast<std::size_t>(total));
  for (long iter = 0; iter < total; ++iter) {
    Parameters batch_grads = zeros_like(params);
    Scalar batch_loss = 0.0;
    for (int b = 0; b < cfg.batch_blocks; ++b) {
      const std::size_t ci = rng.uniform_index(clouds.size());
      const PreparedPair prep = prepare_pair(clouds[ci], trees[ci], cfg, rng);

      ForwardCache c1;
      ForwardCache c2;
      const EmbeddingBatch v1 =
          forward(prep.input1, prep.nbrs1, params, cfg.encoder, &c1);
      const EmbeddingBatch v2 =
          forward(prep.input2, prep.nbrs2, params, cfg.encoder, &c2);

      const std::vector<std::pair<int, int>> theta = mine_positives(
          prep.pair.correspondences, cfg.mining.n_positive, rng);
      const PairSet pairs = mine_negatives(v1, v2, theta, prep.pseudo1,
                                           prep.pseudo2, cfg.mining, rng);
      const LossResult loss = contrastive_loss(v1, v2, pairs, cfg.mining);

      accumulate(batch_grads, backward(c1, params, cfg.encoder, loss.grad_v1));
      accumulate(batch_grads, backward(c2, params, cfg.encoder, loss.grad_v2));
      batch_loss += loss.value;
    }
    scale(batch_grads, 1.0 / static_cast<Scalar>(cfg.batch_blocks));
    sgd_step(params, batch_grads, cfg.learning_rate);  // constant rate here
    out.loss_trace.push_back(batch_loss /
                             static_cast<Scalar>(cfg.batch_blocks));
  }

  out.checkpoint.version = 1;
  out.checkpoint.config_json = config_echo_json(cfg, rng.draw_count());
  out.checkpoint.params = std::move(params);
  return out;
}

namespace {

// Spatially contiguous supervision crop: points below the x-coordinate
// quantile at `fraction`. fraction >= 1 keeps everything.
std::vector<bool> crop_mask(const PointCloud& cloud, Scalar fraction) {
  std::vector<bool> mask(cloud.size(), true);
  if (fraction >= 1.0) return mask;
  std::vector<Scalar> xs(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    xs[i] = cloud.positions[i].x();
  }
  std::vector<Scalar> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = std::min<std::size_t>(
      static_cast<std::size_t>(
          std::floor(fraction * static_cast<Scalar>(sorted.size()))),
      sorted.size() - 1);
  const Scalar threshold = sorted[idx];
  for (std::size_t i = 0; i < cloud.size(); ++i) mask[i] = xs[i] < threshold;
  return mask;
}

}  // namespace

Checkpoint finetune(const std::optional<Checkpoint>& init,
                    const std::vector<PointCloud>& clouds,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (clouds.empty()) throw std::invalid_argument("finetune: no input clouds");
  int max_label = -1;
  for (const PointCloud& cloud : clouds) {
    cloud.validate();
    if (cloud.empty() || !cloud.has_labels()) {
      throw DataError("finetune: every input cloud needs labels");
    }
    max_label = std::max(max_label,
                         *std::max_element(cloud.labels.begin(),
                                           cloud.labels.end()));
  }

  Rng rng(cfg.seed);
  Parameters params = init ? init->params : init_params(cfg.encoder, rng);
  int classes = cfg.classes > 0 ? cfg.classes : std::max(max_label + 1, 2);
  if (params.head) {
    if (cfg.classes > 0 &&
        params.head->w.cols() != static_cast<Eigen::Index>(cfg.classes)) {
      throw std::invalid_argument("finetune: head class count mismatch");
    }
    classes = static_cast<int>(params.head->w.cols());
  } else {
    params.head = init_head(classes, rng);
  }
  if (max_label >= classes) {
    throw DataError("finetune: label id exceeds class count");
  }

  struct CloudState {
    KdTree tree;
    std::vector<bool> mask;
    std::vector<int> masked_indices;
  };
  std::vector<CloudState> states;
  std::vector<std::size_t> eligible;
  states.reserve(clouds.size());
  for (std::size_t c = 0; c < clouds.size(); ++c) {
    CloudState state{KdTree(clouds[c].positions),
                     crop_mask(clouds[c], cfg.label_fraction),
                     {}};
    for (std::size_t i = 0; i < state.mask.size(); ++i) {
      if (state.mask[i]) state.masked_indices.push_back(static_cast<int>(i));
    }
    if (!state.masked_indices.empty()) eligible.push_back(c);
    states.push_back(std::move(state));
  }
  if (eligible.empty()) {
    throw DataError("finetune: no labeled points after masking");
  }

  const long total =
      static_cast<long>(cfg.epochs) * static_cast<long>(cfg.iterations_per_epoch);
  for (long iter = 0; iter < total; ++iter) {
    const int epoch = static_cast<int>(iter / cfg.iterations_per_epoch);
    const std::size_t ci = eligible[rng.uniform_index(eligible.size())];
    const PointCloud& cloud = clouds[ci];
    const CloudState& state = states[ci];

    const int center_idx = state.masked_indices[rng.uniform_index(
        state.masked_indices.size())];
    std::optional<Block> sphere = extract_sphere(
        cloud, state.tree, cloud.positions[center_idx], cfg.radius);
    const SimilarityTransform t =
        sample_transform(rng, 0.0, 360.0, cfg.scale_lo, cfg.scale_hi);
    const Block block = apply_transform(*sphere, t);

    const MatXR input = build_input_features(block, cfg.encoder);
    KdTree block_tree(block.local_positions);
    const std::vector<std::vector<int>> nbrs =
        knn_lists(block_tree, cfg.encoder.aggregation_k);

    ForwardCache cache;
    const EmbeddingBatch emb =
        forward(input, nbrs, params, cfg.encoder,
                cfg.freeze_encoder ? nullptr : &cache);

    std::vector<int> block_labels(block.size());
    std::vector<bool> block_mask(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) {
      block_labels[i] = cloud.labels[block.indices[i]];
      block_mask[i] = state.mask[static_cast<std::size_t>(block.indices[i])];
    }

    const HeadResult head =
        segmentation_head(emb, *params.head, block_labels, block_mask);
    Parameters grads =
        cfg.freeze_encoder
            ? zeros_like(params)
            : backward(cache, params, cfg.encoder, head.grad_embeddings);
    grads.head = head.grad;
    sgd_step(params, grads, finetune_learning_rate(cfg, epoch));
  }

  Checkpoint out;
  out.version = 1;
  out.config_json = config_echo_json(cfg, rng.draw_count());
  out.params = std::move(params);
  return out;
}

Prediction predict_with_voting(const Checkpoint& ckpt, const PointCloud& cloud,
                               int votes, Scalar radius) {
  if (!ckpt.params.head) {
    throw DataError("predict: checkpoint has no head");
  }
  if (votes < 1) throw std::invalid_argument("predict: votes must be >= 1");
  if (!(radius > 0.0)) {
    throw std::invalid_argument("predict: radius must be positive");
  }
  if (cloud.empty()) throw DataError("predict: empty cloud");
  cloud.validate();

  const EncoderConfig enc = encoder_config_from_json(ckpt.config_json);
  const Eigen::Index n = static_cast<Eigen::Index>(cloud.size());
  const Eigen::Index classes = ckpt.params.head->w.cols();
  KdTree tree(cloud.positions);

  Vec3 lo = cloud.positions[0];
  Vec3 hi = cloud.positions[0];
  for (const Vec3& p : cloud.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  MatXR accum = MatXR::Zero(n, classes);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  const Scalar spacing = radius / 2.0;
  const auto steps = [&](int axis) {
    return static_cast<long>(
               std::ceil((hi[axis] - lo[axis]) / spacing)) + 2;
  };
  const long nx = steps(0);
  const long ny = steps(1);
  const long nz = steps(2);

  auto min_count = [&]() {
    return *std::min_element(counts.begin(), counts.end());
  };

  // Any point has a lattice center within sqrt(3)/4 * radius < radius, so
  // every sweep round adds at least one vote everywhere; `votes` rounds
  // therefore always suffice.
  for (int round = 0; round < votes && min_count() < votes; ++round) {
    const Scalar offset =
        spacing * static_cast<Scalar>(round) / static_cast<Scalar>(votes);
    for (long ix = 0; ix < nx; ++ix) {
      for (long iy = 0; iy < ny; ++iy) {
        for (long iz = 0; iz < nz; ++iz) {
          const Vec3 center(
              lo.x() + offset + static_cast<Scalar>(ix - 1) * spacing,
              lo.y() + offset + static_cast<Scalar>(iy - 1) * spacing,
              lo.z() + offset + static_cast<Scalar>(iz - 1) * spacing);
          const std::optional<Block> block =
              extract_sphere(cloud, tree, center, radius);
          if (!block) continue;
          const MatXR input = build_input_features(*block, enc);
          KdTree block_tree(block->local_positions);
          const EmbeddingBatch emb =
              forward(input, knn_lists(block_tree, enc.aggregation_k),
                      ckpt.params, enc, nullptr);
          const MatXR probs = head_probabilities(emb, *ckpt.params.head);
          for (std::size_t i = 0; i < block->size(); ++i) {
            accum.row(block->indices[i]) += probs.row(static_cast<Eigen::Index>(i));
            ++counts[static_cast<std::size_t>(block->indices[i])];
          }
        }
      }
    }
  }
  if (min_count() < votes) {
    throw std::logic_error("predict: sweep failed to cover every point");
  }

  Prediction pred;
  pred.probabilities.resize(n, classes);
  pred.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    pred.probabilities.row(i) =
        accum.row(i) / static_cast<Scalar>(counts[static_cast<std::size_t>(i)]);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < classes; ++c) {
      if (pred.probabilities(i, c) > pred.probabilities(i, best)) best = c;
    }
    pred.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return pred;
}

std::string config_echo_json(const TrainConfig& cfg, std::uint64_t rng_draws) {
  json j;
  j["encoder"] = {
      {"use_intensity", cfg.encoder.use_intensity},
      {"use_return_count", cfg.encoder.use_return_count},
      {"use_height", cfg.encoder.use_height},
      {"block_widths", cfg.encoder.block_widths},
      {"aggregation_k", cfg.encoder.aggregation_k},
      {"leaky_slope", cfg.encoder.leaky_slope},
  };
  j["train"] = {
      {"learning_rate", cfg.learning_rate},
      {"decay_factor", cfg.decay_factor},
      {"decay_every", cfg.decay_every},
      {"iterations_per_epoch", cfg.iterations_per_epoch},
      {"epochs", cfg.epochs},
      {"batch_blocks", cfg.batch_blocks},
      {"label_fraction", cfg.label_fraction},
      {"radius", cfg.radius},
      {"kmeans_k", cfg.kmeans_k},
      {"kmeans_max_iter", cfg.kmeans_max_iter},
      {"feature_neighbors", cfg.features.neighbor_count},
      {"feature_center",
       cfg.features.center == CenterMode::kMedoid ? "medoid" : "mean"},
      {"scale_lo", cfg.scale_lo},
      {"scale_hi", cfg.scale_hi},
      {"min_block_points", cfg.min_block_points},
      {"freeze_encoder", cfg.freeze_encoder},
      {"classes", cfg.classes},
  };
  j["mining"] = {
      {"n_positive", cfg.mining.n_positive},
      {"n_negative_anchors", cfg.mining.n_negative_anchors},
      {"t_p", cfg.mining.t_p},
      {"t_n", cfg.mining.t_n},
      {"strategy",
       cfg.mining.strategy == MiningStrategy::kAbspan ? "abspan" : "hardest"},
      {"normalize_embeddings", cfg.mining.normalize_embeddings},
  };
  j["rng"] = {{"seed", cfg.seed}, {"draws", rng_draws}};
  return j.dump();
}

EncoderConfig encoder_config_from_json(const std::string& config_json) {
  EncoderConfig enc;
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::parse_error&) {
    throw FormatError("checkpoint: config echo is not valid JSON");
  }
  if (!j.contains("encoder")) return enc;
  const json& e = j["encoder"];
  enc.use_intensity = e.value("use_intensity", enc.use_intensity);
  enc.use_return_count = e.value("use_return_count", enc.use_return_count);
  enc.use_height = e.value("use_height", enc.use_height);
  if (e.contains("block_widths")) {
    const auto widths = e["block_widths"].get<std::vector<int>>();
    if (widths.size() != enc.block_widths.size()) {
      throw FormatError("checkpoint: block_widths must list 3 stages");
    }
    std::copy(widths.begin(), widths.end(), enc.block_widths.begin());
  }
  enc.aggregation_k = e.value("aggregation_k", enc.aggregation_k);
  enc.leaky_slope = e.value("leaky_slope", enc.leaky_slope);
  return enc;
}

Scalar radius_from_json(const std::string& config_json, Scalar fallback) {
  try {
    const json j = json::parse(config_json);
    if (j.contains("train") && j["train"].contains("radius")) {
      return j["train"]["radius"].get<Scalar>();
    }
  } catch (const json::parse_error&) {
  }
  return fallback;
}

std::vector<MineStatsRow> mine_stats(const PointCloud& cloud,
                                     const TrainConfig& cfg, bool run_abspan,
                                     bool run_hardest, int n_seeds) {
  cfg.validate();
  cloud.validate();
  if (!cloud.has_labels()) {
    throw DataError("mine-stats: cloud has no labels");
  }
  if (n_seeds < 1) {
    throw std::invalid_argument("mine-stats: need at least one seed");
  }
  if (!run_abspan && !run_hardest) return {};

  KdTree tree(cloud.positions);
  std::vector<MineStatsRow> rows;

  for (int s = 0; s < n_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    Rng rng(seed);
    Parameters params = init_params(cfg.encoder, rng);
    const PreparedPair prep = prepare_pair(cloud, tree, cfg, rng);
    const EmbeddingBatch v1 =
        forward(prep.input1, prep.nbrs1, params, cfg.encoder, nullptr);
    const EmbeddingBatch v2 =
        forward(prep.input2, prep.nbrs2, params, cfg.encoder, nullptr);
    const std::vector<std::pair<int, int>> theta =
        mine_positives(prep.pair.correspondences, cfg.mining.n_positive, rng);

    std::vector<int> truth1(prep.pair.x1.size());
    std::vector<int> truth2(prep.pair.x2.size());
    for (std::size_t i = 0; i < prep.pair.x1.size(); ++i) {
      truth1[i] = cloud.labels[prep.pair.x1.indices[i]];
      truth2[i] = cloud.labels[prep.pair.x2.indices[i]];
    }

    auto run = [&](MiningStrategy strategy) {
      MiningConfig mc = cfg.mining;
      mc.strategy = strategy;
      Rng fork = rng;  // both strategies consume identical anchor draws
      const PairSet pairs = mine_negatives(v1, v2, theta, prep.pseudo1,
                                           prep.pseudo2, mc, fork);
      MineStatsRow row;
      row.strategy = strategy;
      row.seed = seed;
      row.n_valid = pairs.valid_count_1 + pairs.valid_count_2;
      for (const NegativePair& np : pairs.negatives_1) {
        if (np.valid && prep.pseudo2[static_cast<std::size_t>(np.negative)] ==
                            prep.pseudo2[static_cast<std::size_t>(np.match)]) {
          ++row.n_same_pseudo;
        }
      }
      for (const NegativePair& np : pairs.negatives_2) {
        if (np.valid && prep.pseudo1[static_cast<std::size_t>(np.negative)] ==
                            prep.pseudo1[static_cast<std::size_t>(np.match)]) {
          ++row.n_same_pseudo;
        }
      }
      row.contamination = mined_pair_purity(pairs, truth1, truth2);
      Scalar dist_sum = 0.0;
      for (const NegativePair& np : pairs.negatives_1) {
        if (np.valid) {
          dist_sum += (v1.row(np.anchor) - v2.row(np.negative)).norm();
        }
      }
      for (const NegativePair& np : pairs.negatives_2) {
        if (np.valid) {
          dist_sum += (v2.row(np.anchor) - v1.row(np.negative)).norm();
        }
      }
      row.mean_neg_distance =
          row.n_valid > 0 ? dist_sum / static_cast<Scalar>(row.n_valid) : 0.0;
      rows.push_back(row);
    };
    if (run_abspan) run(MiningStrategy::kAbspan);
    if (run_hardest) run(MiningStrategy::kHardest);
  }
  return rows;
}

}  // namespace havana
