#include "havana/encoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "havana/kdtree.hpp"

namespace havana {

void EncoderConfig::validate() const {
  for (int w : block_widths) {
    if (w < 1) throw std::invalid_argument("encoder: widths must be positive");
  }
  if (aggregation_k < 1) {
    throw std::invalid_argument("encoder: aggregation_k must be >= 1");
  }
  if (!(leaky_slope > 0.0) || leaky_slope >= 1.0) {
    throw std::invalid_argument("encoder: leaky slope must be in (0, 1)");
  }
}

std::vector<TensorRef> tensor_refs(Parameters& params) {
  std::vector<TensorRef> refs;
  for (std::size_t s = 0; s < params.stages.size(); ++s) {
    const std::string prefix = "encoder.stage" + std::to_string(s) + ".";
    refs.push_back({prefix + "w1", &params.stages[s].w1, nullptr});
    refs.push_back({prefix + "b1", nullptr, &params.stages[s].b1});
    refs.push_back({prefix + "w2", &params.stages[s].w2, nullptr});
    refs.push_back({prefix + "b2", nullptr, &params.stages[s].b2});
  }
  refs.push_back({"encoder.out.w", &params.out_w, nullptr});
  refs.push_back({"encoder.out.b", nullptr, &params.out_b});
  if (params.head) {
    refs.push_back({"head.w", &params.head->w, nullptr});
    refs.push_back({"head.b", nullptr, &params.head->b});
  }
  return refs;
}

Parameters zeros_like(const Parameters& params) {
  Parameters z = params;
  for (TensorRef& ref : tensor_refs(z)) {
    if (ref.mat) ref.mat->setZero();
    if (ref.vec) ref.vec->setZero();
  }
  return z;
}

namespace {

MatX xavier(int fan_in, int fan_out, Rng& rng) {
  const Scalar a = std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
  MatX w(fan_in, fan_out);
  for (int r = 0; r < fan_in; ++r) {
    for (int c = 0; c < fan_out; ++c) w(r, c) = rng.uniform(-a, a);
  }
  return w;
}

}  // namespace

Parameters init_params(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  Parameters p;
  int in = cfg.input_channels();
  for (std::size_t s = 0; s < p.stages.size(); ++s) {
    const int width = cfg.block_widths[s];
    p.stages[s].w1 = xavier(in, width, rng);
    p.stages[s].b1 = VecX::Zero(width);
    p.stages[s].w2 = xavier(2 * width, width, rng);
    p.stages[s].b2 = VecX::Zero(width);
    in = width;
  }
  p.out_w = xavier(in, EncoderConfig::kOutputDim, rng);
  p.out_b = VecX::Zero(EncoderConfig::kOutputDim);
  return p;
}

HeadParams init_head(int n_classes, Rng& rng) {
  if (n_classes < 2) {
    throw std::invalid_argument("init_head: need at least 2 classes");
  }
  HeadParams h;
  h.w = xavier(EncoderConfig::kOutputDim, n_classes, rng);
  h.b = VecX::Zero(n_classes);
  return h;
}

std::vector<std::vector<int>> build_neighbor_lists(
    const std::vector<Vec3>& points, int k) {
  KdTree tree(points);
  std::vector<std::vector<int>> lists(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    lists[i] = tree.knn(points[i], k);
  }
  return lists;
}

MatXR build_input_features(const Block& block, const EncoderConfig& cfg) {
  if (block.empty()) {
    throw std::invalid_argument("build_input_features: empty block");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(block.size());
  MatXR x(n, cfg.input_channels());
  Eigen::Index col = 0;
  x.col(col++).setOnes();
  if (cfg.use_intensity) {
    if (!block.parent->has_intensity()) {
      throw DataError("build_input_features: cloud has no intensity");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, col) = block.parent->intensity[block.indices[i]];
    }
    ++col;
  }
  if (cfg.use_return_count) {
    if (!block.parent->has_return_count()) {
      throw DataError("build_input_features: cloud has no return counts");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, col) =
          static_cast<Scalar>(block.parent->return_count[block.indices[i]]);
    }
    ++col;
  }
  if (cfg.use_height) {
    Scalar z_min = std::numeric_limits<Scalar>::infinity();
    for (const Vec3& p : block.local_positions) z_min = std::min(z_min, p.z());
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, col) = (block.local_positions[i].z() - z_min) / (2.0 * block.radius);
    }
    ++col;
  }
  return x;
}

namespace {

// Fixed-order accumulation so a row's result depends only on its contents,
// never on its position (blocked GEMM kernels round remainder rows
// differently, which would break exact permutation equivariance).
MatXR affine(const MatXR& x, const MatX& w, const VecX& b) {
  if (x.cols() != w.rows()) {
    throw std::invalid_argument("encoder: input width does not match weights");
  }
  MatXR out(x.rows(), w.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Scalar acc = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) acc += x(i, k) * w(k, j);
      out(i, j) = acc + b(j);
    }
  }
  return out;
}

MatXR leaky(const MatXR& a, Scalar slope) {
  return a.unaryExpr(
      [slope](Scalar v) { return v > 0.0 ? v : slope * v; });
}

// Elementwise max over each point's neighbor rows; records which neighbor
// supplied each maximum (ties to the lowest point index).
void max_pool(const MatXR& h, const std::vector<std::vector<int>>& neighbors,
              MatXR& pooled,
              Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& argmax) {
  const Eigen::Index n = h.rows();
  const Eigen::Index w = h.cols();
  pooled.resize(n, w);
  argmax.resize(n, w);
  for (Eigen::Index p = 0; p < n; ++p) {
    const std::vector<int>& list = neighbors[static_cast<std::size_t>(p)];
    for (Eigen::Index f = 0; f < w; ++f) {
      Scalar best = -std::numeric_limits<Scalar>::infinity();
      int best_q = -1;
      for (int q : list) {
        const Scalar v = h(q, f);
        if (v > best || (v == best && q < best_q)) {
          best = v;
          best_q = q;
        }
      }
      pooled(p, f) = best;
      argmax(p, f) = best_q;
    }
  }
}

}  // namespace

EmbeddingBatch forward(const MatXR& input,
                       const std::vector<std::vector<int>>& neighbors,
                       const Parameters& params, const EncoderConfig& cfg,
                       ForwardCache* cache) {
  cfg.validate();
  const Eigen::Index n = input.rows();
  if (n == 0) throw std::invalid_argument("forward: empty input");
  if (input.cols() != cfg.input_channels()) {
    throw std::invalid_argument("forward: wrong input channel count");
  }
  if (neighbors.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("forward: neighbor list per point required");
  }
  for (const std::vector<int>& list : neighbors) {
    if (list.empty()) {
      throw std::invalid_argument("forward: empty neighbor list");
    }
    for (int q : list) {
      if (q < 0 || q >= n) {
        throw std::invalid_argument("forward: neighbor index out of range");
      }
    }
  }
  if (cache) cache->neighbors = neighbors;

  MatXR x = input;
  for (std::size_t s = 0; s < params.stages.size(); ++s) {
    const StageParams& sp = params.stages[s];
    StageCache local;
    StageCache& sc = cache ? cache->stages[s] : local;
    sc.input = x;
    sc.pre_act = affine(x, sp.w1, sp.b1);
    const MatXR h = leaky(sc.pre_act, cfg.leaky_slope);
    MatXR pooled;
    max_pool(h, neighbors, pooled, sc.argmax);
    sc.concat.resize(n, 2 * h.cols());
    sc.concat << h, pooled;
    x = affine(sc.concat, sp.w2, sp.b2);
  }
  if (cache) cache->out_input = x;
  return affine(x, params.out_w, params.out_b);
}

Parameters backward(const ForwardCache& cache, const Parameters& params,
                    const EncoderConfig& cfg, const MatXR& d_embeddings) {
  if (cache.out_input.rows() != d_embeddings.rows() ||
      d_embeddings.cols() != EncoderConfig::kOutputDim) {
    throw std::invalid_argument("backward: gradient shape mismatch");
  }
  Parameters grads = zeros_like(params);

  grads.out_w = cache.out_input.transpose() * d_embeddings;
  grads.out_b = d_embeddings.colwise().sum().transpose();
  MatXR dx = d_embeddings * params.out_w.transpose();

  for (int s = static_cast<int>(params.stages.size()) - 1; s >= 0; --s) {
    const StageParams& sp = params.stages[s];
    const StageCache& sc = cache.stages[s];
    const Eigen::Index width = sp.w2.cols();

    grads.stages[s].w2 = sc.concat.transpose() * dx;
    grads.stages[s].b2 = dx.colwise().sum().transpose();
    const MatXR d_concat = dx * sp.w2.transpose();

    MatXR dh = d_concat.leftCols(width);
    for (Eigen::Index p = 0; p < dh.rows(); ++p) {
      for (Eigen::Index f = 0; f < width; ++f) {
        dh(sc.argmax(p, f), f) += d_concat(p, width + f);
      }
    }

    const Scalar slope = cfg.leaky_slope;
    const MatXR da = dh.cwiseProduct(sc.pre_act.unaryExpr(
        [slope](Scalar v) { return v > 0.0 ? Scalar(1) : slope; }));
    grads.stages[s].w1 = sc.input.transpose() * da;
    grads.stages[s].b1 = da.colwise().sum().transpose();
    dx = da * sp.w1.transpose();
  }
  return grads;
}

HeadResult segmentation_head(const EmbeddingBatch& embeddings,
                             const HeadParams& head,
                             const std::vector<int>& labels,
                             const std::vector<bool>& mask) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index classes = head.w.cols();
  if (classes < 2) {
    throw std::invalid_argument("segmentation_head: need >= 2 classes");
  }
  if (labels.size() != static_cast<std::size_t>(n) ||
      mask.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("segmentation_head: length mismatch");
  }
  Eigen::Index masked = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    ++masked;
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= classes) {
      throw std::invalid_argument("segmentation_head: label out of range");
    }
  }
  if (masked == 0) {
    throw std::invalid_argument("segmentation_head: empty label mask");
  }

  HeadResult out;
  const MatXR logits = (embeddings * head.w).rowwise() + head.b.transpose();
  out.probabilities.resize(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - peak).exp();
    out.probabilities.row(i) = shifted / shifted.sum();
  }

  const Scalar inv_m = 1.0 / static_cast<Scalar>(masked);
  MatXR d_logits = MatXR::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int label = labels[static_cast<std::size_t>(i)];
    out.loss -= std::log(out.probabilities(i, label)) * inv_m;
    d_logits.row(i) = out.probabilities.row(i) * inv_m;
    d_logits(i, label) -= inv_m;
  }

  out.grad.w = embeddings.transpose() * d_logits;
  out.grad.b = d_logits.colwise().sum().transpose();
  out.grad_embeddings = d_logits * head.w.transpose();
  return out;
}

}  // namespace havana
