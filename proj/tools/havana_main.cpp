#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "havana/checkpoint.hpp"
#include "havana/features.hpp"
#include "havana/io_util.hpp"
#include "havana/kdtree.hpp"
#include "havana/kmeans.hpp"
#include "havana/metrics.hpp"
#include "havana/parallel.hpp"
#include "havana/point_cloud.hpp"
#include "havana/scene.hpp"
#include "havana/trainer.hpp"

namespace fs = std::filesystem;
using namespace havana;

namespace {

/// CLI11 config reader for JSON files: keys mirror flag names (without the
/// leading dashes), nested objects select subcommands.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) {
      throw CLI::ConfigError("config: top level must be a JSON object");
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  static void walk(const nlohmann::json& j, std::vector<std::string> parents,
                   std::vector<CLI::ConfigItem>& items) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const nlohmann::json& v = it.value();
      if (v.is_object()) {
        std::vector<std::string> nested = parents;
        nested.push_back(it.key());
        walk(v, nested, items);
      } else {
        CLI::ConfigItem item;
        item.parents = parents;
        item.name = it.key();
        if (v.is_array()) {
          for (const nlohmann::json& e : v) item.inputs.push_back(scalar(e));
        } else {
          item.inputs.push_back(scalar(v));
        }
        items.push_back(std::move(item));
      }
    }
  }
};

struct CommonOpts {
  int threads = 1;
  std::uint64_t seed = 0;
  Scalar grid = 0.4;
};

void add_threads(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--threads", opts.threads,
                  "Worker threads for parallel per-point work")
      ->envname("HAVANA_THREADS")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_seed(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "Random seed")->capture_default_str();
}

void add_grid(CLI::App* cmd, CommonOpts& opts, Scalar def) {
  opts.grid = def;
  cmd->add_option("--grid", opts.grid,
                  "Grid subsampling cell size in meters (0 disables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

PointCloud load_prepared(const std::string& path, Scalar grid) {
  PointCloud cloud = load_cloud(path);
  if (grid > 0.0) cloud = grid_subsample(cloud, grid);
  return cloud;
}

std::vector<std::string> expand_data_paths(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const std::string& arg : args) {
    if (fs::is_directory(arg)) {
      std::vector<std::string> found;
      for (const fs::directory_entry& entry : fs::directory_iterator(arg)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xyz") {
          found.push_back(entry.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.push_back(arg);
    }
  }
  if (paths.empty()) throw DataError("no input point files found");
  return paths;
}

std::vector<PointCloud> load_all(const std::vector<std::string>& args,
                                 Scalar grid) {
  std::vector<PointCloud> clouds;
  for (const std::string& path : expand_data_paths(args)) {
    clouds.push_back(load_prepared(path, grid));
  }
  return clouds;
}

void add_mining_flags(CLI::App* cmd, MiningConfig& mining,
                      std::string* strategy, bool allow_both) {
  cmd->add_option("--n-positive", mining.n_positive,
                  "Positive pairs sampled per block pair")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--n-anchors", mining.n_negative_anchors,
                  "Anchor pairs mined for negatives")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tp", mining.t_p, "Positive hinge margin")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tn", mining.t_n, "Negative hinge margin")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--normalize-embeddings", mining.normalize_embeddings,
                "Rank negative candidates on unit-norm embeddings");
  if (strategy) {
    std::vector<std::string> allowed = {"abspan", "hardest"};
    if (allow_both) allowed.push_back("both");
    cmd->add_option("--strategy", *strategy, "Negative mining strategy")
        ->capture_default_str()
        ->check(CLI::IsMember(allowed));
  }
}

void add_encoder_flags(CLI::App* cmd, EncoderConfig& enc) {
  cmd->add_option("--block-widths", enc.block_widths,
                  "Output widths of the three encoder stages")
      ->capture_default_str()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--use-intensity", enc.use_intensity,
                "Feed per-point intensity to the encoder");
  cmd->add_flag("--use-return", enc.use_return_count,
                "Feed per-point return count to the encoder");
  cmd->add_flag("!--no-height", enc.use_height,
                "Disable the normalized-height input column");
  cmd->add_option("--agg-k", enc.aggregation_k,
                  "Neighbors pooled per point inside the encoder")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--lr", cfg.learning_rate, "SGD learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", cfg.epochs, "Training epochs")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--iters", cfg.iterations_per_epoch,
                  "Optimizer steps per epoch")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--radius", cfg.radius, "Block sphere radius in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--k", cfg.kmeans_k, "k-means cluster count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--neighbors", cfg.features.neighbor_count,
                  "Neighborhood size for geometric features")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000000));
  cmd->add_option("--min-block-points", cfg.min_block_points,
                  "Resample training spheres smaller than this")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000000000));
  cmd->add_option("--scale-lo", cfg.scale_lo, "Minimum augmentation scale")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--scale-hi", cfg.scale_hi, "Maximum augmentation scale")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

MiningStrategy strategy_from(const std::string& name) {
  if (name == "abspan") return MiningStrategy::kAbspan;
  if (name == "hardest") return MiningStrategy::kHardest;
  throw std::invalid_argument("unknown mining strategy: " + name);
}

CenterMode center_from(const std::string& name) {
  if (name == "medoid") return CenterMode::kMedoid;
  if (name == "mean") return CenterMode::kMean;
  throw std::invalid_argument("unknown center mode: " + name);
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  atomic_write(path, [&](std::ostream& os) {
    for (const std::string& line : lines) os << line << '\n';
  });
}

// ---------------------------------------------------------------- synth

void setup_synth(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "synth", "Generate a labeled synthetic airborne-LiDAR-like scene");
  auto spec = std::make_shared<SceneSpec>();
  auto out = std::make_shared<std::string>();
  auto manifest = std::make_shared<std::string>();
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--out", *out, "Output havana-xyz file")->required();
  cmd->add_option("--manifest", *manifest,
                  "Object placement manifest (default <out>.manifest.txt)");
  cmd->add_option("--extent-x", spec->extent_x, "Scene width in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--extent-y", spec->extent_y, "Scene depth in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--density", spec->density, "Points per square meter")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--buildings", spec->buildings, "Building count")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--poles", spec->poles, "Pole count")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--vegetation", spec->vegetation, "Vegetation blob count")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--cars", spec->cars, "Car count")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--noise", spec->noise_sigma, "Surface jitter sigma, meters")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_seed(cmd, *common);

  cmd->callback([spec, out, manifest, common]() {
    spec->seed = common->seed;
    const SceneResult result = generate_scene(*spec);
    for (const std::string& warning : result.warnings) {
      std::cerr << "warning: " << warning << '\n';
    }
    save_cloud(*out, result.cloud);
    const std::string manifest_path =
        manifest->empty() ? *out + ".manifest.txt" : *manifest;
    write_lines(manifest_path, result.manifest);
  });
}

// ------------------------------------------------------------- features

void setup_features(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "features", "Per-point eigenvalue geometric features as CSV");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto center = std::make_shared<std::string>("medoid");
  auto fcfg = std::make_shared<FeatureConfig>();
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--in", *in, "Input havana-xyz file")->required();
  cmd->add_option("--out", *out, "Output CSV file")->required();
  cmd->add_option("--neighbors", fcfg->neighbor_count,
                  "Neighborhood size for the covariance tensor")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000000));
  cmd->add_option("--center", *center,
                  "Covariance centering point: medoid or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"medoid", "mean"}));
  add_grid(cmd, *common, 0.0);
  add_threads(cmd, *common);

  cmd->callback([in, out, center, fcfg, common]() {
    set_thread_count(common->threads);
    fcfg->center = center_from(*center);
    const PointCloud cloud = load_prepared(*in, common->grid);
    if (cloud.empty()) throw DataError("features: empty input cloud");
    KdTree tree(cloud.positions);
    const GeometricFeatureSet features = compute_features(tree, *fcfg);
    atomic_write(*out, [&](std::ostream& os) {
      os << "point_index,planarity,surface_variation,verticality,normal_z\n";
      for (Eigen::Index i = 0; i < features.values.rows(); ++i) {
        os << i;
        for (int c = 0; c < GeometricFeatureSet::kDim; ++c) {
          os << ',' << format_g9(features.values(i, c));
        }
        os << '\n';
      }
    });
  });
}

// -------------------------------------------------------------- cluster

void setup_cluster(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "cluster", "k-means pseudo labels over geometric features");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto centroids_path = std::make_shared<std::string>();
  auto center = std::make_shared<std::string>("medoid");
  auto fcfg = std::make_shared<FeatureConfig>();
  auto k = std::make_shared<int>(9);
  auto max_iter = std::make_shared<int>(100);
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--in", *in, "Input havana-xyz file")->required();
  cmd->add_option("--out", *out, "Assignment CSV file")->required();
  cmd->add_option("--centroids", *centroids_path,
                  "Centroid CSV file (default <out>.centroids.csv)");
  cmd->add_option("--k", *k, "Cluster count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", *max_iter, "Lloyd iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--neighbors", fcfg->neighbor_count,
                  "Neighborhood size for the covariance tensor")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000000));
  cmd->add_option("--center", *center,
                  "Covariance centering point: medoid or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"medoid", "mean"}));
  add_grid(cmd, *common, 0.0);
  add_seed(cmd, *common);
  add_threads(cmd, *common);

  cmd->callback([in, out, centroids_path, center, fcfg, k, max_iter,
                 common]() {
    set_thread_count(common->threads);
    fcfg->center = center_from(*center);
    const PointCloud cloud = load_prepared(*in, common->grid);
    if (cloud.empty()) throw DataError("cluster: empty input cloud");
    if (static_cast<int>(cloud.size()) < *k) {
      throw DataError("cluster: fewer points than clusters");
    }
    KdTree tree(cloud.positions);
    const GeometricFeatureSet features = compute_features(tree, *fcfg);
    const PseudoLabels labels = kmeans(standardize_features(features.values),
                                       *k, *max_iter, common->seed);
    atomic_write(*out, [&](std::ostream& os) {
      os << "point_index,cluster_id\n";
      for (std::size_t i = 0; i < labels.assignment.size(); ++i) {
        os << i << ',' << labels.assignment[i] << '\n';
      }
    });
    const std::string cpath =
        centroids_path->empty() ? *out + ".centroids.csv" : *centroids_path;
    atomic_write(cpath, [&](std::ostream& os) {
      os << "cluster_id,planarity,surface_variation,verticality,normal_z\n";
      for (Eigen::Index c = 0; c < labels.centroids.rows(); ++c) {
        os << c;
        for (Eigen::Index f = 0; f < labels.centroids.cols(); ++f) {
          os << ',' << format_g9(labels.centroids(c, f));
        }
        os << '\n';
      }
    });
  });
}

// ------------------------------------------------------------- pretrain

void setup_pretrain(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "pretrain", "Self-supervised contrastive pre-training");
  auto data = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();
  auto trace = std::make_shared<std::string>();
  auto strategy = std::make_shared<std::string>("abspan");
  auto center = std::make_shared<std::string>("medoid");
  auto cfg = std::make_shared<TrainConfig>();
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--data", *data,
                  "Point files or directories of .xyz files")
      ->required();
  cmd->add_option("--out", *out, "Output checkpoint file")->required();
  cmd->add_option("--trace", *trace, "Optional per-iteration loss CSV");
  add_train_flags(cmd, *cfg);
  cmd->add_option("--batch-blocks", cfg->batch_blocks,
                  "Block pairs accumulated per optimizer step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_mining_flags(cmd, cfg->mining, strategy.get(), false);
  add_encoder_flags(cmd, cfg->encoder);
  cmd->add_option("--center", *center,
                  "Covariance centering point: medoid or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"medoid", "mean"}));
  add_grid(cmd, *common, 0.4);
  add_seed(cmd, *common);
  add_threads(cmd, *common);

  cmd->callback([data, out, trace, strategy, center, cfg, common]() {
    set_thread_count(common->threads);
    cfg->seed = common->seed;
    cfg->mining.strategy = strategy_from(*strategy);
    cfg->features.center = center_from(*center);
    const std::vector<PointCloud> clouds = load_all(*data, common->grid);
    const PretrainResult result = pretrain(clouds, *cfg);
    save_checkpoint(result.checkpoint, *out);
    if (!trace->empty()) {
      atomic_write(*trace, [&](std::ostream& os) {
        os << "iteration,loss\n";
        for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
          os << i << ',' << format_g9(result.loss_trace[i]) << '\n';
        }
      });
    }
  });
}

// ------------------------------------------------------------- finetune

void setup_finetune(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "finetune", "Supervised training of encoder and softmax head");
  auto data = std::make_shared<std::vector<std::string>>();
  auto init_path = std::make_shared<std::string>();
  auto scratch = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  auto center = std::make_shared<std::string>("medoid");
  auto cfg = std::make_shared<TrainConfig>();
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--data", *data,
                  "Labeled point files or directories of .xyz files")
      ->required();
  CLI::Option* init_opt =
      cmd->add_option("--init", *init_path, "Checkpoint to start from");
  CLI::Option* scratch_opt = cmd->add_flag(
      "--scratch", *scratch, "Start from fresh seeded parameters");
  init_opt->excludes(scratch_opt);
  cmd->add_option("--out", *out, "Output checkpoint file")->required();
  cmd->add_option("--fraction", cfg->label_fraction,
                  "Labeled fraction kept as a spatial crop, in (0,1]")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--classes", cfg->classes,
                  "Class count (0 derives it from the labels)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--freeze-encoder", cfg->freeze_encoder,
                "Train only the head, keeping encoder weights fixed");
  cmd->add_option("--decay", cfg->decay_factor, "Learning-rate decay factor")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--decay-every", cfg->decay_every,
                  "Epochs between learning-rate decays")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_train_flags(cmd, *cfg);
  add_encoder_flags(cmd, cfg->encoder);
  cmd->add_option("--center", *center,
                  "Covariance centering point: medoid or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"medoid", "mean"}));
  add_grid(cmd, *common, 0.4);
  add_seed(cmd, *common);
  add_threads(cmd, *common);

  cmd->callback([data, init_path, scratch, out, center, cfg, common]() {
    if (init_path->empty() && !*scratch) {
      throw CLI::ValidationError("finetune",
                                 "pass either --init <ckpt> or --scratch");
    }
    set_thread_count(common->threads);
    cfg->seed = common->seed;
    cfg->features.center = center_from(*center);
    std::optional<Checkpoint> init;
    if (!init_path->empty()) {
      init = load_checkpoint(*init_path);
      // Shapes must match the loaded tensors, not the flag defaults.
      cfg->encoder = encoder_config_from_json(init->config_json);
    }
    const std::vector<PointCloud> clouds = load_all(*data, common->grid);
    const Checkpoint ckpt = finetune(init, clouds, *cfg);
    save_checkpoint(ckpt, *out);
  });
}

// -------------------------------------------------------------- predict

void setup_predict(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "predict", "Label a cloud with sphere-voting inference");
  auto model = std::make_shared<std::string>();
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto votes = std::make_shared<int>(20);
  auto radius = std::make_shared<Scalar>(0.0);
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--model", *model, "Checkpoint with a trained head")
      ->required();
  cmd->add_option("--in", *in, "Input havana-xyz file")->required();
  cmd->add_option("--out", *out, "Output havana-xyz file with labels")
      ->required();
  cmd->add_option("--votes", *votes, "Minimum predictions per point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--radius", *radius,
                  "Sphere radius in meters (0 uses the checkpoint's)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_threads(cmd, *common);

  cmd->callback([model, in, out, votes, radius, common]() {
    set_thread_count(common->threads);
    const Checkpoint ckpt = load_checkpoint(*model);
    const PointCloud cloud = load_cloud(*in);
    const Scalar r =
        *radius > 0.0 ? *radius : radius_from_json(ckpt.config_json, 10.0);
    const Prediction pred = predict_with_voting(ckpt, cloud, *votes, r);
    PointCloud labeled = cloud;
    labeled.labels = pred.labels;
    save_cloud(*out, labeled);
  });
}

// ------------------------------------------------------------- evaluate

void setup_evaluate(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "evaluate", "Confusion metrics and error map for predicted labels");
  auto pred_path = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>(".");

  cmd->add_option("--pred", *pred_path, "Predicted havana-xyz file")
      ->required();
  cmd->add_option("--truth", *truth_path, "Ground-truth havana-xyz file")
      ->required();
  cmd->add_option("--out-dir", *out_dir, "Directory for metrics.csv and "
                                         "error_map.xyz")
      ->capture_default_str();

  cmd->callback([pred_path, truth_path, out_dir]() {
    const PointCloud pred = load_cloud(*pred_path);
    const PointCloud truth = load_cloud(*truth_path);
    if (!pred.has_labels() || !truth.has_labels()) {
      throw DataError("evaluate: both clouds need a label column");
    }
    if (pred.size() != truth.size()) {
      throw DataError("evaluate: prediction and truth sizes differ (" +
                      std::to_string(pred.size()) + " vs " +
                      std::to_string(truth.size()) + ")");
    }
    int n_classes = 0;
    for (int label : pred.labels) n_classes = std::max(n_classes, label + 1);
    for (int label : truth.labels) n_classes = std::max(n_classes, label + 1);

    const ConfusionMatrix cm = confusion(pred.labels, truth.labels, n_classes);
    const MetricsSummary summary = metrics(cm);
    fs::create_directories(*out_dir);
    write_metrics_csv((fs::path(*out_dir) / "metrics.csv").string(), summary);

    PointCloud annotated = truth;
    annotated.labels = pred.labels;  // error map carries the prediction
    write_error_map((fs::path(*out_dir) / "error_map.xyz").string(), annotated,
                    correctness_flags(pred.labels, truth.labels));
  });
}

// ----------------------------------------------------------- mine-stats

void setup_mine_stats(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "mine-stats", "Contamination probe for the negative mining strategies");
  auto data = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto strategy = std::make_shared<std::string>("both");
  auto seeds = std::make_shared<int>(10);
  auto center = std::make_shared<std::string>("medoid");
  auto cfg = std::make_shared<TrainConfig>();
  auto common = std::make_shared<CommonOpts>();

  cmd->add_option("--data", *data, "Labeled havana-xyz file")->required();
  cmd->add_option("--out", *out, "Output CSV file")->required();
  cmd->add_option("--seeds", *seeds, "Number of seeds to probe")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_mining_flags(cmd, cfg->mining, strategy.get(), true);
  add_train_flags(cmd, *cfg);
  add_encoder_flags(cmd, cfg->encoder);
  cmd->add_option("--center", *center,
                  "Covariance centering point: medoid or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"medoid", "mean"}));
  add_grid(cmd, *common, 0.4);
  add_seed(cmd, *common);
  add_threads(cmd, *common);

  cmd->callback([data, out, strategy, seeds, center, cfg, common]() {
    set_thread_count(common->threads);
    cfg->seed = common->seed;
    cfg->features.center = center_from(*center);
    const bool run_abspan = *strategy == "both" || *strategy == "abspan";
    const bool run_hardest = *strategy == "both" || *strategy == "hardest";
    const PointCloud cloud = load_prepared(*data, common->grid);
    const std::vector<MineStatsRow> rows =
        mine_stats(cloud, *cfg, run_abspan, run_hardest, *seeds);
    atomic_write(*out, [&](std::ostream& os) {
      os << "strategy,seed,n_valid,frac_same_true_label,mean_neg_distance\n";
      for (const MineStatsRow& row : rows) {
        os << (row.strategy == MiningStrategy::kAbspan ? "abspan" : "hardest")
           << ',' << row.seed << ',' << row.n_valid << ','
           << (row.contamination ? format_g9(*row.contamination)
                                 : std::string("nan"))
           << ',' << format_g9(row.mean_neg_distance) << '\n';
      }
    });
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"havana: self-supervised contrastive pre-training for "
               "point-cloud semantic segmentation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "JSON config file (keys mirror flag names)");
  app.config_formatter(std::make_shared<JsonConfig>());

  setup_synth(app);
  setup_features(app);
  setup_cluster(app);
  setup_pretrain(app);
  setup_finetune(app);
  setup_predict(app);
  setup_evaluate(app);
  setup_mine_stats(app);
  // Let `--config` (and any future top-level flag) appear after the
  // subcommand name, where users naturally type it.
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1, help exits 0
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
