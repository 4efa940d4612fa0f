#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "havana/mining.hpp"
#include "havana/point_cloud.hpp"
#include "havana/types.hpp"

namespace havana {

/// Rows are truth classes, columns predicted classes.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  int n_classes() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
  std::int64_t trace() const { return counts.trace(); }
};

struct ClassMetrics {
  Scalar precision = 0.0;
  Scalar recall = 0.0;
  Scalar f1 = 0.0;
};

struct MetricsSummary {
  Scalar overall_accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  Scalar average_f1 = 0.0;
};

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& truth, int n_classes);

/// precision = TP/(TP+FP), recall = TP/(TP+FN), F1 = 2PR/(P+R), OA =
/// trace/total, average F1 = unweighted class mean; any zero denominator
/// makes that metric 0.
MetricsSummary metrics(const ConfusionMatrix& m);

/// 1 where predicted == truth, else 0.
std::vector<int> correctness_flags(const std::vector<int>& predicted,
                                   const std::vector<int>& truth);

/// Writes the cloud with its usual columns plus a trailing `correct` column.
void write_error_map(const std::string& path, const PointCloud& cloud,
                     const std::vector<int>& flags);

/// Fraction of valid mined negatives (both directions) whose two points
/// share the same true class; nullopt when there are no valid negatives.
std::optional<Scalar> mined_pair_purity(const PairSet& pairs,
                                        const std::vector<int>& truth1,
                                        const std::vector<int>& truth2);

/// CSV: header, one `class,precision,recall,f1` row per class, then summary
/// rows `OA,<value>` and `AvgF1,<value>`.
void write_metrics_csv(const std::string& path, const MetricsSummary& summary);

}  // namespace havana
