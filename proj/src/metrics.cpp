#include "havana/metrics.hpp"

#include <stdexcept>

#include "havana/io_util.hpp"

namespace havana {

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& truth, int n_classes) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("confusion: length mismatch");
  }
  if (n_classes < 1) {
    throw std::invalid_argument("confusion: need at least one class");
  }
  ConfusionMatrix m;
  m.counts.setZero(n_classes, n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw std::invalid_argument("confusion: label out of range");
    }
    ++m.counts(t, p);
  }
  return m;
}

MetricsSummary metrics(const ConfusionMatrix& m) {
  if (m.total() == 0) {
    throw std::invalid_argument("metrics: empty confusion matrix");
  }
  MetricsSummary s;
  s.overall_accuracy =
      static_cast<Scalar>(m.trace()) / static_cast<Scalar>(m.total());
  const int classes = m.n_classes();
  s.per_class.resize(static_cast<std::size_t>(classes));
  Scalar f1_sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    const Scalar tp = static_cast<Scalar>(m.counts(c, c));
    const Scalar col = static_cast<Scalar>(m.counts.col(c).sum());
    const Scalar row = static_cast<Scalar>(m.counts.row(c).sum());
    ClassMetrics& cm = s.per_class[static_cast<std::size_t>(c)];
    cm.precision = col > 0.0 ? tp / col : 0.0;
    cm.recall = row > 0.0 ? tp / row : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    f1_sum += cm.f1;
  }
  s.average_f1 = f1_sum / static_cast<Scalar>(classes);
  return s;
}

std::vector<int> correctness_flags(const std::vector<int>& predicted,
                                   const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("correctness_flags: length mismatch");
  }
  std::vector<int> flags(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    flags[i] = predicted[i] == truth[i] ? 1 : 0;
  }
  return flags;
}

void write_error_map(const std::string& path, const PointCloud& cloud,
                     const std::vector<int>& flags) {
  if (flags.size() != cloud.size()) {
    throw std::invalid_argument("write_error_map: length mismatch");
  }
  cloud.validate();
  atomic_write(path, [&](std::ostream& os) {
    os << "# havana-xyz v1 columns=x y z";
    if (cloud.has_intensity()) os << " intensity";
    if (cloud.has_return_count()) os << " return";
    if (cloud.has_labels()) os << " label";
    os << " correct\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      os << format_g9(p.x()) << ' ' << format_g9(p.y()) << ' '
         << format_g9(p.z());
      if (cloud.has_intensity()) os << ' ' << format_g9(cloud.intensity[i]);
      if (cloud.has_return_count()) os << ' ' << cloud.return_count[i];
      if (cloud.has_labels()) os << ' ' << cloud.labels[i];
      os << ' ' << flags[i] << '\n';
    }
  });
}

std::optional<Scalar> mined_pair_purity(const PairSet& pairs,
                                        const std::vector<int>& truth1,
                                        const std::vector<int>& truth2) {
  std::int64_t valid = 0;
  std::int64_t same = 0;
  for (const NegativePair& np : pairs.negatives_1) {
    if (!np.valid) continue;
    ++valid;
    if (truth1.at(static_cast<std::size_t>(np.anchor)) ==
        truth2.at(static_cast<std::size_t>(np.negative))) {
      ++same;
    }
  }
  for (const NegativePair& np : pairs.negatives_2) {
    if (!np.valid) continue;
    ++valid;
    if (truth2.at(static_cast<std::size_t>(np.anchor)) ==
        truth1.at(static_cast<std::size_t>(np.negative))) {
      ++same;
    }
  }
  if (valid == 0) return std::nullopt;
  return static_cast<Scalar>(same) / static_cast<Scalar>(valid);
}

void write_metrics_csv(const std::string& path,
                       const MetricsSummary& summary) {
  atomic_write(path, [&](std::ostream& os) {
    os << "class,precision,recall,f1\n";
    for (std::size_t c = 0; c < summary.per_class.size(); ++c) {
      const ClassMetrics& cm = summary.per_class[c];
      os << c << ',' << format_g9(cm.precision) << ',' << format_g9(cm.recall)
         << ',' << format_g9(cm.f1) << '\n';
    }
    os << "OA," << format_g9(summary.overall_accuracy) << '\n';
    os << "AvgF1," << format_g9(summary.average_f1) << '\n';
  });
}

}  // namespace havana
