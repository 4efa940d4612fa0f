#include "havana/point_cloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "havana/io_util.hpp"

namespace havana {

namespace {

constexpr const char* kHeaderPrefix = "# havana-xyz v1 columns=";

enum class Column { x, y, z, intensity, return_count, label, correct };

Column column_from_name(const std::string& name, const std::string& path) {
  if (name == "x") return Column::x;
  if (name == "y") return Column::y;
  if (name == "z") return Column::z;
  if (name == "intensity") return Column::intensity;
  if (name == "return") return Column::return_count;
  if (name == "label") return Column::label;
  if (name == "correct") return Column::correct;
  throw FormatError(path + ": unknown column '" + name + "' in header");
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

Scalar parse_real(const std::string& tok, const std::string& path, long line) {
  Scalar value = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw FormatError(path + ":" + std::to_string(line) + ": cannot parse '" +
                      tok + "' as a number");
  }
  return value;
}

int parse_int(const std::string& tok, const std::string& path, long line) {
  const Scalar v = parse_real(tok, path, line);
  const Scalar r = std::nearbyint(v);
  if (v != r) {
    throw FormatError(path + ":" + std::to_string(line) + ": expected an integer, got '" + tok + "'");
  }
  return static_cast<int>(r);
}

}  // namespace

void PointCloud::validate() const {
  const std::size_t n = positions.size();
  if (!intensity.empty() && intensity.size() != n) {
    throw std::invalid_argument("intensity length does not match positions");
  }
  if (!return_count.empty() && return_count.size() != n) {
    throw std::invalid_argument("return_count length does not match positions");
  }
  if (!labels.empty() && labels.size() != n) {
    throw std::invalid_argument("labels length does not match positions");
  }
  for (const Vec3& p : positions) {
    if (!p.allFinite()) {
      throw std::invalid_argument("non-finite coordinate in point cloud");
    }
  }
  for (int r : return_count) {
    if (r < 0) throw std::invalid_argument("negative return count");
  }
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("negative class label");
  }
}

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path + "'");
  }

  std::vector<Column> columns = {Column::x, Column::y, Column::z};
  PointCloud cloud;
  std::string line;
  long line_no = 0;
  bool first_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (first_line) {
      first_line = false;
      if (line.rfind(kHeaderPrefix, 0) == 0) {
        columns.clear();
        for (const std::string& name :
             split_ws(line.substr(std::string(kHeaderPrefix).size()))) {
          columns.push_back(column_from_name(name, path));
        }
        if (columns.empty()) {
          throw FormatError(path + ":1: header declares no columns");
        }
        continue;
      }
    }
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::vector<std::string> tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != columns.size()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(columns.size()) + " values, got " +
                        std::to_string(tokens.size()));
    }
    Vec3 p = Vec3::Zero();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      switch (columns[c]) {
        case Column::x: p.x() = parse_real(tokens[c], path, line_no); break;
        case Column::y: p.y() = parse_real(tokens[c], path, line_no); break;
        case Column::z: p.z() = parse_real(tokens[c], path, line_no); break;
        case Column::intensity:
          cloud.intensity.push_back(parse_real(tokens[c], path, line_no));
          break;
        case Column::return_count:
          cloud.return_count.push_back(parse_int(tokens[c], path, line_no));
          break;
        case Column::label:
          cloud.labels.push_back(parse_int(tokens[c], path, line_no));
          break;
        case Column::correct:
          // Error-map flag column; ignored on load.
          parse_int(tokens[c], path, line_no);
          break;
      }
    }
    if (!p.allFinite()) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": non-finite coordinate");
    }
    cloud.positions.push_back(p);
  }

  try {
    cloud.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
  return cloud;
}

void save_cloud(const std::string& path, const PointCloud& cloud) {
  cloud.validate();
  atomic_write(path, [&](std::ostream& out) {
    out << kHeaderPrefix << "x y z";
    if (cloud.has_intensity()) out << " intensity";
    if (cloud.has_return_count()) out << " return";
    if (cloud.has_labels()) out << " label";
    out << "\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      out << format_g9(p.x()) << ' ' << format_g9(p.y()) << ' '
          << format_g9(p.z());
      if (cloud.has_intensity()) out << ' ' << format_g9(cloud.intensity[i]);
      if (cloud.has_return_count()) out << ' ' << cloud.return_count[i];
      if (cloud.has_labels()) out << ' ' << cloud.labels[i];
      out << "\n";
    }
  });
}

namespace {

struct CellKey {
  std::int64_t ix, iy, iz;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.ix, k.iy, k.iz}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct CellAccum {
  Vec3 position_sum = Vec3::Zero();
  Scalar intensity_sum = 0.0;
  std::int64_t return_sum = 0;
  std::map<int, int> label_votes;
  int count = 0;
};

}  // namespace

PointCloud grid_subsample(const PointCloud& cloud, Scalar cell) {
  if (!(cell > 0.0)) {
    throw std::invalid_argument("grid_subsample: cell size must be positive");
  }
  cloud.validate();

  std::unordered_map<CellKey, std::size_t, CellKeyHash> slot;
  std::vector<CellAccum> cells;  // first-occurrence order
  slot.reserve(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    const CellKey key{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                      static_cast<std::int64_t>(std::floor(p.y() / cell)),
                      static_cast<std::int64_t>(std::floor(p.z() / cell))};
    auto [it, inserted] = slot.try_emplace(key, cells.size());
    if (inserted) cells.emplace_back();
    CellAccum& acc = cells[it->second];
    acc.position_sum += p;
    if (cloud.has_intensity()) acc.intensity_sum += cloud.intensity[i];
    if (cloud.has_return_count()) acc.return_sum += cloud.return_count[i];
    if (cloud.has_labels()) acc.label_votes[cloud.labels[i]] += 1;
    acc.count += 1;
  }

  PointCloud out;
  out.positions.reserve(cells.size());
  for (const CellAccum& acc : cells) {
    const Scalar n = static_cast<Scalar>(acc.count);
    out.positions.push_back(acc.position_sum / n);
    if (cloud.has_intensity()) out.intensity.push_back(acc.intensity_sum / n);
    if (cloud.has_return_count()) {
      out.return_count.push_back(static_cast<int>(
          std::llround(static_cast<Scalar>(acc.return_sum) / n)));
    }
    if (cloud.has_labels()) {
      // std::map iterates in ascending id order, so the first maximal vote
      // is the smallest class id.
      int best_label = -1;
      int best_votes = 0;
      for (const auto& [label, votes] : acc.label_votes) {
        if (votes > best_votes) {
          best_votes = votes;
          best_label = label;
        }
      }
      out.labels.push_back(best_label);
    }
  }
  return out;
}

PointCloud select_points(const PointCloud& cloud,
                         const std::vector<int>& indices) {
  PointCloud out;
  out.positions.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cloud.size()) {
      throw std::invalid_argument("select_points: index out of range");
    }
    out.positions.push_back(cloud.positions[idx]);
    if (cloud.has_intensity()) out.intensity.push_back(cloud.intensity[idx]);
    if (cloud.has_return_count()) {
      out.return_count.push_back(cloud.return_count[idx]);
    }
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[idx]);
  }
  return out;
}

}  // namespace havana
