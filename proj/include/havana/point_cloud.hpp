#pragma once

#include <string>
#include <vector>

#include "havana/types.hpp"

namespace havana {

/// Column-oriented point cloud. Attribute vectors are either empty (absent)
/// or exactly as long as `positions`. Coordinates are meters.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Scalar> intensity;   // optional, sensor units
  std::vector<int> return_count;   // optional, small non-negative integers
  std::vector<int> labels;         // optional, class ids 0..C-1

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_intensity() const { return !intensity.empty(); }
  bool has_return_count() const { return !return_count.empty(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws std::invalid_argument on attribute-length mismatch, non-finite
  /// coordinates, or negative labels/returns.
  void validate() const;
};

/// Read the havana-xyz ASCII format. Optional first-line header
///   # havana-xyz v1 columns=<names from {x,y,z,intensity,return,label}>
/// selects the columns; the default is `x y z`. `#` starts a comment.
/// Malformed values and inconsistent column counts raise FormatError with
/// the offending line number.
PointCloud load_cloud(const std::string& path);

/// Write havana-xyz with a header declaring the attributes present.
/// Reals carry 9 significant digits. The write is atomic (temp + rename).
void save_cloud(const std::string& path, const PointCloud& cloud);

/// One output point per non-empty cubic cell of side `cell`: position is the
/// cell barycenter, intensity/return are means (return rounded to nearest),
/// label is the majority vote with ties to the smallest class id. Output
/// cells appear in first-occurrence order of their member points.
PointCloud grid_subsample(const PointCloud& cloud, Scalar cell);

/// New cloud holding the listed points (in the given order) with their
/// attributes. Indices must be valid.
PointCloud select_points(const PointCloud& cloud,
                         const std::vector<int>& indices);

}  // namespace havana
