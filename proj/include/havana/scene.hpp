#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "havana/point_cloud.hpp"
#include "havana/types.hpp"

namespace havana {

namespace scene_class {
constexpr int kGround = 0;
constexpr int kRoof = 1;
constexpr int kFacade = 2;
constexpr int kPole = 3;
constexpr int kVegetation = 4;
constexpr int kCar = 5;
constexpr int kCount = 6;
constexpr const char* kNames[kCount] = {"ground",     "roof", "facade",
                                        "pole",       "vegetation",
                                        "car"};
}  // namespace scene_class

struct SceneSpec {
  Scalar extent_x = 50.0;  // meters
  Scalar extent_y = 50.0;
  Scalar density = 10.0;  // points per square meter
  int buildings = 3;
  int poles = 4;
  int vegetation = 6;
  int cars = 3;
  Scalar noise_sigma = 0.03;  // meters
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneResult {
  PointCloud cloud;
  std::vector<std::string> manifest;  // one line per placed object
  std::vector<std::string> warnings;  // objects skipped for lack of points
};

/// Labeled synthetic airborne-LiDAR-like scene: jittered ground plane,
/// box buildings with separately labeled roofs and facades, vertical poles,
/// ellipsoidal vegetation blobs, and car boxes. Bitwise deterministic given
/// the seed.
SceneResult generate_scene(const SceneSpec& spec);

/// Splits at the coordinate quantile along `axis` (0=x, 1=y, 2=z): first
/// region takes coordinates strictly below the quantile value, second the
/// rest. Throws on degenerate extent along the axis.
std::pair<PointCloud, PointCloud> split_scene(const PointCloud& cloud,
                                              Scalar fraction, int axis);

}  // namespace havana
