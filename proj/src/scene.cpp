#include "havana/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "havana/io_util.hpp"
#include "havana/rng.hpp"

namespace havana {

void SceneSpec::validate() const {
  if (!(extent_x > 0.0) || !(extent_y > 0.0)) {
    throw std::invalid_argument("scene: extent must be positive");
  }
  if (!(density > 0.0)) {
    throw std::invalid_argument("scene: density must be positive");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("scene: noise sigma must be non-negative");
  }
  if (buildings < 0 || poles < 0 || vegetation < 0 || cars < 0) {
    throw std::invalid_argument("scene: object counts must be non-negative");
  }
}

namespace {

long long count_for(Scalar area, Scalar density) {
  return std::llround(area * density);
}

// Uniform center coordinate keeping [lo, hi] margins inside the extent;
// degenerate extents collapse to the middle. Always consumes one draw.
Scalar place(Rng& rng, Scalar extent, Scalar margin) {
  const Scalar lo = std::min(margin, extent / 2.0);
  return rng.uniform(lo, extent - lo);
}

void add_point(PointCloud& cloud, Scalar x, Scalar y, Scalar z, int label) {
  cloud.positions.emplace_back(x, y, z);
  cloud.labels.push_back(label);
}

// Points on the top face and the four side walls of an axis-aligned box
// with base at z=0. Side density is halved (airborne scanners see walls
// obliquely). Returns (top count, side count).
std::pair<long long, long long> add_box(PointCloud& cloud, Rng& rng, Scalar cx,
                                        Scalar cy, Scalar w, Scalar d,
                                        Scalar h, Scalar density, Scalar sigma,
                                        int top_label, int side_label) {
  const long long n_top = count_for(w * d, density);
  for (long long i = 0; i < n_top; ++i) {
    const Scalar x = cx - w / 2.0 + rng.uniform() * w;
    const Scalar y = cy - d / 2.0 + rng.uniform() * d;
    add_point(cloud, x, y, h + sigma * rng.normal(), top_label);
  }
  const Scalar perimeter = 2.0 * (w + d);
  const long long n_side = count_for(perimeter * h * 0.5, density);
  for (long long i = 0; i < n_side; ++i) {
    Scalar s = rng.uniform() * perimeter;
    const Scalar z = rng.uniform() * h;
    const Scalar jitter = sigma * rng.normal();
    Scalar x;
    Scalar y;
    if (s < w) {  // front wall, y = cy - d/2
      x = cx - w / 2.0 + s;
      y = cy - d / 2.0 + jitter;
    } else if ((s -= w) < w) {  // back wall
      x = cx - w / 2.0 + s;
      y = cy + d / 2.0 + jitter;
    } else if ((s -= w) < d) {  // left wall, x = cx - w/2
      x = cx - w / 2.0 + jitter;
      y = cy - d / 2.0 + s;
    } else {  // right wall
      s -= d;
      x = cx + w / 2.0 + jitter;
      y = cy - d / 2.0 + s;
    }
    add_point(cloud, x, y, z, side_label);
  }
  return {n_top, n_side};
}

std::string fmt(Scalar v) { return format_g9(v); }

}  // namespace

SceneResult generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SceneResult result;
  PointCloud& cloud = result.cloud;

  const long long n_ground = count_for(spec.extent_x * spec.extent_y,
                                       spec.density);
  for (long long i = 0; i < n_ground; ++i) {
    const Scalar x = rng.uniform() * spec.extent_x;
    const Scalar y = rng.uniform() * spec.extent_y;
    add_point(cloud, x, y, spec.noise_sigma * rng.normal(),
              scene_class::kGround);
  }
  if (n_ground > 0) {
    result.manifest.push_back("ground points=" + std::to_string(n_ground));
  } else {
    result.warnings.push_back("ground produced 0 points; skipped");
  }

  for (int b = 0; b < spec.buildings; ++b) {
    const Scalar w = rng.uniform(6.0, 12.0);
    const Scalar d = rng.uniform(6.0, 12.0);
    const Scalar h = rng.uniform(6.0, 15.0);
    const Scalar cx = place(rng, spec.extent_x, w / 2.0 + 1.0);
    const Scalar cy = place(rng, spec.extent_y, d / 2.0 + 1.0);
    const auto [n_top, n_side] =
        add_box(cloud, rng, cx, cy, w, d, h, spec.density, spec.noise_sigma,
                scene_class::kRoof, scene_class::kFacade);
    if (n_top + n_side == 0) {
      result.warnings.push_back("building " + std::to_string(b) +
                                " produced 0 points; skipped");
      continue;
    }
    std::ostringstream line;
    line << "building " << b << " center=(" << fmt(cx) << ',' << fmt(cy)
         << ") size=(" << fmt(w) << ',' << fmt(d) << ',' << fmt(h)
         << ") roof_points=" << n_top << " facade_points=" << n_side;
    result.manifest.push_back(line.str());
  }

  for (int p = 0; p < spec.poles; ++p) {
    const Scalar height = rng.uniform(4.0, 10.0);
    const Scalar cx = place(rng, spec.extent_x, 1.0);
    const Scalar cy = place(rng, spec.extent_y, 1.0);
    const long long n = count_for(height, spec.density);
    for (long long i = 0; i < n; ++i) {
      const Scalar z = rng.uniform() * height;
      add_point(cloud, cx + 0.05 * rng.normal(), cy + 0.05 * rng.normal(), z,
                scene_class::kPole);
    }
    if (n == 0) {
      result.warnings.push_back("pole " + std::to_string(p) +
                                " produced 0 points; skipped");
      continue;
    }
    std::ostringstream line;
    line << "pole " << p << " base=(" << fmt(cx) << ',' << fmt(cy)
         << ") height=" << fmt(height) << " points=" << n;
    result.manifest.push_back(line.str());
  }

  for (int v = 0; v < spec.vegetation; ++v) {
    const Scalar rx = rng.uniform(1.0, 3.0);
    const Scalar ry = rng.uniform(1.0, 3.0);
    const Scalar rz = rng.uniform(1.5, 4.0);
    const Scalar cx = place(rng, spec.extent_x, rx + 1.0);
    const Scalar cy = place(rng, spec.extent_y, ry + 1.0);
    const Scalar cz = rz;  // blob resting on the ground
    const long long n = count_for(rx * ry * rz, spec.density);
    for (long long i = 0; i < n; ++i) {
      const Scalar x = cx + 0.5 * rx * rng.normal();
      const Scalar y = cy + 0.5 * ry * rng.normal();
      const Scalar z = cz + 0.5 * rz * rng.normal();
      add_point(cloud, x, y, z, scene_class::kVegetation);
    }
    if (n == 0) {
      result.warnings.push_back("vegetation " + std::to_string(v) +
                                " produced 0 points; skipped");
      continue;
    }
    std::ostringstream line;
    line << "vegetation " << v << " center=(" << fmt(cx) << ',' << fmt(cy)
         << ',' << fmt(cz) << ") radii=(" << fmt(rx) << ',' << fmt(ry) << ','
         << fmt(rz) << ") points=" << n;
    result.manifest.push_back(line.str());
  }

  for (int c = 0; c < spec.cars; ++c) {
    const Scalar w = rng.uniform(3.8, 5.0);
    const Scalar d = rng.uniform(1.7, 2.1);
    const Scalar h = rng.uniform(1.3, 1.7);
    const Scalar cx = place(rng, spec.extent_x, w / 2.0 + 1.0);
    const Scalar cy = place(rng, spec.extent_y, d / 2.0 + 1.0);
    const auto [n_top, n_side] =
        add_box(cloud, rng, cx, cy, w, d, h, spec.density, spec.noise_sigma,
                scene_class::kCar, scene_class::kCar);
    if (n_top + n_side == 0) {
      result.warnings.push_back("car " + std::to_string(c) +
                                " produced 0 points; skipped");
      continue;
    }
    std::ostringstream line;
    line << "car " << c << " center=(" << fmt(cx) << ',' << fmt(cy)
         << ") size=(" << fmt(w) << ',' << fmt(d) << ',' << fmt(h)
         << ") points=" << (n_top + n_side);
    result.manifest.push_back(line.str());
  }

  return result;
}

std::pair<PointCloud, PointCloud> split_scene(const PointCloud& cloud,
                                              Scalar fraction, int axis) {
  if (cloud.empty()) throw std::invalid_argument("split_scene: empty cloud");
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw std::invalid_argument("split_scene: fraction must be in (0,1)");
  }
  if (axis < 0 || axis > 2) {
    throw std::invalid_argument("split_scene: axis must be 0, 1, or 2");
  }
  std::vector<Scalar> coords(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    coords[i] = cloud.positions[i][axis];
  }
  const auto [lo, hi] = std::minmax_element(coords.begin(), coords.end());
  if (*lo == *hi) {
    throw std::invalid_argument("split_scene: degenerate extent along axis");
  }
  std::vector<Scalar> sorted = coords;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = std::min<std::size_t>(
      static_cast<std::size_t>(
          std::floor(fraction * static_cast<Scalar>(sorted.size()))),
      sorted.size() - 1);
  const Scalar threshold = sorted[idx];

  std::vector<int> first;
  std::vector<int> second;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (coords[i] < threshold) {
      first.push_back(static_cast<int>(i));
    } else {
      second.push_back(static_cast<int>(i));
    }
  }
  return {select_points(cloud, first), select_points(cloud, second)};
}

}  // namespace havana
