#include "havana/features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "havana/parallel.hpp"

namespace havana {

namespace {

Vec3 neighborhood_center(const std::vector<Vec3>& points,
                         const std::vector<int>& neighborhood,
                         CenterMode mode) {
  if (mode == CenterMode::kMean) {
    Vec3 sum = Vec3::Zero();
    for (int idx : neighborhood) sum += points[idx];
    return sum / static_cast<Scalar>(neighborhood.size());
  }
  // Medoid: member minimizing total distance to the others; ties go to the
  // earliest member so results do not depend on traversal order.
  Scalar best_cost = 0.0;
  int best = -1;
  for (std::size_t a = 0; a < neighborhood.size(); ++a) {
    Scalar cost = 0.0;
    for (std::size_t b = 0; b < neighborhood.size(); ++b) {
      cost += (points[neighborhood[a]] - points[neighborhood[b]]).norm();
    }
    if (best < 0 || cost < best_cost) {
      best_cost = cost;
      best = static_cast<int>(a);
    }
  }
  return points[neighborhood[best]];
}

}  // namespace

Mat3 covariance_tensor(const std::vector<Vec3>& points,
                       const std::vector<int>& neighborhood,
                       CenterMode center) {
  if (neighborhood.size() < 3) return Mat3::Zero();
  const Vec3 c_bar = neighborhood_center(points, neighborhood, center);
  Mat3 sigma = Mat3::Zero();
  for (int idx : neighborhood) {
    const Vec3 d = points[idx] - c_bar;
    sigma += d * d.transpose();
  }
  return sigma / static_cast<Scalar>(neighborhood.size());
}

EigenResult eigendecompose_sym3(const Mat3& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("eigendecompose_sym3: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  solver.compute(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigendecompose_sym3: eigensolver failed");
  }

  EigenResult result;
  // Solver returns ascending order; reverse to lambda1 >= lambda2 >= lambda3.
  for (int i = 0; i < 3; ++i) {
    Scalar lambda = solver.eigenvalues()[2 - i];
    if (lambda < 0.0 && lambda >= -1e-10) lambda = 0.0;
    result.lambdas[i] = lambda;
    Vec3 v = solver.eigenvectors().col(2 - i);
    int largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    if (v[largest] < 0.0) v = -v;
    result.eigvecs.col(i) = v;
  }
  return result;
}

GeometricFeatureSet compute_features(const KdTree& index,
                                     const FeatureConfig& cfg) {
  if (index.size() == 0) {
    throw std::invalid_argument("compute_features: empty point set");
  }
  if (cfg.neighbor_count < 3) {
    throw std::invalid_argument("compute_features: neighbor_count must be >= 3");
  }
  const std::vector<Vec3>& points = index.points();
  const std::size_t n = points.size();

  GeometricFeatureSet out;
  out.values.setZero(static_cast<Eigen::Index>(n), GeometricFeatureSet::kDim);
  out.eigen.resize(n);
  out.neighborhood_size.resize(n);

  parallel_for(n, [&](std::size_t i) {
    const std::vector<int> nbrs =
        index.knn(points[i], cfg.neighbor_count);
    out.neighborhood_size[i] = static_cast<int>(nbrs.size());
    const Mat3 sigma = covariance_tensor(points, nbrs, cfg.center);
    const EigenResult eig = eigendecompose_sym3(sigma);
    out.eigen[i] = eig;

    const Scalar l1 = eig.lambdas[0];
    const Scalar l2 = eig.lambdas[1];
    const Scalar l3 = eig.lambdas[2];
    const Scalar total = l1 + l2 + l3;
    if (l1 <= 0.0 || total <= 0.0) return;  // degenerate: all features zero

    // Clamp away the few-ulp excursions of the eigensolver so the documented
    // ranges hold on every input.
    const Scalar nz = std::min(std::abs(eig.e(2).z()), Scalar(1));
    out.values(static_cast<Eigen::Index>(i), 0) =
        std::clamp((l2 - l3) / l1, Scalar(0), Scalar(1));
    out.values(static_cast<Eigen::Index>(i), 1) =
        std::clamp(l3 / total, Scalar(0), Scalar(1) / 3);
    out.values(static_cast<Eigen::Index>(i), 2) = 1.0 - nz;
    out.values(static_cast<Eigen::Index>(i), 3) = nz;
  });
  return out;
}

}  // namespace havana
