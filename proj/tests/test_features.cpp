#include <doctest.h>

#include <cmath>
#include <numeric>

#include "havana/features.hpp"
#include "havana/kdtree.hpp"
#include "havana/parallel.hpp"
#include "havana/rng.hpp"
#include "test_util.hpp"

using namespace havana;

TEST_CASE("covariance of a hand-checked 3-point neighborhood") {
  const std::vector<Vec3> points = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 0}};
  const std::vector<int> neighborhood = {0, 1, 2};
  // Medoid is (0,0,0): total distance 2 vs 3 for the endpoints.
  const Mat3 sigma =
      covariance_tensor(points, neighborhood, CenterMode::kMedoid);
  Mat3 expected = Mat3::Zero();
  expected(0, 0) = 2.0 / 3.0;
  CHECK((sigma - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("covariance of identical points is the zero matrix") {
  const std::vector<Vec3> points = {{2, 3, 4}, {2, 3, 4}, {2, 3, 4}, {2, 3, 4}};
  const std::vector<int> neighborhood = {0, 1, 2, 3};
  CHECK(covariance_tensor(points, neighborhood, CenterMode::kMedoid)
            .isZero(0.0));
  CHECK(covariance_tensor(points, neighborhood, CenterMode::kMean).isZero(0.0));
}

TEST_CASE("covariance of a tiny neighborhood degenerates to zero") {
  const std::vector<Vec3> points = {{1, 0, 0}, {-1, 0, 0}};
  CHECK(covariance_tensor(points, {0, 1}, CenterMode::kMedoid).isZero(0.0));
  CHECK(covariance_tensor(points, {0}, CenterMode::kMedoid).isZero(0.0));
}

TEST_CASE("covariance over random neighborhoods is symmetric PSD") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud cloud = testutil::random_cloud(rng, 20, 2.0);
    std::vector<int> neighborhood(20);
    std::iota(neighborhood.begin(), neighborhood.end(), 0);
    for (CenterMode mode : {CenterMode::kMedoid, CenterMode::kMean}) {
      const Mat3 sigma =
          covariance_tensor(cloud.positions, neighborhood, mode);
      CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() < 1e-14);
      const EigenResult eig = eigendecompose_sym3(sigma);
      CHECK(eig.lambdas[2] >= 0.0);  // clamped at -1e-10
    }
  }
}

TEST_CASE("mean centering differs from medoid centering as computed by hand") {
  const std::vector<Vec3> points = {{0, 0, 0}, {1, 0, 0}, {5, 0, 0}};
  const std::vector<int> nb = {0, 1, 2};
  // Mean is (2,0,0): deviations -2,-1,3 -> xx = (4+1+9)/3.
  const Mat3 with_mean = covariance_tensor(points, nb, CenterMode::kMean);
  CHECK(with_mean(0, 0) == doctest::Approx(14.0 / 3.0).epsilon(1e-15));
  // Medoid is (1,0,0) (total distance 5 vs 6 and 9): xx = (1+0+16)/3.
  const Mat3 with_medoid = covariance_tensor(points, nb, CenterMode::kMedoid);
  CHECK(with_medoid(0, 0) == doctest::Approx(17.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("eigendecompose_sym3 on a diagonal matrix") {
  Mat3 m = Mat3::Zero();
  m.diagonal() << 3.0, 2.0, 1.0;
  const EigenResult eig = eigendecompose_sym3(m);
  CHECK(eig.lambdas[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eig.lambdas[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eig.lambdas[2] == doctest::Approx(1.0).epsilon(1e-14));
  // Sign convention: each eigenvector's largest-magnitude entry is positive,
  // so the axes come out as +x, +y, +z.
  CHECK((eig.e(0) - Vec3::UnitX()).norm() < 1e-14);
  CHECK((eig.e(1) - Vec3::UnitY()).norm() < 1e-14);
  CHECK((eig.e(2) - Vec3::UnitZ()).norm() < 1e-14);
}

TEST_CASE("eigendecompose_sym3 of the zero matrix is deterministic") {
  const EigenResult a = eigendecompose_sym3(Mat3::Zero());
  const EigenResult b = eigendecompose_sym3(Mat3::Zero());
  CHECK(a.lambdas == Vec3::Zero());
  CHECK(a.eigvecs == b.eigvecs);
  // Still an orthonormal basis.
  CHECK((a.eigvecs * a.eigvecs.transpose() - Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("eigendecompose_sym3 rejects asymmetric input") {
  Mat3 m = Mat3::Zero();
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose_sym3(m), std::invalid_argument);
}

TEST_CASE("eigendecomposition reconstructs 100 random symmetric matrices") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Mat3 a;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(r, c) = rng.uniform(-2.0, 2.0);
    }
    const Mat3 sym = 0.5 * (a + a.transpose());
    const EigenResult eig = eigendecompose_sym3(sym);
    Mat3 rebuilt = Mat3::Zero();
    for (int i = 0; i < 3; ++i) {
      rebuilt += eig.lambdas[i] * eig.e(i) * eig.e(i).transpose();
    }
    CHECK((rebuilt - sym).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(eig.lambdas[0] >= eig.lambdas[1]);
    CHECK(eig.lambdas[1] >= eig.lambdas[2]);
    // Orthonormality.
    CHECK((eig.eigvecs.transpose() * eig.eigvecs - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-8);
  }
}

namespace {

// Two concentric rings plus the center: exactly fourfold-symmetric, so the
// two in-plane eigenvalues coincide and planarity is exactly 1.
std::vector<Vec3> horizontal_disc() {
  std::vector<Vec3> points = {{0, 0, 0}};
  for (Scalar r : {0.5, 1.0}) {
    for (int i = 0; i < 16; ++i) {
      const Scalar a = 2.0 * kPi * i / 16.0;
      points.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }
  return points;
}

std::vector<Vec3> vertical_line(int n) {
  std::vector<Vec3> points;
  for (int i = 0; i < n; ++i) points.emplace_back(0.0, 0.0, 0.1 * i);
  return points;
}

// Quasi-uniform ball: spiral directions with stratified radii. Its covariance
// is isotropic to O(1/n), unlike an i.i.d. Gaussian draw whose smallest
// sample eigenvalue is biased low by ~3% at n=500.
std::vector<Vec3> isotropic_ball(int n) {
  std::vector<Vec3> points;
  const Scalar golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const Scalar z = 1.0 - 2.0 * (i + 0.5) / n;
    const Scalar r_xy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Scalar theta = golden * i;
    const Scalar rad = std::cbrt((i + 0.5) / n);
    points.emplace_back(rad * r_xy * std::cos(theta),
                        rad * r_xy * std::sin(theta), rad * z);
  }
  return points;
}

// Gaussian ball replicated under the 12 rotations of the tetrahedral group
// (cyclic axis permutations x even sign flips). The group acts irreducibly on
// R^3, so the mean-centered covariance is a multiple of the identity exactly.
std::vector<Vec3> symmetrized_gaussian_ball(Rng& rng, int base_draws) {
  std::vector<Vec3> points;
  for (int i = 0; i < base_draws; ++i) {
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    const Vec3 perms[3] = {{v.x(), v.y(), v.z()},
                           {v.y(), v.z(), v.x()},
                           {v.z(), v.x(), v.y()}};
    const Vec3 signs[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (const Vec3& p : perms) {
      for (const Vec3& s : signs) points.push_back(p.cwiseProduct(s));
    }
  }
  return points;
}

}  // namespace

TEST_CASE("features of a horizontal disc: planar, flat, horizontal normal up") {
  const std::vector<Vec3> points = horizontal_disc();
  KdTree tree(points);
  FeatureConfig cfg;
  cfg.neighbor_count = static_cast<int>(points.size());
  const GeometricFeatureSet fs = compute_features(tree, cfg);
  for (Eigen::Index i = 0; i < fs.values.rows(); ++i) {
    CHECK(fs.values(i, 0) == doctest::Approx(1.0).epsilon(1e-9));   // planarity
    CHECK(std::abs(fs.values(i, 1)) < 1e-9);  // surface variation
    CHECK(std::abs(fs.values(i, 2)) < 1e-9);  // verticality
    CHECK(fs.values(i, 3) == doctest::Approx(1.0).epsilon(1e-9));   // |n_z|
  }
}

TEST_CASE("features of a vertical line: zero planarity, full verticality") {
  const std::vector<Vec3> points = vertical_line(20);
  KdTree tree(points);
  FeatureConfig cfg;
  cfg.neighbor_count = 20;
  const GeometricFeatureSet fs = compute_features(tree, cfg);
  for (Eigen::Index i = 0; i < fs.values.rows(); ++i) {
    CHECK(std::abs(fs.values(i, 0)) < 1e-9);  // planarity
    CHECK(std::abs(fs.values(i, 1)) < 1e-9);  // surface variation
    CHECK(fs.values(i, 2) == doctest::Approx(1.0).epsilon(1e-9));  // verticality
    CHECK(std::abs(fs.values(i, 3)) < 1e-9);  // |n_z|
  }
}

TEST_CASE("surface variation of an isotropic ball approaches one third") {
  SUBCASE("quasi-uniform 500-point ball, medoid centering") {
    const std::vector<Vec3> points = isotropic_ball(500);
    KdTree tree(points);
    FeatureConfig cfg;
    cfg.neighbor_count = 500;
    const GeometricFeatureSet fs = compute_features(tree, cfg);
    // Every point sees the same full neighborhood.
    for (Eigen::Index i = 0; i < fs.values.rows(); i += 50) {
      CHECK(std::abs(fs.values(i, 1) - 1.0 / 3.0) < 0.02);
    }
  }
  SUBCASE("symmetrized Gaussian ball, mean centering") {
    Rng rng(7);
    const std::vector<Vec3> points = symmetrized_gaussian_ball(rng, 42);
    KdTree tree(points);
    FeatureConfig cfg;
    cfg.neighbor_count = static_cast<int>(points.size());
    cfg.center = CenterMode::kMean;
    const GeometricFeatureSet fs = compute_features(tree, cfg);
    CHECK(std::abs(fs.values(0, 1) - 1.0 / 3.0) < 1e-6);
  }
}

TEST_CASE("degenerate neighborhoods produce all-zero features") {
  // All points coincident: covariance zero, lambda1 = 0.
  std::vector<Vec3> points(10, Vec3(1, 2, 3));
  KdTree tree(points);
  FeatureConfig cfg;
  cfg.neighbor_count = 5;
  const GeometricFeatureSet fs = compute_features(tree, cfg);
  CHECK(fs.values.isZero(0.0));
}

TEST_CASE("compute_features rejects neighbor counts below 3 and empty input") {
  std::vector<Vec3> points = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  KdTree tree(points);
  FeatureConfig cfg;
  cfg.neighbor_count = 2;
  CHECK_THROWS_AS(compute_features(tree, cfg), std::invalid_argument);
  KdTree empty(std::vector<Vec3>{});
  cfg.neighbor_count = 3;
  CHECK_THROWS_AS(compute_features(empty, cfg), std::invalid_argument);
}

TEST_CASE("features are invariant under vertical rotation and uniform scale") {
  Rng rng(11);
  const PointCloud cloud = testutil::random_cloud(rng, 120, 3.0);
  FeatureConfig cfg;
  cfg.neighbor_count = 12;

  KdTree tree(cloud.positions);
  const GeometricFeatureSet base = compute_features(tree, cfg);

  const SimilarityTransform t{37.0, 2.0};
  std::vector<Vec3> moved;
  moved.reserve(cloud.size());
  for (const Vec3& p : cloud.positions) moved.push_back(t.apply(p));
  KdTree moved_tree(moved);
  const GeometricFeatureSet transformed = compute_features(moved_tree, cfg);

  CHECK((base.values - transformed.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("permuting the cloud permutes the features") {
  Rng rng(13);
  const PointCloud cloud = testutil::random_cloud(rng, 80, 3.0);
  FeatureConfig cfg;
  cfg.neighbor_count = 10;
  KdTree tree(cloud.positions);
  const GeometricFeatureSet base = compute_features(tree, cfg);

  const std::vector<int> perm = rng.sample_without_replacement(80, 80);
  std::vector<Vec3> shuffled(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    shuffled[static_cast<std::size_t>(perm[i])] = cloud.positions[i];
  }
  KdTree shuffled_tree(shuffled);
  const GeometricFeatureSet moved = compute_features(shuffled_tree, cfg);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Index from = static_cast<Eigen::Index>(i);
    const Eigen::Index to = perm[i];
    CHECK((base.values.row(from) - moved.values.row(to)).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("feature ranges hold on random, duplicated, and collinear inputs") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    PointCloud cloud = testutil::random_cloud(rng, 60, 2.0);
    if (trial % 3 == 1) {
      // Heavy duplication.
      for (int i = 0; i < 30; ++i) {
        cloud.positions[static_cast<std::size_t>(30 + i)] =
            cloud.positions[static_cast<std::size_t>(i / 2)];
      }
    }
    if (trial % 3 == 2) {
      // Flatten to a noisy plane.
      for (Vec3& p : cloud.positions) p.z() = 0.0;
    }
    KdTree tree(cloud.positions);
    FeatureConfig cfg;
    cfg.neighbor_count = 8;
    const GeometricFeatureSet fs = compute_features(tree, cfg);
    for (Eigen::Index i = 0; i < fs.values.rows(); ++i) {
      CHECK(fs.values(i, 0) >= 0.0);
      CHECK(fs.values(i, 0) <= 1.0);
      CHECK(fs.values(i, 1) >= 0.0);
      CHECK(fs.values(i, 1) <= 1.0 / 3.0);
      CHECK(fs.values(i, 2) >= 0.0);
      CHECK(fs.values(i, 2) <= 1.0);
      CHECK(fs.values(i, 3) >= 0.0);
      CHECK(fs.values(i, 3) <= 1.0);
    }
  }
}

TEST_CASE("feature computation is identical across thread counts") {
  Rng rng(19);
  const PointCloud cloud = testutil::random_cloud(rng, 150, 3.0);
  KdTree tree(cloud.positions);
  FeatureConfig cfg;
  cfg.neighbor_count = 10;

  set_thread_count(1);
  const GeometricFeatureSet serial = compute_features(tree, cfg);
  set_thread_count(4);
  const GeometricFeatureSet threaded = compute_features(tree, cfg);
  set_thread_count(1);
  CHECK((serial.values - threaded.values).cwiseAbs().maxCoeff() == 0.0);
}
