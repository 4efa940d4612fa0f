#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "havana/mining.hpp"
#include "test_util.hpp"

using namespace havana;

namespace {

EmbeddingBatch random_embeddings(Rng& rng, int rows, int cols) {
  EmbeddingBatch m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
  }
  return m;
}

// Reference miner: rank candidates by (squared distance, index) and walk the
// ranking until the label constraint admits one.
int oracle_candidate(const EmbeddingBatch& anchors, int anchor,
                     const EmbeddingBatch& pool,
                     const std::vector<int>& pool_labels, int exclude,
                     int forbidden_label) {
  std::vector<std::pair<Scalar, int>> ranked;
  for (Eigen::Index k = 0; k < pool.rows(); ++k) {
    if (static_cast<int>(k) == exclude) continue;
    ranked.emplace_back((pool.row(k) - anchors.row(anchor)).squaredNorm(),
                        static_cast<int>(k));
  }
  std::sort(ranked.begin(), ranked.end());
  for (const auto& [d2, k] : ranked) {
    if (forbidden_label >= 0 &&
        pool_labels[static_cast<std::size_t>(k)] == forbidden_label) {
      continue;
    }
    return k;
  }
  return -1;
}

}  // namespace

TEST_CASE("generate_block_pair keeps identity correspondences and scale ratio") {
  Rng rng(51);
  const PointCloud cloud = testutil::random_cloud(rng, 300, 10.0);
  KdTree tree(cloud.positions);
  const BlockPair pair = generate_block_pair(cloud, tree, 4.0, rng);

  REQUIRE(pair.x1.size() >= 2);
  CHECK(pair.x1.size() == pair.x2.size());
  CHECK(pair.x1.indices == pair.x2.indices);
  REQUIRE(pair.correspondences.size() == pair.x1.size());
  for (int m = 0; m < static_cast<int>(pair.correspondences.size()); ++m) {
    CHECK(pair.correspondences[static_cast<std::size_t>(m)].first == m);
    CHECK(pair.correspondences[static_cast<std::size_t>(m)].second == m);
  }

  // Both views scale the same underlying block, so the norm ratio is the
  // constant s2/s1 for every point away from the centroid.
  Scalar ratio = -1.0;
  for (std::size_t m = 0; m < pair.x1.size(); ++m) {
    const Scalar n1 = pair.x1.local_positions[m].norm();
    const Scalar n2 = pair.x2.local_positions[m].norm();
    if (n1 < 1e-9) continue;
    if (ratio < 0.0) {
      ratio = n2 / n1;
    } else {
      CHECK(n2 / n1 == doctest::Approx(ratio).epsilon(1e-9));
    }
  }
  CHECK(ratio >= 0.8 / 1.2 - 1e-12);
  CHECK(ratio <= 1.2 / 0.8 + 1e-12);
}

TEST_CASE("generate_block_pair is deterministic and validates its input") {
  Rng a(77);
  Rng b(77);
  const PointCloud cloud = testutil::random_cloud(a, 200, 8.0);
  PointCloud cloud_b = cloud;
  KdTree tree(cloud.positions);
  KdTree tree_b(cloud_b.positions);
  Rng ra(5);
  Rng rb(5);
  const BlockPair pa = generate_block_pair(cloud, tree, 3.0, ra);
  const BlockPair pb = generate_block_pair(cloud_b, tree_b, 3.0, rb);
  CHECK(pa.x1.indices == pb.x1.indices);
  CHECK(pa.x1.local_positions == pb.x1.local_positions);
  CHECK(pa.x2.local_positions == pb.x2.local_positions);

  PointCloud empty;
  KdTree empty_tree(std::vector<Vec3>{});
  Rng rc(1);
  CHECK_THROWS_AS(generate_block_pair(empty, empty_tree, 1.0, rc), DataError);

  // Points 100 apart with a tiny radius: no sphere ever reaches 5 members.
  PointCloud sparse;
  for (int i = 0; i < 10; ++i) sparse.positions.emplace_back(100.0 * i, 0, 0);
  KdTree sparse_tree(sparse.positions);
  Rng rd(1);
  CHECK_THROWS_AS(
      generate_block_pair(sparse, sparse_tree, 0.5, rd, 0.8, 1.2, 5),
      DataError);
}

TEST_CASE("mine_positives samples without replacement and clamps") {
  std::vector<std::pair<int, int>> corr;
  for (int i = 0; i < 10; ++i) corr.emplace_back(i, i);

  Rng rng(3);
  const auto all = mine_positives(corr, 100, rng);
  CHECK(all.size() == 10);
  std::set<std::pair<int, int>> unique(all.begin(), all.end());
  CHECK(unique.size() == 10);

  Rng r1(4);
  Rng r2(4);
  const auto sub1 = mine_positives(corr, 4, r1);
  const auto sub2 = mine_positives(corr, 4, r2);
  CHECK(sub1.size() == 4);
  CHECK(sub1 == sub2);
  for (const auto& p : sub1) {
    CHECK(std::find(corr.begin(), corr.end(), p) != corr.end());
  }

  Rng r3(5);
  CHECK_THROWS_AS(mine_positives({}, 4, r3), std::invalid_argument);
}

TEST_CASE("label filter skips the hardest candidate when labels collide") {
  // Anchor embeds at 1.0; candidates at 5.0, 0.9, (match), 1.2. The nearest
  // candidate (0.9, distance 0.1) shares the match's label, so the filtered
  // miner takes 1.2 (distance 0.2) while the baseline takes 0.9.
  EmbeddingBatch v(4, 1);
  v << 5.0, 0.9, 1.0, 1.2;
  const std::vector<int> labels = {0, 1, 1, 0};
  const std::vector<std::pair<int, int>> theta = {{2, 2}};

  MiningConfig cfg;
  cfg.n_positive = 1;
  cfg.n_negative_anchors = 1;

  cfg.strategy = MiningStrategy::kAbspan;
  Rng r1(1);
  const PairSet filtered = mine_negatives(v, v, theta, labels, labels, cfg, r1);
  REQUIRE(filtered.negatives_1.size() == 1);
  CHECK(filtered.negatives_1[0].anchor == 2);
  CHECK(filtered.negatives_1[0].match == 2);
  CHECK(filtered.negatives_1[0].negative == 3);
  CHECK(filtered.negatives_1[0].valid);
  CHECK(filtered.negatives_2[0].negative == 3);
  CHECK(filtered.valid_count_1 == 1);
  CHECK(filtered.valid_count_2 == 1);

  cfg.strategy = MiningStrategy::kHardest;
  Rng r2(1);
  const PairSet baseline = mine_negatives(v, v, theta, {}, {}, cfg, r2);
  CHECK(baseline.negatives_1[0].negative == 1);
  CHECK(baseline.negatives_2[0].negative == 1);
}

TEST_CASE("single pseudo cluster leaves the filtered miner empty-handed") {
  Rng rng(53);
  const EmbeddingBatch v1 = random_embeddings(rng, 20, 6);
  const EmbeddingBatch v2 = random_embeddings(rng, 20, 6);
  const std::vector<int> labels(20, 0);
  std::vector<std::pair<int, int>> theta;
  for (int i = 0; i < 20; ++i) theta.emplace_back(i, i);

  MiningConfig cfg;
  cfg.n_positive = 20;
  cfg.n_negative_anchors = 20;
  cfg.strategy = MiningStrategy::kAbspan;
  Rng r1(9);
  const PairSet pairs = mine_negatives(v1, v2, theta, labels, labels, cfg, r1);
  CHECK(pairs.valid_count_1 == 0);
  CHECK(pairs.valid_count_2 == 0);
  for (const NegativePair& np : pairs.negatives_1) {
    CHECK(!np.valid);
    CHECK(np.negative == -1);
  }

  cfg.strategy = MiningStrategy::kHardest;
  Rng r2(9);
  const PairSet base = mine_negatives(v1, v2, theta, {}, {}, cfg, r2);
  CHECK(base.valid_count_1 == 20);
  CHECK(base.valid_count_2 == 20);
}

TEST_CASE("all-distinct labels make the filtered miner match the baseline") {
  Rng rng(59);
  const EmbeddingBatch v1 = random_embeddings(rng, 15, 4);
  const EmbeddingBatch v2 = random_embeddings(rng, 15, 4);
  std::vector<int> labels(15);
  std::iota(labels.begin(), labels.end(), 0);
  std::vector<std::pair<int, int>> theta;
  for (int i = 0; i < 15; ++i) theta.emplace_back(i, i);

  MiningConfig cfg;
  cfg.n_positive = 15;
  cfg.n_negative_anchors = 15;
  cfg.strategy = MiningStrategy::kAbspan;
  Rng r1(13);
  const PairSet filtered = mine_negatives(v1, v2, theta, labels, labels, cfg, r1);
  cfg.strategy = MiningStrategy::kHardest;
  Rng r2(13);
  const PairSet baseline = mine_negatives(v1, v2, theta, {}, {}, cfg, r2);

  REQUIRE(filtered.negatives_1.size() == baseline.negatives_1.size());
  for (std::size_t k = 0; k < filtered.negatives_1.size(); ++k) {
    CHECK(filtered.negatives_1[k].anchor == baseline.negatives_1[k].anchor);
    CHECK(filtered.negatives_1[k].negative == baseline.negatives_1[k].negative);
    CHECK(filtered.negatives_2[k].negative == baseline.negatives_2[k].negative);
  }
}

TEST_CASE("mined negatives agree with a rank-and-walk reference") {
  Rng rng(61);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 50;
    const EmbeddingBatch v1 = random_embeddings(rng, n, 8);
    const EmbeddingBatch v2 = random_embeddings(rng, n, 8);
    std::vector<int> labels1(n), labels2(n);
    for (int i = 0; i < n; ++i) {
      labels1[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.uniform_index(3));
      labels2[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.uniform_index(3));
    }
    std::vector<std::pair<int, int>> theta;
    for (int i = 0; i < n; ++i) theta.emplace_back(i, i);

    for (MiningStrategy strategy :
         {MiningStrategy::kAbspan, MiningStrategy::kHardest}) {
      MiningConfig cfg;
      cfg.n_positive = n;
      cfg.n_negative_anchors = n;
      cfg.strategy = strategy;
      const bool abspan = strategy == MiningStrategy::kAbspan;
      Rng r(trial);
      const PairSet pairs =
          mine_negatives(v1, v2, theta, labels1, labels2, cfg, r);

      int recount_1 = 0;
      for (const NegativePair& np : pairs.negatives_1) {
        const int forbidden =
            abspan ? labels2[static_cast<std::size_t>(np.match)] : -1;
        const int expect =
            oracle_candidate(v1, np.anchor, v2, labels2, np.match, forbidden);
        CHECK(np.negative == expect);
        CHECK(np.valid == (expect >= 0));
        if (np.valid) ++recount_1;
      }
      CHECK(recount_1 == pairs.valid_count_1);

      int recount_2 = 0;
      for (const NegativePair& np : pairs.negatives_2) {
        const int forbidden =
            abspan ? labels1[static_cast<std::size_t>(np.match)] : -1;
        const int expect =
            oracle_candidate(v2, np.anchor, v1, labels1, np.match, forbidden);
        CHECK(np.negative == expect);
        if (np.valid) ++recount_2;
      }
      CHECK(recount_2 == pairs.valid_count_2);

      // The filtered miner never pairs same-label points.
      if (abspan) {
        for (const NegativePair& np : pairs.negatives_1) {
          if (!np.valid) continue;
          CHECK(labels2[static_cast<std::size_t>(np.negative)] !=
                labels2[static_cast<std::size_t>(np.match)]);
        }
      }
    }
  }
}

TEST_CASE("anchor subsampling clamps to theta and stays deterministic") {
  Rng rng(67);
  const EmbeddingBatch v1 = random_embeddings(rng, 30, 4);
  const EmbeddingBatch v2 = random_embeddings(rng, 30, 4);
  std::vector<std::pair<int, int>> theta;
  for (int i = 0; i < 5; ++i) theta.emplace_back(i, i);

  MiningConfig cfg;  // defaults ask for 2048 anchors
  cfg.strategy = MiningStrategy::kHardest;
  Rng r1(2);
  Rng r2(2);
  const PairSet a = mine_negatives(v1, v2, theta, {}, {}, cfg, r1);
  const PairSet b = mine_negatives(v1, v2, theta, {}, {}, cfg, r2);
  CHECK(a.negatives_1.size() == 5);
  CHECK(a.negatives_2.size() == 5);
  for (std::size_t k = 0; k < a.negatives_1.size(); ++k) {
    CHECK(a.negatives_1[k].anchor == b.negatives_1[k].anchor);
    CHECK(a.negatives_1[k].negative == b.negatives_1[k].negative);
  }
}

TEST_CASE("unit-norm ranking can pick a different negative") {
  EmbeddingBatch v1(1, 2);
  v1 << 1.0, 0.0;
  EmbeddingBatch v2(3, 2);
  v2 << 50.0, 50.0,  // the excluded match
      10.0, 0.0,     // same direction as the anchor, far in raw space
      0.9, 0.5;      // close in raw space, 29 degrees off in angle
  const std::vector<std::pair<int, int>> theta = {{0, 0}};

  MiningConfig cfg;
  cfg.n_positive = 1;
  cfg.n_negative_anchors = 1;
  cfg.strategy = MiningStrategy::kHardest;

  Rng r1(1);
  const PairSet raw = mine_negatives(v1, v2, theta, {}, {}, cfg, r1);
  CHECK(raw.negatives_1[0].negative == 2);

  cfg.normalize_embeddings = true;
  Rng r2(1);
  const PairSet unit = mine_negatives(v1, v2, theta, {}, {}, cfg, r2);
  CHECK(unit.negatives_1[0].negative == 1);
}

TEST_CASE("mining config and label validation") {
  EmbeddingBatch v(3, 2);
  v.setZero();
  const std::vector<std::pair<int, int>> theta = {{0, 0}};
  Rng rng(1);

  MiningConfig cfg;
  cfg.n_positive = 0;
  CHECK_THROWS_AS(mine_negatives(v, v, theta, {}, {}, cfg, rng),
                  std::invalid_argument);
  cfg = MiningConfig{};
  cfg.n_negative_anchors = cfg.n_positive + 1;
  CHECK_THROWS_AS(mine_negatives(v, v, theta, {}, {}, cfg, rng),
                  std::invalid_argument);
  cfg = MiningConfig{};
  cfg.t_p = 0.0;
  CHECK_THROWS_AS(mine_negatives(v, v, theta, {}, {}, cfg, rng),
                  std::invalid_argument);
  cfg = MiningConfig{};
  cfg.t_n = cfg.t_p;
  CHECK_THROWS_AS(mine_negatives(v, v, theta, {}, {}, cfg, rng),
                  std::invalid_argument);

  // The filtered strategy needs a label per point.
  cfg = MiningConfig{};
  cfg.strategy = MiningStrategy::kAbspan;
  const std::vector<int> short_labels = {0};
  CHECK_THROWS_AS(
      mine_negatives(v, v, theta, short_labels, short_labels, cfg, rng),
      std::invalid_argument);

  Rng r2(1);
  cfg.strategy = MiningStrategy::kHardest;
  CHECK_THROWS_AS(mine_negatives(v, v, {}, {}, {}, cfg, r2),
                  std::invalid_argument);
}
