#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "swamp/clusterer.hpp"
#include "swamp/random.hpp"

namespace swamp {
namespace {

FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& points) {
  std::vector<std::size_t> ids(points.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  FeatureMatrix m(points.empty() ? 0 : points[0].size(), ids);
  for (const auto& p : points) {
    std::vector<std::pair<std::size_t, double>> e;
    for (std::size_t c = 0; c < p.size(); ++c)
      if (p[c] != 0.0) e.emplace_back(c, p[c]);
    m.push_row(e);
  }
  return m;
}

DistanceMatrix matrix_from(const std::vector<std::vector<double>>& d) {
  std::vector<std::size_t> ids(d.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  DistanceMatrix dm(ids);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) dm.set(i, j, d[i][j]);
  return dm;
}

// Direct transcription of the silhouette definition.
double silhouette_oracle(const std::vector<std::vector<double>>& d, const std::vector<std::size_t>& labels,
                         std::size_t k) {
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[j]] += d[i][j];
      ++cnt[labels[j]];
    }
    if (cnt[labels[i]] == 0) continue;
    const double a = sum[labels[i]] / static_cast<double>(cnt[labels[i]]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != labels[i] && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return adjusted_rand_index(a, b) == 1.0;
}

TEST(KMeans, SeparableOneDimensional) {
  const auto m = dense_matrix({{0.0}, {0.1}, {10.0}, {10.1}});
  const auto c = kmeans(m, 2, 0);
  EXPECT_EQ(c.assignments[0], c.assignments[1]);
  EXPECT_EQ(c.assignments[2], c.assignments[3]);
  EXPECT_NE(c.assignments[0], c.assignments[2]);
  EXPECT_NEAR(c.inertia, 4 * 0.05 * 0.05, 1e-12);
}

TEST(KMeans, KOneAndKEqualsN) {
  const auto m = dense_matrix({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
  const auto one = kmeans(m, 1, 5);
  EXPECT_EQ(one.assignments, (std::vector<std::size_t>{0, 0, 0}));
  const auto all = kmeans(m, 3, 5);
  EXPECT_EQ(all.inertia, 0.0);
  auto labels = all.assignments;
  std::sort(labels.begin(), labels.end());
  EXPECT_EQ(labels, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KMeans, InvalidK) {
  const auto m = dense_matrix({{1.0}, {2.0}});
  EXPECT_THROW(kmeans(m, 0, 0), ConfigError);
  EXPECT_THROW(kmeans(m, 3, 0), ConfigError);
  EXPECT_THROW(minibatch_kmeans(m, 3, 0), ConfigError);
}

TEST(KMeans, DuplicatePointsWithLargeK) {
  const auto m = dense_matrix({{1.0}, {1.0}, {1.0}, {2.0}});
  const auto c = kmeans(m, 3, 9);
  EXPECT_EQ(c.size(), 4u);
  EXPECT_EQ(c.k, 3u);
}

std::vector<std::vector<double>> random_points(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<std::vector<double>> p(n, std::vector<double>(dim));
  for (auto& row : p)
    for (auto& v : row) v = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
  return p;
}

TEST(KMeans, InertiaNeverIncreases) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = dense_matrix(random_points(rng, 40, 5));
    const auto c = kmeans(m, 1 + rng.below(8), rng.next());
    ASSERT_FALSE(c.inertia_trace.empty());
    for (std::size_t i = 1; i < c.inertia_trace.size(); ++i)
      EXPECT_LE(c.inertia_trace[i], c.inertia_trace[i - 1] + 1e-12);
    EXPECT_NEAR(c.inertia, c.inertia_trace.back(), 1e-12);
  }
}

TEST(KMeans, ThreadCountIndependent) {
  Rng rng(23);
  const auto m = dense_matrix(random_points(rng, 300, 8));
  KMeansOptions one, many;
  many.threads = 8;
  const auto a = kmeans(m, 7, 42, one), b = kmeans(m, 7, 42, many);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_EQ(a.centroids.values, b.centroids.values);
  MiniBatchOptions mb1, mb8;
  mb1.batch_size = mb8.batch_size = 50;
  mb8.threads = 8;
  const auto c = minibatch_kmeans(m, 7, 42, mb1), d = minibatch_kmeans(m, 7, 42, mb8);
  EXPECT_EQ(c.assignments, d.assignments);
  EXPECT_EQ(c.inertia, d.inertia);
}

TEST(KMeans, SeedDeterminism) {
  Rng rng(29);
  const auto m = dense_matrix(random_points(rng, 100, 4));
  EXPECT_EQ(kmeans(m, 5, 1).assignments, kmeans(m, 5, 1).assignments);
}

// Orthogonal groups of identical unit rows: the layout of the unshuffled
// synthetic corpus.
FeatureMatrix orthogonal_blocks(std::size_t groups, std::size_t per_group, std::vector<std::size_t>& truth) {
  std::vector<std::size_t> ids(groups * per_group);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  FeatureMatrix m(groups, ids);
  truth.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t g = (i * 7919) % groups;  // interleave groups
    m.push_row({{g, 1.0}});
    truth.push_back(g);
  }
  return m;
}

TEST(KMeans, RecoversOrthogonalBlocks) {
  std::vector<std::size_t> truth;
  const auto m = orthogonal_blocks(32, 20, truth);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = kmeans(m, 32, seed);
    EXPECT_TRUE(same_partition(c.assignments, truth)) << "seed " << seed;
    EXPECT_EQ(c.inertia, 0.0);
  }
}

TEST(MiniBatch, FullBatchMatchesKMeansPartition) {
  std::vector<std::size_t> truth;
  const auto m = orthogonal_blocks(27, 20, truth);
  MiniBatchOptions opt;
  opt.batch_size = m.rows();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mb = minibatch_kmeans(m, 27, seed, opt);
    const auto km = kmeans(m, 27, seed);
    EXPECT_TRUE(same_partition(mb.assignments, truth));
    EXPECT_LE(mb.inertia, 1.10 * km.inertia + 1e-12);
  }
}

TEST(MiniBatch, SmallBatchesStillSeparate) {
  const auto m = dense_matrix({{0.0}, {0.1}, {0.2}, {10.0}, {10.1}, {10.2}});
  MiniBatchOptions opt;
  opt.batch_size = 2;
  opt.iterations = 50;
  const auto c = minibatch_kmeans(m, 2, 3, opt);
  EXPECT_TRUE(same_partition(c.assignments, {0, 0, 0, 1, 1, 1}));
}

TEST(Agglomerative, BlockMatrix) {
  const auto dm = matrix_from({{0, 0.1, 0.9, 0.9}, {0.1, 0, 0.9, 0.9}, {0.9, 0.9, 0, 0.1}, {0.9, 0.9, 0.1, 0}});
  for (auto link : {Linkage::Average, Linkage::Complete}) {
    const auto c = agglomerative(dm, 2, link);
    EXPECT_EQ(c.assignments, (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_EQ(c.merge_heights, (std::vector<double>{0.1, 0.1}));
  }
}

TEST(Agglomerative, LinkageDiffers) {
  // Points on a line at 0, 1, 3, 7: average and complete merge heights differ.
  std::vector<double> x{0, 1, 3, 7};
  std::vector<std::vector<double>> d(4, std::vector<double>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d[i][j] = std::abs(x[i] - x[j]);
  const auto dm = matrix_from(d);
  const auto avg = agglomerative(dm, 1, Linkage::Average);
  const auto comp = agglomerative(dm, 1, Linkage::Complete);
  EXPECT_EQ(avg.merge_heights, (std::vector<double>{1.0, 2.5, 17.0 / 3.0}));
  EXPECT_EQ(comp.merge_heights, (std::vector<double>{1.0, 3.0, 7.0}));
}

TEST(Agglomerative, KEqualsNIsIdentity) {
  const auto dm = matrix_from({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  EXPECT_EQ(agglomerative(dm, 3).assignments, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(agglomerative(dm, 1).assignments, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_THROW(agglomerative(dm, 4), ConfigError);
}

TEST(Agglomerative, TiesMergeLowestIndicesFirst) {
  const auto dm = matrix_from({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  EXPECT_EQ(agglomerative(dm, 2).assignments, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(Silhouette, PerfectSeparation) {
  const auto m = dense_matrix({{0.0}, {0.01}, {10.0}, {10.01}});
  const auto c = kmeans(m, 2, 0);
  EXPECT_GT(feature_silhouette(m, c), 0.99);
}

TEST(Silhouette, ThreeEquidistantPointsInTwoClusters) {
  const auto dm = matrix_from({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  Clustering c;
  c.k = 2;
  c.assignments = {0, 0, 1};
  c.item_ids = {0, 1, 2};
  EXPECT_DOUBLE_EQ(feature_silhouette(dm, c), 0.0);
}

TEST(Silhouette, KBelowTwoIsError) {
  const auto dm = matrix_from({{0, 1}, {1, 0}});
  Clustering c;
  c.k = 1;
  c.assignments = {0, 0};
  c.item_ids = {0, 1};
  EXPECT_THROW(feature_silhouette(dm, c), ConfigError);
}

TEST(Silhouette, MatchesOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(20), k = 2 + rng.below(std::min<std::size_t>(n - 1, 5));
    const auto pts = random_points(rng, n, 3);
    const auto m = dense_matrix(pts);
    Clustering c;
    c.k = k;
    for (std::size_t i = 0; i < n; ++i) {
      c.assignments.push_back(i < k ? i : rng.below(k));
      c.item_ids.push_back(i);
    }
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < 3; ++t) s += (pts[i][t] - pts[j][t]) * (pts[i][t] - pts[j][t]);
        d[i][j] = std::sqrt(s);
      }
    EXPECT_NEAR(feature_silhouette(m, c, 4), silhouette_oracle(d, c.assignments, k), 1e-9);
    EXPECT_NEAR(feature_silhouette(matrix_from(d), c), silhouette_oracle(d, c.assignments, k), 1e-9);
  }
}

TEST(AdjustedRand, Examples) {
  const std::vector<std::size_t> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
  EXPECT_LT(adjusted_rand_index(a, c), 0.0);
  const std::vector<std::size_t> one{0, 0, 0};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(one, one), 1.0);
}

TEST(Names, RoundTrip) {
  for (auto a : {Algorithm::KMeans, Algorithm::MiniBatchKMeans, Algorithm::Agglomerative})
    EXPECT_EQ(algorithm_from_string(to_string(a)), a);
  EXPECT_EQ(linkage_from_string("complete"), Linkage::Complete);
  EXPECT_THROW(algorithm_from_string("dbscan"), ConfigError);
}

}  // namespace
}  // namespace swamp
