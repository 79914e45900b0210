#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "pcc/geom.hpp"
#include "pcc/kernels.hpp"
#include "support/oracles.hpp"

namespace pcc {
namespace {

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PointCloud c(n);
  for (auto& p : c) p = {u(rng), u(rng), u(rng)};
  return c;
}

PointCloud line_cloud() { return {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {10, 0, 0}}; }

bool contains(const PointCloud& c, const Point3& p) { return std::find(c.begin(), c.end(), p) != c.end(); }

Point3 centroid(const PointCloud& c) {
  Point3 s{0, 0, 0};
  for (const auto& p : c) s = s + p;
  const double n = static_cast<double>(c.size());
  return {s.x / n, s.y / n, s.z / n};
}

double max_radius(const PointCloud& c) {
  double r = 0;
  for (const auto& p : c) r = std::max(r, std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z));
  return r;
}

TEST(Resample, DownsampleKeepsMembers) {
  std::mt19937_64 rng(1);
  const auto cloud = random_cloud(7000, rng);
  const auto out = resample_to_fixed_size(cloud, 5000, 9);
  ASSERT_EQ(out.size(), 5000u);
  std::set<std::tuple<double, double, double>> in;
  for (const auto& p : cloud) in.insert({p.x, p.y, p.z});
  std::set<std::tuple<double, double, double>> seen;
  for (const auto& p : out) {
    EXPECT_TRUE(in.count({p.x, p.y, p.z}));
    seen.insert({p.x, p.y, p.z});
  }
  EXPECT_EQ(seen.size(), 5000u);  // without replacement
}

TEST(Resample, EqualSizeIsIdentity) {
  std::mt19937_64 rng(2);
  const auto cloud = random_cloud(5000, rng);
  EXPECT_EQ(resample_to_fixed_size(cloud, 5000, 3), cloud);
}

TEST(Resample, UpsampleStaysNearInput) {
  const PointCloud cloud{{0, 0, 0}, {1, 0, 0}, {0, 5, 0}};
  const auto out = resample_to_fixed_size(cloud, 10, 4);
  ASSERT_EQ(out.size(), 10u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out[i], cloud[i]);
  for (const auto& p : out) {
    double nearest = 1e9;
    for (const auto& q : cloud) nearest = std::min(nearest, oracle::dist(p, q));
    EXPECT_LT(nearest, 0.01);
  }
}

TEST(Resample, RandomizedSweepHitsTarget) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 600);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = size(rng), target = size(rng);
    EXPECT_EQ(resample_to_fixed_size(random_cloud(n, rng), target, rng()).size(), target);
  }
}

TEST(Resample, RejectsEmptyAndZeroTarget) {
  EXPECT_THROW(resample_to_fixed_size({}, 4, 0), std::invalid_argument);
  EXPECT_THROW(resample_to_fixed_size({{0, 0, 0}}, 0, 0), std::invalid_argument);
}

TEST(Resample, SameSeedSameOutput) {
  std::mt19937_64 rng(6);
  const auto cloud = random_cloud(40, rng);
  EXPECT_EQ(resample_to_fixed_size(cloud, 100, 77), resample_to_fixed_size(cloud, 100, 77));
  EXPECT_EQ(resample_to_fixed_size(cloud, 10, 77), resample_to_fixed_size(cloud, 10, 77));
}

TEST(Normalize, UnitCubeCorners) {
  PointCloud cube;
  for (int i = 0; i < 8; ++i) cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  const auto out = normalize_unit_sphere(cube);
  const auto c = centroid(out);
  EXPECT_NEAR(c.x, 0, 1e-9);
  EXPECT_NEAR(c.y, 0, 1e-9);
  EXPECT_NEAR(c.z, 0, 1e-9);
  EXPECT_NEAR(max_radius(out), 1.0, 1e-9);
  // Corner (0,0,0) lands at -(0.5,0.5,0.5)/(sqrt(3)/2).
  EXPECT_NEAR(out[0].x, -1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Normalize, IdempotentAndDegenerate) {
  std::mt19937_64 rng(7);
  const auto once = normalize_unit_sphere(random_cloud(50, rng, 30.0));
  const auto twice = normalize_unit_sphere(once);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(oracle::dist(once[i], twice[i]), 0.0, 1e-9);
  const auto zeros = normalize_unit_sphere(PointCloud(6, Point3{2.5, -1, 4}));
  for (const auto& p : zeros) EXPECT_EQ(p, (Point3{0, 0, 0}));
}

TEST(Fps, HandExamples) {
  const auto line = line_cloud();
  EXPECT_EQ(farthest_point_sampling(line, 3, 0), (std::vector<std::size_t>{0, 4, 3}));
  for (std::size_t s = 0; s < line.size(); ++s) EXPECT_EQ(farthest_point_sampling(line, 1, s), (std::vector<std::size_t>{s}));
  auto all = farthest_point_sampling(line, 5, 2);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(farthest_point_sampling(line, 6, 0), std::invalid_argument);
  EXPECT_THROW(farthest_point_sampling(line, 2, 5), std::out_of_range);
}

TEST(Fps, MatchesBruteForceOracle) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  for (int trial = 0; trial < 60; ++trial) {
    auto cloud = random_cloud(size(rng), rng);
    if (trial % 3 == 0) {
      // Integer grid coordinates force exact distance ties.
      for (auto& p : cloud) p = {std::round(p.x * 2), std::round(p.y * 2), std::round(p.z * 2)};
    }
    const std::size_t seed = rng() % cloud.size();
    for (std::size_t k = 1; k <= cloud.size(); ++k) {
      ASSERT_EQ(farthest_point_sampling(cloud, k, seed), oracle::fps(cloud, k, seed)) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Fps, MinPairwiseDistanceNonIncreasing) {
  std::mt19937_64 rng(9);
  const auto cloud = random_cloud(64, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= cloud.size(); ++k) {
    const auto idx = farthest_point_sampling(cloud, k, 0);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) m = std::min(m, oracle::dist(cloud[idx[a]], cloud[idx[b]]));
    }
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(Fps, ParallelMatchesSerial) {
  std::mt19937_64 rng(10);
  const auto cloud = random_cloud(20000, rng);
  EXPECT_EQ(kernels::farthest_point_sampling(cloud, 200, 17), kernels::serial::farthest_point_sampling(cloud, 200, 17));
}

TEST(BallQuery, HandExamples) {
  const auto line = line_cloud();
  const std::vector<std::size_t> c1{1};
  auto g = ball_query(line, c1, 1.5, 8);
  EXPECT_EQ(g.neighbors[0], (std::vector<std::size_t>{1, 0, 2}));

  std::vector<std::size_t> all(line.size());
  std::iota(all.begin(), all.end(), 0);
  g = ball_query(line, all, 100.0, 10);
  for (const auto& n : g.neighbors) EXPECT_EQ(std::set<std::size_t>(n.begin(), n.end()).size(), line.size());

  g = ball_query(line, all, 0.5, 10);
  for (std::size_t c = 0; c < all.size(); ++c) EXPECT_EQ(g.neighbors[c], (std::vector<std::size_t>{c}));

  const std::vector<std::size_t> bad{9};
  EXPECT_THROW(ball_query(line, bad, 1.0, 4), std::out_of_range);
  EXPECT_THROW(ball_query(line, c1, 0.0, 4), std::invalid_argument);
}

TEST(KnnQuery, HandExamples) {
  const auto line = line_cloud();
  const std::vector<std::size_t> c3{3};
  EXPECT_EQ(knn_query(line, c3, 3).neighbors[0], (std::vector<std::size_t>{3, 2, 1}));
  EXPECT_EQ(knn_query(line, c3, 1).neighbors[0], (std::vector<std::size_t>{3}));
  auto all = knn_query(line, c3, 5).neighbors[0];
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(knn_query(line, c3, 6), std::invalid_argument);
}

TEST(NeighborGraph, OffsetsAreExactDifferences) {
  std::mt19937_64 rng(11);
  const auto cloud = random_cloud(100, rng);
  const auto centers = farthest_point_sampling(cloud, 20, canonical_seed_index(cloud));
  for (const auto& g : {ball_query(cloud, centers, 0.4, 12), knn_query(cloud, centers, 7)}) {
    ASSERT_EQ(g.centers, centers);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      ASSERT_FALSE(g.neighbors[c].empty());
      for (std::size_t e = 0; e < g.neighbors[c].size(); ++e) {
        EXPECT_EQ(g.offsets[c][e], cloud[g.neighbors[c][e]] - cloud[centers[c]]);
      }
    }
  }
}

TEST(NeighborGraph, IndependentOfPointOrder) {
  std::mt19937_64 rng(12);
  const auto cloud = random_cloud(80, rng);
  std::vector<std::size_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PointCloud shuffled(cloud.size());
  std::vector<std::size_t> where(cloud.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled[i] = cloud[perm[i]];
    where[perm[i]] = i;
  }
  const std::vector<std::size_t> centers{0, 5, 33, 79};
  std::vector<std::size_t> moved;
  for (auto c : centers) moved.push_back(where[c]);
  // Continuous random coordinates have no distance ties, so lists map exactly.
  for (int mode = 0; mode < 2; ++mode) {
    const auto a = mode == 0 ? ball_query(cloud, centers, 0.6, 10) : knn_query(cloud, centers, 9);
    const auto b = mode == 0 ? ball_query(shuffled, moved, 0.6, 10) : knn_query(shuffled, moved, 9);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      ASSERT_EQ(a.neighbors[c].size(), b.neighbors[c].size());
      for (std::size_t e = 0; e < a.neighbors[c].size(); ++e) EXPECT_EQ(where[a.neighbors[c][e]], b.neighbors[c][e]);
    }
  }
}

TEST(NearestWithin, ParallelMatchesSerial) {
  std::mt19937_64 rng(13);
  const auto cloud = random_cloud(3000, rng);
  const auto centers = farthest_point_sampling(cloud, 300, 0);
  EXPECT_EQ(kernels::nearest_within(cloud, centers, 0.09, 32), kernels::serial::nearest_within(cloud, centers, 0.09, 32));
}

TEST(CanonicalOrder, SortsLexicographically) {
  const PointCloud c{{1, 0, 0}, {0, 2, 0}, {0, 1, 5}, {0, 1, 4}};
  EXPECT_EQ(canonical_seed_index(c), 3u);
  EXPECT_EQ(canonical_order(c), (PointCloud{{0, 1, 4}, {0, 1, 5}, {0, 2, 0}, {1, 0, 0}}));
}

TEST(Conversion, TensorRoundTrip) {
  std::mt19937_64 rng(14);
  const auto cloud = random_cloud(9, rng);
  const auto t = to_tensor(cloud);
  EXPECT_EQ(t.shape(), (Shape{9, 3}));
  EXPECT_EQ(to_cloud(t), cloud);
  EXPECT_TRUE(all_finite(cloud));
  EXPECT_FALSE(all_finite({{0, std::nan(""), 0}}));
}

}  // namespace
}  // namespace pcc
