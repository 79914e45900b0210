#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "pcc/dataset.hpp"

namespace pcc {
namespace {

namespace fs = std::filesystem;

struct Bounds {
  Point3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  double volume() const { return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z); }
};

Bounds bounds(const PointCloud& c) {
  Bounds b;
  for (const auto& p : c) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y), std::min(b.lo.z, p.z)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y), std::max(b.hi.z, p.z)};
  }
  return b;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pcc_dataset_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<LabeledCloud> counted(std::array<std::size_t, 4> counts) {
  std::vector<LabeledCloud> out;
  for (int c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) {
      out.push_back({{{double(i), double(c), 0}}, c});
    }
  }
  return out;
}

TEST(GenerateObject, PersonHeightBound) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (std::size_t n : {8, 64, 512}) {
      const auto b = bounds(generate_object(2, seed, n).cloud);
      const double h = b.hi.z - b.lo.z;
      EXPECT_GE(h, 1.5) << "seed " << seed << " n " << n;
      EXPECT_LE(h, 1.9) << "seed " << seed << " n " << n;
    }
  }
}

TEST(GenerateObject, DeterministicAndSized) {
  for (int label = 0; label < 4; ++label) {
    const auto a = generate_object(label, 42, 300);
    EXPECT_EQ(a.label, label);
    EXPECT_EQ(a.cloud.size(), 300u);
    EXPECT_EQ(a.cloud, generate_object(label, 42, 300).cloud);
    EXPECT_NE(a.cloud, generate_object(label, 43, 300).cloud);
  }
}

TEST(GenerateObject, TruckLargerThanPerson) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_GT(bounds(generate_object(1, seed, 64).cloud).volume(), bounds(generate_object(2, seed, 64).cloud).volume());
  }
}

TEST(GenerateObject, RejectsBadInput) {
  EXPECT_THROW(generate_object(4, 0, 100), std::invalid_argument);
  EXPECT_THROW(generate_object(-1, 0, 100), std::invalid_argument);
  EXPECT_THROW(generate_object(0, 0, 7), std::invalid_argument);
}

TEST(ExtractObjects, AllInclusiveBoxRecentersScene) {
  const PointCloud scene{{10, 10, 0}, {11, 10, 1}, {10, 12, 0.5}};
  const BoxAnnotation box{{10.5, 11, 0.5}, {100, 100, 100}, 0.0, 1};
  const auto r = extract_object_clouds(scene, {box});
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].label, 1);
  ASSERT_EQ(r.objects[0].cloud.size(), 3u);
  for (std::size_t i = 0; i < scene.size(); ++i) EXPECT_EQ(r.objects[0].cloud[i], scene[i] - box.center);
}

TEST(ExtractObjects, DisjointBoxIsReported) {
  const PointCloud scene{{0, 0, 0}, {1, 1, 1}};
  const auto r = extract_object_clouds(scene, {{{50, 50, 50}, {1, 1, 1}, 0.3, 0}});
  EXPECT_TRUE(r.objects.empty());
  EXPECT_EQ(r.skipped_boxes, (std::vector<std::size_t>{0}));
}

TEST(ExtractObjects, TwoClustersTwoBoxes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  PointCloud scene;
  for (int i = 0; i < 30; ++i) scene.push_back({u(rng), u(rng), u(rng)});
  for (int i = 0; i < 20; ++i) scene.push_back({20 + u(rng), 5 + u(rng), u(rng)});
  const std::vector<BoxAnnotation> boxes{{{0, 0, 0}, {2, 2, 2}, 0.7, 0}, {{20, 5, 0}, {2, 2, 2}, -1.1, 3}};
  const auto r = extract_object_clouds(scene, boxes);
  ASSERT_EQ(r.objects.size(), 2u);
  EXPECT_EQ(r.objects[0].cloud.size(), 30u);
  EXPECT_EQ(r.objects[1].cloud.size(), 20u);
  EXPECT_EQ(r.source_boxes, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.objects[1].label, 3);
}

// Independent containment test: project onto the box axes by hand.
bool inside_oracle(const Point3& p, const BoxAnnotation& b) {
  const double dx = p.x - b.center.x, dy = p.y - b.center.y, dz = p.z - b.center.z;
  const double along = dx * std::cos(b.yaw) + dy * std::sin(b.yaw);
  const double across = -dx * std::sin(b.yaw) + dy * std::cos(b.yaw);
  return std::abs(along) <= b.size.x / 2 && std::abs(across) <= b.size.y / 2 && std::abs(dz) <= b.size.z / 2;
}

TEST(ExtractObjects, MembershipMatchesOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5), s(0.5, 4), yaw(-3.2, 3.2);
  PointCloud scene(2000);
  for (auto& p : scene) p = {u(rng), u(rng), u(rng)};
  std::vector<BoxAnnotation> boxes;
  for (int i = 0; i < 8; ++i) boxes.push_back({{u(rng), u(rng), u(rng)}, {s(rng), s(rng), s(rng)}, yaw(rng), i % 4});
  const auto r = extract_object_clouds(scene, boxes);
  std::size_t obj = 0;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    std::size_t expected = 0;
    for (const auto& p : scene) expected += inside_oracle(p, boxes[b]);
    if (expected == 0) {
      EXPECT_NE(std::find(r.skipped_boxes.begin(), r.skipped_boxes.end(), b), r.skipped_boxes.end());
      continue;
    }
    ASSERT_LT(obj, r.objects.size());
    EXPECT_EQ(r.source_boxes[obj], b);
    EXPECT_EQ(r.objects[obj].cloud.size(), expected);
    ++obj;
  }
  EXPECT_EQ(obj, r.objects.size());
}

TEST(BalanceClasses, Counting) {
  EXPECT_EQ(class_counts(balance_classes(counted({10, 0, 10, 0}), 1)), (std::array<std::size_t, 4>{10, 0, 10, 0}));
  EXPECT_EQ(class_counts(balance_classes(counted({100, 0, 20, 0}), 1)), (std::array<std::size_t, 4>{100, 0, 100, 0}));
  EXPECT_THROW(balance_classes({}, 1), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<std::size_t, 4> c{};
    for (auto& v : c) v = rng() % 20;
    if (c == std::array<std::size_t, 4>{}) c[0] = 1;
    const auto out = class_counts(balance_classes(counted(c), rng()));
    const auto mx = *std::max_element(c.begin(), c.end());
    for (int k = 0; k < 4; ++k) EXPECT_EQ(out[k], c[k] == 0 ? 0 : mx);
  }
}

TEST(BalanceClasses, OriginalsFirstDuplicatesFromSameClass) {
  const auto data = counted({5, 2, 0, 1});
  const auto out = balance_classes(data, 9);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(out[i].cloud, data[i].cloud);
  for (std::size_t i = data.size(); i < out.size(); ++i) {
    EXPECT_EQ(out[i].cloud[0].y, double(out[i].label));
  }
}

TEST(TrainTestSplit, StratifiedAndDisjoint) {
  const auto data = counted({100, 100, 100, 100});
  const auto s = train_test_split(data, 0.2, 5);
  EXPECT_EQ(class_counts(s.test), (std::array<std::size_t, 4>{20, 20, 20, 20}));
  EXPECT_EQ(s.train.size() + s.test.size(), data.size());
  std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
  for (auto i : s.test_indices) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), data.size());
  EXPECT_EQ(train_test_split(data, 0.2, 5).test_indices, s.test_indices);
}

TEST(TrainTestSplit, ShareWithinOneSample) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<std::size_t, 4> c{};
    for (auto& v : c) v = 2 + rng() % 40;
    const double f = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto s = train_test_split(counted(c), f, rng());
    const auto t = class_counts(s.test);
    for (int k = 0; k < 4; ++k) EXPECT_LE(std::abs(double(t[k]) - f * double(c[k])), 1.0);
  }
}

TEST(TrainTestSplit, Rejections) {
  EXPECT_THROW(train_test_split(counted({1, 5, 5, 5}), 0.2, 1), std::invalid_argument);
  EXPECT_THROW(train_test_split(counted({5, 5, 5, 5}), 0.0, 1), std::invalid_argument);
  EXPECT_THROW(train_test_split(counted({5, 5, 5, 5}), 1.0, 1), std::invalid_argument);
}

TEST(CloudFile, RoundTrip) {
  const auto dir = temp_dir("roundtrip");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100, 100);
  PointCloud cloud(1000);
  for (auto& p : cloud) p = {u(rng), u(rng), u(rng)};
  save_cloud(cloud, dir / "a.txt", 3);
  const auto back = load_cloud_file(dir / "a.txt");
  ASSERT_EQ(back.cloud.size(), cloud.size());
  EXPECT_EQ(back.label, 3);
  double worst = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    worst = std::max({worst, std::abs(back.cloud[i].x - cloud[i].x), std::abs(back.cloud[i].y - cloud[i].y),
                      std::abs(back.cloud[i].z - cloud[i].z)});
  }
  EXPECT_LT(worst, 1e-6);
  save_cloud(cloud, dir / "b.txt");
  EXPECT_FALSE(load_cloud_file(dir / "b.txt").label.has_value());
}

TEST(CloudFile, Rejections) {
  EXPECT_THROW(parse_cloud(""), CloudFormatError);
  EXPECT_THROW(parse_cloud("# label 1\n"), CloudFormatError);
  try {
    parse_cloud("0 0 0\n1.0 2.0\n");
    FAIL();
  } catch (const CloudFormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_cloud("0 0 nan\n"), CloudFormatError);
  EXPECT_THROW(parse_cloud("0 0 inf\n"), CloudFormatError);
  EXPECT_THROW(parse_cloud("0 0 0 0\n"), CloudFormatError);
  EXPECT_THROW(parse_cloud("0 x 0\n"), CloudFormatError);
  EXPECT_THROW(load_cloud("/nonexistent/cloud.txt"), std::runtime_error);
  EXPECT_EQ(parse_cloud("1 2 3\n\n4 5 6").cloud.size(), 2u);
}

TEST(Manifest, RelativePaths) {
  const auto dir = temp_dir("manifest");
  write_manifest(dir / "m.txt", {"a.txt", "sub/b.txt"});
  const auto paths = read_manifest(dir / "m.txt");
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], dir / "a.txt");
  EXPECT_EQ(paths[1], dir / "sub/b.txt");
}

TEST(ClassNames, RoundTrip) {
  for (int c = 0; c < 4; ++c) EXPECT_EQ(parse_class_name(class_name(c)), c);
  EXPECT_THROW(parse_class_name("boat"), std::invalid_argument);
}

}  // namespace
}  // namespace pcc
