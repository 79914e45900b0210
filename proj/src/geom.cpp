#include "pcc/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "pcc/rng.hpp"

namespace pcc {
namespace {

bool lex_less(const Point3& a, const Point3& b) {
  return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
}

NeighborGraph assemble(const PointCloud& cloud, std::span<const std::size_t> centers,
                       std::vector<std::vector<std::size_t>> neighbors) {
  NeighborGraph graph;
  graph.centers.assign(centers.begin(), centers.end());
  graph.offsets.resize(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (neighbors[c].empty()) neighbors[c].push_back(centers[c]);
    const Point3 origin = cloud[centers[c]];
    graph.offsets[c].reserve(neighbors[c].size());
    for (std::size_t j : neighbors[c]) graph.offsets[c].push_back(cloud[j] - origin);
  }
  graph.neighbors = std::move(neighbors);
  return graph;
}

void check_centers(const PointCloud& cloud, std::span<const std::size_t> centers) {
  for (std::size_t c : centers) {
    if (c >= cloud.size()) {
      throw std::out_of_range("center index " + std::to_string(c) + " out of range for cloud of " +
                              std::to_string(cloud.size()) + " points");
    }
  }
}

}  // namespace

std::size_t NeighborGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& list : neighbors) n += list.size();
  return n;
}

PointCloud resample_to_fixed_size(const PointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (cloud.empty()) throw std::invalid_argument("resample_to_fixed_size: empty cloud");
  if (target == 0) throw std::invalid_argument("resample_to_fixed_size: target must be at least 1");
  const std::size_t n = cloud.size();
  if (n == target) return cloud;

  Rng rng(seed);
  if (n > target) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < target; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(target);
    std::sort(order.begin(), order.end());
    PointCloud out;
    out.reserve(target);
    for (std::size_t i : order) out.push_back(cloud[i]);
    return out;
  }

  PointCloud out = cloud;
  out.reserve(target);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> jitter(0.0, kUpsampleJitter);
  while (out.size() < target) {
    const Point3& p = cloud[pick(rng)];
    const double dx = jitter(rng);
    const double dy = jitter(rng);
    const double dz = jitter(rng);
    out.push_back({p.x + dx, p.y + dy, p.z + dz});
  }
  return out;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.empty()) return {};
  const bool coincident =
      std::all_of(cloud.begin(), cloud.end(), [&](const Point3& p) { return p == cloud.front(); });
  if (coincident) return PointCloud(cloud.size(), Point3{});

  Point3 centroid;
  for (const auto& p : cloud) centroid = centroid + p;
  const double inv = 1.0 / static_cast<double>(cloud.size());
  centroid = {centroid.x * inv, centroid.y * inv, centroid.z * inv};

  PointCloud out;
  out.reserve(cloud.size());
  double radius = 0.0;
  for (const auto& p : cloud) {
    out.push_back(p - centroid);
    radius = std::max(radius, squared_distance(out.back(), Point3{}));
  }
  radius = std::sqrt(radius);
  for (auto& p : out) p = {p.x / radius, p.y / radius, p.z / radius};
  return out;
}

std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t k, std::size_t seed_index) {
  if (k == 0) throw std::invalid_argument("farthest_point_sampling: k must be at least 1");
  if (k > cloud.size()) {
    throw std::invalid_argument("farthest_point_sampling: k = " + std::to_string(k) + " exceeds " +
                                std::to_string(cloud.size()) + " points");
  }
  if (seed_index >= cloud.size()) {
    throw std::out_of_range("farthest_point_sampling: seed index " + std::to_string(seed_index) +
                            " out of range");
  }
  return kernels::farthest_point_sampling(cloud, k, seed_index);
}

std::size_t canonical_seed_index(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("canonical_seed_index: empty cloud");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cloud.size(); ++i)
    if (lex_less(cloud[i], cloud[best])) best = i;
  return best;
}

NeighborGraph ball_query(const PointCloud& cloud, std::span<const std::size_t> centers, double radius,
                         std::size_t max_neighbors) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_query: radius must be positive");
  if (max_neighbors == 0) throw std::invalid_argument("ball_query: max_neighbors must be at least 1");
  check_centers(cloud, centers);
  return assemble(cloud, centers, kernels::nearest_within(cloud, centers, radius * radius, max_neighbors));
}

NeighborGraph knn_query(const PointCloud& cloud, std::span<const std::size_t> centers, std::size_t k) {
  if (k == 0) throw std::invalid_argument("knn_query: k must be at least 1");
  if (k > cloud.size()) {
    throw std::invalid_argument("knn_query: k = " + std::to_string(k) + " exceeds " +
                                std::to_string(cloud.size()) + " points");
  }
  check_centers(cloud, centers);
  return assemble(cloud, centers,
                  kernels::nearest_within(cloud, centers, std::numeric_limits<double>::infinity(), k));
}

PointCloud canonical_order(PointCloud cloud) {
  std::stable_sort(cloud.begin(), cloud.end(), lex_less);
  return cloud;
}

Tensor to_tensor(const PointCloud& cloud) {
  std::vector<double> data;
  data.reserve(cloud.size() * 3);
  for (const auto& p : cloud) {
    data.push_back(p.x);
    data.push_back(p.y);
    data.push_back(p.z);
  }
  return Tensor({cloud.size(), 3}, std::move(data));
}

PointCloud to_cloud(const Tensor& t) {
  if (t.rank() != 2 || t.shape()[1] != 3) {
    throw std::invalid_argument("to_cloud: expected [n×3], got " + shape_to_string(t.shape()));
  }
  PointCloud out(t.shape()[0]);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {t.data()[3 * i], t.data()[3 * i + 1], t.data()[3 * i + 2]};
  return out;
}

bool all_finite(const PointCloud& cloud) {
  return std::all_of(cloud.begin(), cloud.end(), [](const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
  });
}

}  // namespace pcc
