#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcc/kernels.hpp"
#include "pcc/tensor.hpp"

namespace pcc {

using PointCloud = std::vector<Point3>;

// N(i) for a set of centers drawn from one source cloud. offsets[c][e] is
// points[neighbors[c][e]] - points[centers[c]].
struct NeighborGraph {
  std::vector<std::size_t> centers;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<Point3>> offsets;

  std::size_t edge_count() const;
};

inline constexpr std::size_t kDefaultTargetPoints = 5000;
inline constexpr double kUpsampleJitter = 0.001;

// Brings a cloud to exactly `target` points: a uniform subset without
// replacement when larger, the original points plus jittered duplicates when
// smaller, the input unchanged when equal.
PointCloud resample_to_fixed_size(const PointCloud& cloud, std::size_t target, std::uint64_t seed);

// Centers on the centroid and scales so the farthest point sits at radius 1.
// A cloud whose points all coincide maps to the origin.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t k,
                                                 std::size_t seed_index = 0);

// Index of the lexicographically smallest (x, y, z); lowest index on ties.
std::size_t canonical_seed_index(const PointCloud& cloud);

NeighborGraph ball_query(const PointCloud& cloud, std::span<const std::size_t> centers, double radius,
                         std::size_t max_neighbors);
NeighborGraph knn_query(const PointCloud& cloud, std::span<const std::size_t> centers, std::size_t k);

// Sorts points lexicographically. Used before any seeded step so results do
// not depend on the order points were stored in.
PointCloud canonical_order(PointCloud cloud);

Tensor to_tensor(const PointCloud& cloud);
PointCloud to_cloud(const Tensor& t);

bool all_finite(const PointCloud& cloud);

}  // namespace pcc
