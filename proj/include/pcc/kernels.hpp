#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP implementation in
// pcc::kernels and a plain loop in pcc::kernels::serial. Both compute each
// output element with the same summation order, so results agree bit for bit
// regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace pcc {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

namespace kernels {

// c[m×n] = a[m×k] · b[k×n]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
// c[k×n] += aᵀ · g, a[m×k], g[m×n]
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n);
// c[m×k] += g · bᵀ, g[m×n], b[k×n]
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n);

// Greedy farthest-point selection; ties go to the lowest index.
std::vector<std::size_t> farthest_point_sampling(std::span<const Point3> points, std::size_t k,
                                                 std::size_t seed_index);

// Per center, source indices ordered by (squared distance, index), truncated to
// max_neighbors and filtered to squared distance <= max_sq_distance.
std::vector<std::vector<std::size_t>> nearest_within(std::span<const Point3> points,
                                                     std::span<const std::size_t> centers,
                                                     double max_sq_distance,
                                                     std::size_t max_neighbors);

// Column-wise max over consecutive row segments of x[rows×d]. segment_starts
// has one entry per segment plus a final entry equal to rows. Ties pick the
// lowest row. argmax holds absolute row indices.
void segment_max(std::span<const double> x, std::size_t d, std::span<const std::size_t> segment_starts,
                 std::span<double> out, std::span<std::size_t> argmax);

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n);
void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n);
std::vector<std::size_t> farthest_point_sampling(std::span<const Point3> points, std::size_t k,
                                                 std::size_t seed_index);
std::vector<std::vector<std::size_t>> nearest_within(std::span<const Point3> points,
                                                     std::span<const std::size_t> centers,
                                                     double max_sq_distance,
                                                     std::size_t max_neighbors);
void segment_max(std::span<const double> x, std::size_t d, std::span<const std::size_t> segment_starts,
                 std::span<double> out, std::span<std::size_t> argmax);

}  // namespace serial
}  // namespace kernels
}  // namespace pcc
