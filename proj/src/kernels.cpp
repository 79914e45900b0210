#include "pcc/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>

namespace pcc::kernels {
namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

struct Best {
  double value;
  std::size_t index;
};

inline void keep_better(Best& into, const Best& other) {
  if (other.value > into.value || (other.value == into.value && other.index < into.index)) {
    into = other;
  }
}

#pragma omp declare reduction(best_of : Best : keep_better(omp_out, omp_in)) \
    initializer(omp_priv = Best{-std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max()})

std::vector<std::size_t> neighbors_of(std::span<const Point3> points, const Point3& center,
                                      double max_sq_distance, std::size_t max_neighbors) {
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double d = squared_distance(points[j], center);
    if (d <= max_sq_distance) candidates.emplace_back(d, j);
  }
  const std::size_t keep = std::min(max_neighbors, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end());
  std::vector<std::size_t> out(keep);
  for (std::size_t e = 0; e < keep; ++e) out[e] = candidates[e].second;
  return out;
}

void segment_max_one(std::span<const double> x, std::size_t d, std::size_t begin, std::size_t end,
                     double* out, std::size_t* argmax) {
  for (std::size_t c = 0; c < d; ++c) {
    out[c] = x[begin * d + c];
    argmax[c] = begin;
  }
  for (std::size_t r = begin + 1; r < end; ++r) {
    const double* row = x.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      if (row[c] > out[c]) {
        out[c] = row[c];
        argmax[c] = r;
      }
    }
  }
}

}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double* crow = pc + i * n;
    std::fill(crow, crow + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n) {
  const double* pa = a.data();
  const double* pg = g.data();
  double* pc = c.data();
  const auto rows = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork)
  for (std::int64_t pp = 0; pp < rows; ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    double* crow = pc + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = pa[i * k + p];
      const double* grow = pg + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n) {
  const double* pg = g.data();
  const double* pb = b.data();
  double* pc = c.data();
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kParallelWork)
  for (std::int64_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* grow = pg + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = pb + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      pc[i * k + p] += acc;
    }
  }
}

std::vector<std::size_t> farthest_point_sampling(std::span<const Point3> points, std::size_t k,
                                                 std::size_t seed_index) {
  const std::size_t n = points.size();
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> selected;
  selected.reserve(k);
  selected.push_back(seed_index);
  min_dist[seed_index] = -1.0;
  const auto count = static_cast<std::int64_t>(n);
  while (selected.size() < k) {
    const Point3 last = points[selected.back()];
    Best best{-std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max()};
#pragma omp parallel for schedule(static) reduction(best_of : best) if (n >= 4096)
    for (std::int64_t jj = 0; jj < count; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      if (min_dist[j] < 0.0) continue;
      const double d = squared_distance(points[j], last);
      if (d < min_dist[j]) min_dist[j] = d;
      keep_better(best, Best{min_dist[j], j});
    }
    selected.push_back(best.index);
    min_dist[best.index] = -1.0;
  }
  return selected;
}

std::vector<std::vector<std::size_t>> nearest_within(std::span<const Point3> points,
                                                     std::span<const std::size_t> centers,
                                                     double max_sq_distance,
                                                     std::size_t max_neighbors) {
  std::vector<std::vector<std::size_t>> out(centers.size());
  const auto count = static_cast<std::int64_t>(centers.size());
#pragma omp parallel for schedule(dynamic, 4) if (centers.size() * points.size() >= kParallelWork)
  for (std::int64_t cc = 0; cc < count; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    out[c] = neighbors_of(points, points[centers[c]], max_sq_distance, max_neighbors);
  }
  return out;
}

void segment_max(std::span<const double> x, std::size_t d, std::span<const std::size_t> segment_starts,
                 std::span<double> out, std::span<std::size_t> argmax) {
  const auto segments = static_cast<std::int64_t>(segment_starts.size() - 1);
#pragma omp parallel for schedule(static) if (x.size() >= kParallelWork)
  for (std::int64_t ss = 0; ss < segments; ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    segment_max_one(x, d, segment_starts[s], segment_starts[s + 1], out.data() + s * d,
                    argmax.data() + s * d);
  }
}

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += a[i * k + p] * b[p * n + j];
    }
  }
}

void matmul_at_b_acc(std::span<const double> a, std::span<const double> g, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) c[p * n + j] += a[i * k + p] * g[i * n + j];
    }
  }
}

void matmul_a_bt_acc(std::span<const double> g, std::span<const double> b, std::span<double> c,
                     std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * b[p * n + j];
      c[i * k + p] += acc;
    }
  }
}

std::vector<std::size_t> farthest_point_sampling(std::span<const Point3> points, std::size_t k,
                                                 std::size_t seed_index) {
  const std::size_t n = points.size();
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> selected{seed_index};
  taken[seed_index] = true;
  while (selected.size() < k) {
    const Point3 last = points[selected.back()];
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      min_dist[j] = std::min(min_dist[j], squared_distance(points[j], last));
      if (best == n || min_dist[j] > min_dist[best]) best = j;
    }
    selected.push_back(best);
    taken[best] = true;
  }
  return selected;
}

std::vector<std::vector<std::size_t>> nearest_within(std::span<const Point3> points,
                                                     std::span<const std::size_t> centers,
                                                     double max_sq_distance,
                                                     std::size_t max_neighbors) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(centers.size());
  for (std::size_t c : centers) out.push_back(neighbors_of(points, points[c], max_sq_distance, max_neighbors));
  return out;
}

void segment_max(std::span<const double> x, std::size_t d, std::span<const std::size_t> segment_starts,
                 std::span<double> out, std::span<std::size_t> argmax) {
  for (std::size_t s = 0; s + 1 < segment_starts.size(); ++s) {
    segment_max_one(x, d, segment_starts[s], segment_starts[s + 1], out.data() + s * d,
                    argmax.data() + s * d);
  }
}

}  // namespace serial
}  // namespace pcc::kernels
