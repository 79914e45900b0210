#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcc {

inline constexpr std::size_t kMetricClasses = 4;

// counts[actual][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kMetricClasses>, kMetricClasses> counts{};

  std::size_t total() const;
  std::size_t trace() const;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

// One-vs-rest ratios for one class; nullopt where the denominator is zero.
struct ClassMetrics {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> false_positive_rate;
  std::optional<double> f1;
};

struct MetricsReport {
  double accuracy = 0.0;
  // Unweighted means over the classes where each ratio is defined; NaN when
  // no class defines it.
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double false_positive_rate = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  ConfusionMatrix confusion;
  std::array<ClassMetrics, kMetricClasses> per_class;
  std::vector<std::string> flags;  // undefined per-class ratios, skipped AUC classes
};

MetricsReport derive_metrics(const ConfusionMatrix& confusion);

// Rank-based binary AUC: fraction of (positive, negative) pairs ordered
// correctly, ties counting one half. nullopt when either side is empty.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const bool> positive);

struct AucResult {
  double auc = 0.0;  // NaN when no class could be scored
  std::array<std::optional<double>, kMetricClasses> per_class;
  std::vector<std::string> flags;
};

// Macro one-vs-rest AUC. scores is row-major [samples×kMetricClasses] with
// rows summing to 1 within 1e-6.
AucResult roc_auc(std::span<const double> scores, std::span<const int> labels);

// `key=value` lines with 6 decimals, then the confusion matrix as 4 rows of
// 4 space-separated integers.
std::string format_report(const MetricsReport& report);

}  // namespace pcc
