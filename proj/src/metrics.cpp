#include "pcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace pcc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_class(int c, const char* what) {
  if (c < 0 || c >= static_cast<int>(kMetricClasses)) {
    throw std::invalid_argument(std::string("confusion: ") + what + " " + std::to_string(c) + " out of range");
  }
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

double macro(const std::array<ClassMetrics, kMetricClasses>& per_class,
             std::optional<double> ClassMetrics::*field) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& m : per_class) {
    if (const auto& v = m.*field) {
      total += *v;
      ++n;
    }
  }
  return n == 0 ? kNaN : total / static_cast<double>(n);
}

void append_value(std::string& out, const char* key, double value) {
  char buf[64];
  if (std::isnan(value)) {
    std::snprintf(buf, sizeof(buf), "%s=nan\n", key);
  } else {
    std::snprintf(buf, sizeof(buf), "%s=%.6f\n", key, value);
  }
  out += buf;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n = std::accumulate(row.begin(), row.end(), n);
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < kMetricClasses; ++c) n += counts[c][c];
  return n;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_class(labels[i], "label");
    check_class(predictions[i], "prediction");
    ++m.counts[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])];
  }
  return m;
}

MetricsReport derive_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw std::invalid_argument("derive_metrics: empty confusion matrix");
  MetricsReport r;
  r.confusion = cm;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

  for (std::size_t c = 0; c < kMetricClasses; ++c) {
    ClassMetrics& m = r.per_class[c];
    for (std::size_t k = 0; k < kMetricClasses; ++k) {
      if (k == c) continue;
      m.fn += cm.counts[c][k];
      m.fp += cm.counts[k][c];
    }
    m.tp = cm.counts[c][c];
    m.tn = total - m.tp - m.fn - m.fp;
    m.sensitivity = ratio(m.tp, m.tp + m.fn);
    m.specificity = ratio(m.tn, m.tn + m.fp);
    // Complement form keeps specificity + FPR == 1 exactly.
    if (m.specificity) m.false_positive_rate = 1.0 - *m.specificity;
    m.precision = ratio(m.tp, m.tp + m.fp);
    if (m.precision && m.sensitivity) {
      const double s = *m.precision + *m.sensitivity;
      m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.sensitivity / s : 0.0;
    }
    const std::string tag = "class " + std::to_string(c) + ": ";
    if (!m.sensitivity) r.flags.push_back(tag + "sensitivity undefined (no actual samples)");
    if (!m.specificity) r.flags.push_back(tag + "specificity undefined (no negative samples)");
    if (!m.precision) r.flags.push_back(tag + "precision undefined (never predicted)");
  }
  r.sensitivity = macro(r.per_class, &ClassMetrics::sensitivity);
  r.specificity = macro(r.per_class, &ClassMetrics::specificity);
  r.precision = macro(r.per_class, &ClassMetrics::precision);
  r.false_positive_rate = macro(r.per_class, &ClassMetrics::false_positive_rate);
  r.f1 = macro(r.per_class, &ClassMetrics::f1);
  return r;
}

std::optional<double> binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("binary_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks (1-based) over tie groups, summed over positives.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += mid;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

AucResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (scores.size() != n * kMetricClasses) {
    throw std::invalid_argument("roc_auc: expected " + std::to_string(n * kMetricClasses) + " scores, got " +
                                std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    check_class(labels[i], "label");
    double row = 0.0;
    for (std::size_t c = 0; c < kMetricClasses; ++c) row += scores[i * kMetricClasses + c];
    if (std::abs(row - 1.0) > 1e-6) {
      throw std::invalid_argument("roc_auc: scores of sample " + std::to_string(i) + " sum to " +
                                  std::to_string(row));
    }
  }
  AucResult result;
  std::vector<double> column(n);
  std::unique_ptr<bool[]> positive(new bool[n]);
  double total = 0.0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < kMetricClasses; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores[i * kMetricClasses + c];
      positive[i] = labels[i] == static_cast<int>(c);
    }
    result.per_class[c] = binary_auc(column, std::span<const bool>(positive.get(), n));
    if (result.per_class[c]) {
      total += *result.per_class[c];
      ++scored;
    } else {
      result.flags.push_back("class " + std::to_string(c) + ": AUC skipped (absent from labels or no negatives)");
    }
  }
  result.auc = scored == 0 ? kNaN : total / static_cast<double>(scored);
  return result;
}

std::string format_report(const MetricsReport& r) {
  std::string out;
  append_value(out, "accuracy", r.accuracy);
  append_value(out, "sensitivity", r.sensitivity);
  append_value(out, "specificity", r.specificity);
  append_value(out, "precision", r.precision);
  append_value(out, "false_positive_rate", r.false_positive_rate);
  append_value(out, "f1", r.f1);
  append_value(out, "auc", r.auc.value_or(kNaN));
  for (const auto& row : r.confusion.counts) {
    for (std::size_t c = 0; c < kMetricClasses; ++c) {
      if (c > 0) out += ' ';
      out += std::to_string(row[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace pcc
