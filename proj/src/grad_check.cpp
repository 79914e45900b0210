#include "pcc/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcc {
namespace {

std::vector<std::size_t> strided_entries(std::size_t size, std::size_t max_entries) {
  std::vector<std::size_t> out;
  if (max_entries == 0 || max_entries >= size) {
    out.resize(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = i;
    return out;
  }
  // Spread the picks across the tensor, including both ends.
  for (std::size_t e = 0; e < max_entries; ++e) {
    out.push_back(max_entries == 1 ? 0 : e * (size - 1) / (max_entries - 1));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double evaluate(const ScalarFn& f) {
  Tensor y = f();
  return y.item();
}

}  // namespace

double grad_check(const ScalarFn& f, std::span<Tensor> xs, double step, std::size_t max_entries_per_tensor) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

  std::vector<bool> previous(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    previous[t] = xs[t].requires_grad();
    xs[t].set_requires_grad(true);
    xs[t].zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor y = f();
    tape.backward(y);
    for (auto& x : xs) analytic.push_back(x.grad());
  }

  double worst = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    auto values = xs[t].mutable_data();
    for (std::size_t i : strided_entries(values.size(), max_entries_per_tensor)) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = evaluate(f);
      values[i] = saved - step;
      const double down = evaluate(f);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t][i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
    xs[t].zero_grad();
    xs[t].set_requires_grad(previous[t]);
  }
  return worst;
}

double grad_check(const ScalarFn& f, Tensor& x, double step, std::span<const std::size_t> entries) {
  if (entries.empty()) {
    std::span<Tensor> one(&x, 1);
    return grad_check(f, one, step, 0);
  }
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be positive");
  const bool previous = x.requires_grad();
  x.set_requires_grad(true);
  x.zero_grad();
  std::vector<double> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor y = f();
    tape.backward(y);
    analytic = x.grad();
  }
  double worst = 0.0;
  auto values = x.mutable_data();
  for (std::size_t i : entries) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = evaluate(f);
    values[i] = saved - step;
    const double down = evaluate(f);
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[i] - numeric) /
                                std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric)));
  }
  x.zero_grad();
  x.set_requires_grad(previous);
  return worst;
}

}  // namespace pcc
