#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pcc/tensor.hpp"

namespace pcc {

// A scalar-valued function of tensors. It is called both under a recording
// tape (for the analytic gradient) and without one (for finite differences).
using ScalarFn = std::function<Tensor()>;

// Compares the tape gradient of f with central differences, perturbing the
// elements of x in place. Returns the max over checked elements of
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// When `entries` is non-empty only those flat indices are perturbed.
double grad_check(const ScalarFn& f, Tensor& x, double step, std::span<const std::size_t> entries = {});

// Same check across several tensors with a single analytic pass.
// max_entries_per_tensor == 0 checks every element; otherwise a fixed-stride
// subset of at most that many elements per tensor.
double grad_check(const ScalarFn& f, std::span<Tensor> xs, double step, std::size_t max_entries_per_tensor = 0);

}  // namespace pcc
