#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcc/rng.hpp"
#include "pcc/tensor.hpp"

namespace pcc {

// Affine map on rows: x[n×in] · weight[in×out] + bias[out].
struct Linear {
  Tensor weight;
  Tensor bias;

  std::size_t in_features() const { return weight.shape()[0]; }
  std::size_t out_features() const { return weight.shape()[1]; }
};

// Stack of Linear layers with ReLU between them (and optionally after the last).
struct Mlp {
  std::vector<Linear> layers;

  std::size_t in_features() const { return layers.front().in_features(); }
  std::size_t out_features() const { return layers.back().out_features(); }
  std::vector<std::size_t> widths() const;
};

// He-style uniform init, U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero bias.
Linear make_linear(std::size_t in, std::size_t out, Rng& rng);
// widths = {in, hidden..., out}; at least two entries.
Mlp make_mlp(std::span<const std::size_t> widths, Rng& rng);

Tensor linear_forward(const Linear& layer, const Tensor& x);
Tensor mlp_forward(const Mlp& mlp, const Tensor& x, bool relu_last);

void append_parameters(const Linear& layer, std::vector<Tensor>& out);
void append_parameters(const Mlp& mlp, std::vector<Tensor>& out);

}  // namespace pcc
