#include "pcc/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pcc {

std::vector<std::size_t> Mlp::widths() const {
  std::vector<std::size_t> w;
  if (layers.empty()) return w;
  w.push_back(in_features());
  for (const auto& l : layers) w.push_back(l.out_features());
  return w;
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  if (in == 0 || out == 0) throw std::invalid_argument("make_linear: zero width");
  const double limit = std::sqrt(6.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> w(in * out);
  for (double& v : w) v = dist(rng);
  Linear layer{Tensor({in, out}, std::move(w)), Tensor(Shape{out})};
  layer.weight.set_requires_grad();
  layer.bias.set_requires_grad();
  return layer;
}

Mlp make_mlp(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2) throw std::invalid_argument("make_mlp: need input and output widths");
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) mlp.layers.push_back(make_linear(widths[i], widths[i + 1], rng));
  return mlp;
}

Tensor linear_forward(const Linear& layer, const Tensor& x) {
  const Tensor rows = x.rank() == 2 ? x : reshape(x, {1, x.size()});
  return add_bias(matmul(rows, layer.weight), layer.bias);
}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x, bool relu_last) {
  Tensor h = x;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    h = linear_forward(mlp.layers[i], h);
    if (relu_last || i + 1 < mlp.layers.size()) h = relu(h);
  }
  return h;
}

void append_parameters(const Linear& layer, std::vector<Tensor>& out) {
  out.push_back(layer.weight);
  out.push_back(layer.bias);
}

void append_parameters(const Mlp& mlp, std::vector<Tensor>& out) {
  for (const auto& l : mlp.layers) append_parameters(l, out);
}

}  // namespace pcc
