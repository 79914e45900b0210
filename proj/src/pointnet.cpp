#include "pcc/pointnet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcc {
namespace {

std::vector<std::size_t> with_input(std::size_t in, const std::vector<std::size_t>& tail) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), tail.begin(), tail.end());
  return w;
}

void check_cloud(const Tensor& cloud) {
  if (cloud.rank() != 2 || cloud.shape()[1] != 3) {
    throw std::invalid_argument("pointnet: expected cloud [n×3], got " + shape_to_string(cloud.shape()));
  }
  if (cloud.shape()[0] == 0) throw std::invalid_argument("pointnet: empty cloud");
}

}  // namespace

std::vector<Tensor> PointNetParams::parameters() const {
  std::vector<Tensor> out;
  append_parameters(tnet.mlp, out);
  append_parameters(tnet.to_matrix, out);
  append_parameters(shared, out);
  append_parameters(head, out);
  return out;
}

PointNetParams init_pointnet(const PointNetConfig& config, std::uint64_t seed) {
  if (config.feature_transform) {
    throw std::invalid_argument("pointnet: feature-space transform is not supported");
  }
  if (config.tnet_widths.empty() || config.mlp_widths.empty()) {
    throw std::invalid_argument("pointnet: T-Net and shared MLP need at least one layer");
  }
  if (config.num_classes < 2) throw std::invalid_argument("pointnet: need at least two classes");
  Rng rng(seed);
  PointNetParams p;
  p.config = config;
  p.tnet.mlp = make_mlp(with_input(3, config.tnet_widths), rng);
  p.tnet.to_matrix = make_linear(config.tnet_widths.back(), 9, rng);
  for (double& w : p.tnet.to_matrix.weight.mutable_data()) w = 0.0;
  auto bias = p.tnet.to_matrix.bias.mutable_data();
  for (std::size_t i = 0; i < 9; ++i) bias[i] = (i % 4 == 0) ? 1.0 : 0.0;
  p.shared = make_mlp(with_input(3, config.mlp_widths), rng);
  auto head = with_input(config.mlp_widths.back(), config.head_widths);
  head.push_back(config.num_classes);
  p.head = make_mlp(head, rng);
  return p;
}

Tensor tnet_forward(const TNet& tnet, const Tensor& cloud) {
  check_cloud(cloud);
  Tensor features = mlp_forward(tnet.mlp, cloud, true);
  Tensor pooled = max_over_rows(features);
  return reshape(linear_forward(tnet.to_matrix, pooled), {3, 3});
}

Tensor orthogonality_penalty(const Tensor& transform) {
  if (transform.rank() != 2 || transform.shape()[0] != transform.shape()[1]) {
    throw std::invalid_argument("orthogonality_penalty: expected a square matrix, got " +
                                shape_to_string(transform.shape()));
  }
  Tensor gram = matmul(transform, transpose(transform));
  Tensor residual = sub(Tensor::identity(transform.shape()[0]), gram);
  return sum(mul(residual, residual));
}

PointNetOutput pointnet_forward(const PointNetParams& params, const Tensor& cloud) {
  check_cloud(cloud);
  for (double v : cloud.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("pointnet: non-finite input coordinate");
  }
  Tensor transform = tnet_forward(params.tnet, cloud);
  Tensor aligned = matmul(cloud, transform);
  Tensor global = max_over_rows(mlp_forward(params.shared, aligned, true));
  Tensor logits = mlp_forward(params.head, global, false);
  return {reshape(logits, {logits.size()}), transform};
}

Tensor pointnet_loss(const Tensor& logits, std::span<const int> labels, std::span<const Tensor> transforms,
                     double reg_weight) {
  if (reg_weight < 0.0) throw std::invalid_argument("pointnet_loss: reg_weight must be non-negative");
  Tensor loss = softmax_cross_entropy(logits, labels);
  if (reg_weight == 0.0 || transforms.empty()) return loss;
  std::vector<Tensor> penalties;
  penalties.reserve(transforms.size());
  for (const auto& t : transforms) penalties.push_back(reshape(orthogonality_penalty(t), {1}));
  Tensor mean_penalty = scale(sum(stack_rows(penalties)), 1.0 / static_cast<double>(transforms.size()));
  return add(loss, scale(mean_penalty, reg_weight));
}

}  // namespace pcc
