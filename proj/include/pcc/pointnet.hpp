#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcc/nn.hpp"
#include "pcc/tensor.hpp"

namespace pcc {

inline constexpr std::size_t kNumClasses = 4;
inline constexpr double kDefaultRegWeight = 0.001;

struct PointNetConfig {
  std::vector<std::size_t> tnet_widths{32, 64};       // shared MLP after the 3 input channels
  std::vector<std::size_t> mlp_widths{64, 128, 256};  // shared per-point MLP
  std::vector<std::size_t> head_widths{128};          // hidden widths before the class logits
  std::size_t num_classes = kNumClasses;
  // Reserved for a second alignment network on the 64-d features; not built.
  bool feature_transform = false;
};

// Input alignment network. The head starts at zero weights and the flattened
// identity as bias, so a fresh TNet outputs I₃ for any cloud.
struct TNet {
  Mlp mlp;
  Linear to_matrix;
};

struct PointNetParams {
  PointNetConfig config;
  TNet tnet;
  Mlp shared;
  Mlp head;

  std::vector<Tensor> parameters() const;
};

PointNetParams init_pointnet(const PointNetConfig& config, std::uint64_t seed);

// cloud[n×3] -> 3×3 transform, applied as cloud · A (row-vector convention).
Tensor tnet_forward(const TNet& tnet, const Tensor& cloud);

// ‖I − A·Aᵀ‖²_F
Tensor orthogonality_penalty(const Tensor& transform);

struct PointNetOutput {
  Tensor logits;     // [num_classes]
  Tensor transform;  // [3×3]
};

PointNetOutput pointnet_forward(const PointNetParams& params, const Tensor& cloud);

// Cross-entropy plus reg_weight times the batch-mean orthogonality penalty.
Tensor pointnet_loss(const Tensor& logits, std::span<const int> labels, std::span<const Tensor> transforms,
                     double reg_weight);

}  // namespace pcc
