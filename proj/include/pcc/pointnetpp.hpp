#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcc/geom.hpp"
#include "pcc/nn.hpp"
#include "pcc/pointnet.hpp"
#include "pcc/tensor.hpp"

namespace pcc {

enum class Grouping { kRadius, kKnn };
enum class InitialFeatures { kPositions, kOnes };

struct SetAbstractionConfig {
  std::size_t num_centers = 64;
  Grouping grouping = Grouping::kRadius;
  double radius = 0.25;
  std::size_t max_neighbors = 16;
  std::size_t k = 16;                       // used when grouping == kKnn
  std::vector<std::size_t> mlp_widths{32, 64};  // per-edge MLP after the d_in + 3 input
};

struct SetAbstractionLayer {
  SetAbstractionConfig config;
  Mlp mlp;  // input width d_in + 3
};

struct PointNetPPConfig {
  std::vector<SetAbstractionConfig> layers{
      {64, Grouping::kRadius, 0.25, 16, 16, {32, 64}},
      {16, Grouping::kRadius, 0.5, 16, 16, {64, 128}},
  };
  std::vector<std::size_t> head_widths{64};
  InitialFeatures initial_features = InitialFeatures::kPositions;
  std::size_t num_classes = kNumClasses;
};

struct PointNetPPParams {
  PointNetPPConfig config;
  std::vector<SetAbstractionLayer> layers;
  Mlp head;

  std::vector<Tensor> parameters() const;
};

PointNetPPParams init_pointnetpp(const PointNetPPConfig& config, std::uint64_t seed);

// One aggregation step over a fixed neighborhood graph:
//   out[c] = max over j in N(c) of MLP(features[j] ; positions[j] - positions[center c])
// Offsets are taken from `positions` so gradients reach them.
Tensor aggregate_neighborhoods(const Mlp& mlp, const Tensor& positions, const Tensor& features,
                               const NeighborGraph& graph);

struct SetAbstractionOutput {
  Tensor positions;  // [m×3]
  Tensor features;   // [m×d']
  NeighborGraph graph;
};

// FPS (seeded at the lexicographically smallest point) picks the centers, the
// configured grouping builds N(i), then aggregate_neighborhoods.
SetAbstractionOutput set_abstraction(const SetAbstractionLayer& layer, const Tensor& positions,
                                     const Tensor& features);

Tensor pointnetpp_forward(const PointNetPPParams& params, const Tensor& cloud);

struct LayerTrace {
  std::vector<std::size_t> centers;
  std::vector<std::vector<std::size_t>> neighbors;
  Shape input_features;
  Shape output_features;
};

std::vector<LayerTrace> build_hierarchy_trace(const PointNetPPParams& params, const Tensor& cloud);

}  // namespace pcc
