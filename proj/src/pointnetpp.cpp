#include "pcc/pointnetpp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcc {
namespace {

NeighborGraph group(const PointCloud& cloud, std::span<const std::size_t> centers, const SetAbstractionConfig& c) {
  return c.grouping == Grouping::kRadius ? ball_query(cloud, centers, c.radius, c.max_neighbors)
                                         : knn_query(cloud, centers, c.k);
}

Tensor initial_features(const PointNetPPConfig& config, const Tensor& cloud) {
  if (config.initial_features == InitialFeatures::kPositions) return cloud;
  return Tensor({cloud.shape()[0], 1}, std::vector<double>(cloud.shape()[0], 1.0));
}

std::size_t initial_width(const PointNetPPConfig& config) {
  return config.initial_features == InitialFeatures::kPositions ? 3 : 1;
}

void check_cloud(const PointNetPPParams& params, const Tensor& cloud) {
  if (cloud.rank() != 2 || cloud.shape()[1] != 3) {
    throw std::invalid_argument("pointnetpp: expected cloud [n×3], got " + shape_to_string(cloud.shape()));
  }
  const std::size_t need = params.layers.front().config.num_centers;
  if (cloud.shape()[0] < need) {
    throw std::invalid_argument("pointnetpp: cloud has " + std::to_string(cloud.shape()[0]) +
                                " points, first layer needs " + std::to_string(need));
  }
  for (double v : cloud.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("pointnetpp: non-finite input coordinate");
  }
}

}  // namespace

std::vector<Tensor> PointNetPPParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& l : layers) append_parameters(l.mlp, out);
  append_parameters(head, out);
  return out;
}

PointNetPPParams init_pointnetpp(const PointNetPPConfig& config, std::uint64_t seed) {
  if (config.layers.empty()) throw std::invalid_argument("pointnetpp: need at least one set abstraction layer");
  Rng rng(seed);
  PointNetPPParams p;
  p.config = config;
  std::size_t d_in = initial_width(config);
  std::size_t prev_centers = 0;
  for (const auto& c : config.layers) {
    if (c.num_centers == 0 || c.mlp_widths.empty()) {
      throw std::invalid_argument("pointnetpp: layer needs centers and MLP widths");
    }
    if (prev_centers != 0 && c.num_centers > prev_centers) {
      throw std::invalid_argument("pointnetpp: layer asks for " + std::to_string(c.num_centers) +
                                  " centers from " + std::to_string(prev_centers));
    }
    std::vector<std::size_t> widths{d_in + 3};
    widths.insert(widths.end(), c.mlp_widths.begin(), c.mlp_widths.end());
    p.layers.push_back({c, make_mlp(widths, rng)});
    d_in = c.mlp_widths.back();
    prev_centers = c.num_centers;
  }
  std::vector<std::size_t> head{d_in};
  head.insert(head.end(), config.head_widths.begin(), config.head_widths.end());
  head.push_back(config.num_classes);
  p.head = make_mlp(head, rng);
  return p;
}

Tensor aggregate_neighborhoods(const Mlp& mlp, const Tensor& positions, const Tensor& features,
                               const NeighborGraph& graph) {
  if (features.rank() != 2 || features.shape()[0] != positions.shape()[0]) {
    throw std::invalid_argument("aggregate_neighborhoods: features " + shape_to_string(features.shape()) +
                                " do not match positions " + shape_to_string(positions.shape()));
  }
  if (mlp.in_features() != features.shape()[1] + 3) {
    throw std::invalid_argument("aggregate_neighborhoods: MLP input width " + std::to_string(mlp.in_features()) +
                                " != feature width + 3 = " + std::to_string(features.shape()[1] + 3));
  }
  std::vector<std::size_t> sources, owners, starts{0};
  sources.reserve(graph.edge_count());
  owners.reserve(graph.edge_count());
  for (std::size_t c = 0; c < graph.centers.size(); ++c) {
    if (graph.neighbors[c].empty()) throw std::invalid_argument("aggregate_neighborhoods: empty neighbor list");
    for (std::size_t j : graph.neighbors[c]) {
      sources.push_back(j);
      owners.push_back(graph.centers[c]);
    }
    starts.push_back(sources.size());
  }
  Tensor offsets = sub(gather_rows(positions, sources), gather_rows(positions, owners));
  Tensor edges = concat_rows(gather_rows(features, sources), offsets);
  return segment_max(mlp_forward(mlp, edges, true), starts);
}

SetAbstractionOutput set_abstraction(const SetAbstractionLayer& layer, const Tensor& positions,
                                     const Tensor& features) {
  const std::size_t n = positions.shape()[0];
  if (n < layer.config.num_centers) {
    throw std::invalid_argument("set_abstraction: " + std::to_string(n) + " points cannot supply " +
                                std::to_string(layer.config.num_centers) + " centers");
  }
  if (features.rank() != 2 || features.shape()[0] != n) {
    throw std::invalid_argument("set_abstraction: feature rows " + shape_to_string(features.shape()) +
                                " do not match " + std::to_string(n) + " positions");
  }
  const PointCloud cloud = to_cloud(positions);
  const auto centers = farthest_point_sampling(cloud, layer.config.num_centers, canonical_seed_index(cloud));
  NeighborGraph graph = group(cloud, centers, layer.config);
  Tensor out = aggregate_neighborhoods(layer.mlp, positions, features, graph);
  return {gather_rows(positions, centers), out, std::move(graph)};
}

Tensor pointnetpp_forward(const PointNetPPParams& params, const Tensor& cloud) {
  check_cloud(params, cloud);
  Tensor positions = cloud;
  Tensor features = initial_features(params.config, cloud);
  for (const auto& layer : params.layers) {
    auto out = set_abstraction(layer, positions, features);
    positions = out.positions;
    features = out.features;
  }
  Tensor logits = mlp_forward(params.head, max_over_rows(features), false);
  return reshape(logits, {logits.size()});
}

std::vector<LayerTrace> build_hierarchy_trace(const PointNetPPParams& params, const Tensor& cloud) {
  check_cloud(params, cloud);
  std::vector<LayerTrace> trace;
  Tensor positions = cloud.detach();
  Tensor features = initial_features(params.config, positions);
  for (const auto& layer : params.layers) {
    Shape in_shape = features.shape();
    auto out = set_abstraction(layer, positions, features);
    trace.push_back({out.graph.centers, out.graph.neighbors, std::move(in_shape), out.features.shape()});
    positions = out.positions;
    features = out.features;
  }
  return trace;
}

}  // namespace pcc
