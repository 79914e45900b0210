#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcc/pointnet.hpp"
#include "pcc/pointnetpp.hpp"

namespace pcc {

enum class ModelKind : std::uint8_t { kPointNet = 0, kPointNetPP = 1 };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ArchitectureConfig {
  PointNetConfig pointnet;
  PointNetPPConfig pointnetpp;
};

class Model {
 public:
  Model(PointNetParams params) : params_(std::move(params)) {}      // NOLINT
  Model(PointNetPPParams params) : params_(std::move(params)) {}    // NOLINT

  static Model create(ModelKind kind, const ArchitectureConfig& arch, std::uint64_t seed);

  ModelKind kind() const;
  std::vector<Tensor> parameters() const;

  struct Output {
    Tensor logits;
    std::optional<Tensor> transform;  // PointNet only
  };
  Output forward(const Tensor& cloud) const;

  // Smallest cloud the model can take.
  std::size_t min_points() const;

  const PointNetParams* pointnet() const { return std::get_if<PointNetParams>(&params_); }
  const PointNetPPParams* pointnetpp() const { return std::get_if<PointNetPPParams>(&params_); }

 private:
  std::variant<PointNetParams, PointNetPPParams> params_;
};

}  // namespace pcc
