#include "pcc/model.hpp"

#include <stdexcept>

namespace pcc {

std::string_view model_kind_name(ModelKind kind) {
  return kind == ModelKind::kPointNet ? "pointnet" : "pointnetpp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "pointnet") return ModelKind::kPointNet;
  if (name == "pointnetpp") return ModelKind::kPointNetPP;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "' (expected pointnet or pointnetpp)");
}

Model Model::create(ModelKind kind, const ArchitectureConfig& arch, std::uint64_t seed) {
  if (kind == ModelKind::kPointNet) return Model(init_pointnet(arch.pointnet, seed));
  return Model(init_pointnetpp(arch.pointnetpp, seed));
}

ModelKind Model::kind() const {
  return std::holds_alternative<PointNetParams>(params_) ? ModelKind::kPointNet : ModelKind::kPointNetPP;
}

std::vector<Tensor> Model::parameters() const {
  return std::visit([](const auto& p) { return p.parameters(); }, params_);
}

Model::Output Model::forward(const Tensor& cloud) const {
  if (const auto* p = pointnet()) {
    auto out = pointnet_forward(*p, cloud);
    return {out.logits, out.transform};
  }
  return {pointnetpp_forward(*pointnetpp(), cloud), std::nullopt};
}

std::size_t Model::min_points() const {
  if (const auto* p = pointnetpp()) return p->config.layers.front().num_centers;
  return 1;
}

}  // namespace pcc
