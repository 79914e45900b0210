#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcc/dataset.hpp"
#include "pcc/metrics.hpp"
#include "pcc/model.hpp"

namespace pcc {

enum class OptimizerKind { kSgd, kAdam };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamConfig adam;
  double reg_weight = kDefaultRegWeight;
  std::uint64_t seed = 0;
  // Clouds of any other size are resampled to this count; 0 keeps them as is.
  std::size_t points_per_cloud = 256;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config, double learning_rate);
void sgd_step(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double train_accuracy = 0.0;
  double mean_penalty = 0.0;  // batch-mean orthogonality penalty; 0 for PointNet++
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::vector<EpochStats> history);
  std::size_t epoch() const { return epoch_; }
  const std::vector<EpochStats>& history() const { return history_; }

 private:
  std::size_t epoch_;
  std::vector<EpochStats> history_;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Fresh model initialized from config.seed.
TrainResult train(ModelKind kind, const std::vector<LabeledCloud>& data, const TrainConfig& config,
                  const ArchitectureConfig& arch = {}, const EpochCallback& on_epoch = {});
// Continues from `model`, whose parameters are updated in place.
TrainResult train(Model model, const std::vector<LabeledCloud>& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Lowest index wins ties.
int argmax_class(std::span<const double> values);

struct Predictions {
  std::vector<int> classes;
  std::vector<double> probabilities;  // row-major [samples×classes]
};

// Pure inference; samples fan out across threads.
Predictions predict(const Model& model, const std::vector<PointCloud>& clouds);

MetricsReport evaluate(const Model& model, const std::vector<LabeledCloud>& test_data);

}  // namespace pcc
