#include "pcc/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "pcc/rng.hpp"

namespace pcc {
namespace {

void check_grads(std::span<Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer: " + std::to_string(params.size()) + " parameters but " +
                                std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw std::invalid_argument("optimizer: parameter " + std::to_string(i) + " has shape " +
                                  shape_to_string(params[i].shape()) + " but gradient has " +
                                  shape_to_string(grads[i].shape()));
    }
  }
}

std::vector<Tensor> gradients_of(const std::vector<Tensor>& params) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.emplace_back(p.shape(), p.grad());
  return grads;
}

std::vector<Tensor> prepare_inputs(const std::vector<LabeledCloud>& data, const TrainConfig& config) {
  std::vector<Tensor> inputs;
  inputs.reserve(data.size());
  const std::uint64_t base = fork_seed(config.seed, "train/resample");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& cloud = data[i].cloud;
    if (config.points_per_cloud != 0 && cloud.size() != config.points_per_cloud) {
      inputs.push_back(to_tensor(resample_to_fixed_size(cloud, config.points_per_cloud, base + i)));
    } else {
      inputs.push_back(to_tensor(cloud));
    }
  }
  return inputs;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning rate must be a non-negative finite number");
  }
  if (batch_size == 0) throw std::invalid_argument("train: batch size must be at least 1");
  if (reg_weight < 0.0) throw std::invalid_argument("train: reg weight must be non-negative");
  if (optimizer == OptimizerKind::kAdam) {
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0)) {
      throw std::invalid_argument("train: adam needs beta1, beta2 in [0, 1) and epsilon > 0");
    }
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state, const AdamConfig& config,
               double learning_rate) {
  check_grads(params, grads);
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw std::invalid_argument("adam_step: state does not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    auto g = grads[i].data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != values.size()) throw std::invalid_argument("adam_step: state does not match parameters");
    for (std::size_t k = 0; k < values.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correct1;
      const double v_hat = v[k] / correct2;
      values[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

void sgd_step(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate) {
  check_grads(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    auto g = grads[i].data();
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= learning_rate * g[k];
  }
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, std::vector<EpochStats> history)
    : std::runtime_error("training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
      epoch_(epoch),
      history_(std::move(history)) {}

TrainResult train(ModelKind kind, const std::vector<LabeledCloud>& data, const TrainConfig& config,
                  const ArchitectureConfig& arch, const EpochCallback& on_epoch) {
  config.validate();
  return train(Model::create(kind, arch, fork_seed(config.seed, "train/init")), data, config, on_epoch);
}

TrainResult train(Model model, const std::vector<LabeledCloud>& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("train: no training data");
  const auto inputs = prepare_inputs(data, config);
  for (const auto& x : inputs) {
    if (x.shape()[0] < model.min_points()) {
      throw std::invalid_argument("train: cloud of " + std::to_string(x.shape()[0]) + " points, model needs " +
                                  std::to_string(model.min_points()));
    }
  }

  std::vector<Tensor> params = model.parameters();
  AdamState adam;
  Rng shuffle_rng(fork_seed(config.seed, "train/shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const bool regularize = model.kind() == ModelKind::kPointNet;

  std::vector<EpochStats> history;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0, penalty_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      zero_grads(params);
      Tape tape;
      TapeScope scope(tape);
      std::vector<Tensor> logits, transforms;
      std::vector<int> labels;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        auto out = model.forward(inputs[i]);
        if (argmax_class(out.logits.data()) == data[i].label) ++correct;
        if (out.transform) {
          transforms.push_back(*out.transform);
          penalty_sum += orthogonality_penalty(out.transform->detach()).item();
        }
        logits.push_back(out.logits);
        labels.push_back(data[i].label);
      }
      Tensor loss = pointnet_loss(stack_rows(logits), labels, transforms, regularize ? config.reg_weight : 0.0);
      if (!std::isfinite(loss.item())) throw TrainingDiverged(epoch, history);
      tape.backward(loss);
      loss_sum += loss.item() * static_cast<double>(end - start);
      const auto grads = gradients_of(params);
      if (config.optimizer == OptimizerKind::kAdam) {
        adam_step(params, grads, adam, config.adam, config.learning_rate);
      } else {
        sgd_step(params, grads, config.learning_rate);
      }
    }
    const double n = static_cast<double>(data.size());
    EpochStats stats{epoch, loss_sum / n, static_cast<double>(correct) / n, penalty_sum / n};
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  zero_grads(params);
  return {std::move(model), std::move(history)};
}

int argmax_class(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax_class: no values");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

Predictions predict(const Model& model, const std::vector<PointCloud>& clouds) {
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (clouds[i].size() < model.min_points() || clouds[i].empty()) {
      throw std::invalid_argument("predict: cloud " + std::to_string(i) + " has " + std::to_string(clouds[i].size()) +
                                  " points, model needs " + std::to_string(model.min_points()));
    }
    if (!all_finite(clouds[i])) throw std::invalid_argument("predict: cloud " + std::to_string(i) + " is not finite");
  }
  const std::size_t n = clouds.size();
  Predictions out;
  out.classes.assign(n, 0);
  out.probabilities.assign(n * kNumClasses, 0.0);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const Tensor logits = model.forward(to_tensor(clouds[i])).logits;
      const auto p = softmax(logits.data());
      std::copy(p.begin(), p.end(), out.probabilities.begin() + static_cast<std::ptrdiff_t>(i * kNumClasses));
      out.classes[i] = argmax_class(logits.data());
    } catch (...) {
#pragma omp critical(pcc_predict_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

MetricsReport evaluate(const Model& model, const std::vector<LabeledCloud>& test_data) {
  if (test_data.empty()) throw std::invalid_argument("evaluate: no test data");
  std::vector<PointCloud> clouds;
  std::vector<int> labels;
  clouds.reserve(test_data.size());
  for (const auto& s : test_data) {
    clouds.push_back(s.cloud);
    labels.push_back(s.label);
  }
  const auto preds = predict(model, clouds);
  MetricsReport report = derive_metrics(confusion(preds.classes, labels));
  const auto auc = roc_auc(preds.probabilities, labels);
  report.auc = auc.auc;
  report.flags.insert(report.flags.end(), auc.flags.begin(), auc.flags.end());
  return report;
}

}  // namespace pcc
