#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "specsense/nn/network.hpp"

namespace specsense::nn {

struct TrainingHyper {
  int batch_size = 128;
  double momentum = 0.9;
  double initial_lr = 0.01;
  double lr_decay = 0.1;  // multiplied in every decay_every epochs
  int decay_every = 3;
  int epochs = 9;
  int validation_interval = 500;  // iterations
  double bn_momentum = 0.1;

  /// Throws ConfigError on lr <= 0, momentum outside [0, 1), batch_size < 1 or epochs < 1.
  void validate() const;
};

/// Learning rate used throughout 0-based epoch `epoch`.
double learning_rate_at(const TrainingHyper& hyper, int epoch);

/// Features are consecutive vectors of the network input length, one label per vector.
struct LabeledView {
  std::span<const float> features;
  std::span<const Label> labels;
  std::size_t size() const noexcept { return labels.size(); }
};

struct HistoryPoint {
  std::int64_t iteration = 0;
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean over the iterations since the previous point
  double validation_accuracy = 0.0;
  double validation_loss = 0.0;
};

struct TrainingResult {
  ModelParams params;       // snapshot with the best validation accuracy
  ModelParams last_params;  // state after the final iteration
  std::vector<HistoryPoint> history;
  std::int64_t iterations = 0;
  std::int64_t best_iteration = 0;
  double best_validation_accuracy = 0.0;
};

using ProgressFn = std::function<void(const HistoryPoint&)>;

/// v <- mu v - lr g; theta <- theta + v, on trainable tensors only.
void sgd_step(ModelParams& params, ModelParams& velocity, const ModelParams& grads, double lr, double momentum);

/// Fraction of examples whose larger softmax output matches the label.
double accuracy(Network<float>& net, const ModelParams& params, LabeledView data);

/// Minibatch SGD with momentum. The validation set is scored every validation_interval
/// iterations and after the last one. Throws TrainingFailure on a non-finite loss.
TrainingResult train(Network<float>& net, ModelParams init, LabeledView train_set, LabeledView validation_set,
                     const TrainingHyper& hyper, std::uint64_t seed, const ProgressFn& progress = {});

struct FinetuneHyper {
  double learning_rate = 1e-4;
  int epochs = 1;
  int batch_size = 128;
  double momentum = 0.9;
};

/// Same update rule as training with every layer trainable; normalization statistics stay frozen.
/// Throws DomainError for epochs < 1 or parameters from another architecture.
ModelParams finetune(Network<float>& net, const ModelParams& params, LabeledView data, const FinetuneHyper& hyper,
                     std::uint64_t seed);

}  // namespace specsense::nn
