#include "specsense/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specsense/error.hpp"
#include "specsense/rng.hpp"
#include "specsense/simd/kernels.hpp"

namespace specsense::nn {
namespace {

void check_view(const Network<float>& net, LabeledView v) {
  const std::size_t len = static_cast<std::size_t>(net.spec().input_length);
  if (v.features.size() != v.size() * len)
    throw DomainError("feature buffer holds " + std::to_string(v.features.size()) + " values, expected " +
                      std::to_string(v.size() * len));
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(derive_seed(seed, SeedDomain::shuffle, {static_cast<std::uint64_t>(epoch)}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

struct Batch {
  std::vector<float> x;
  std::vector<Label> y;
};

void gather(LabeledView data, std::span<const std::size_t> idx, std::size_t len, Batch& b) {
  b.x.resize(idx.size() * len);
  b.y.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(data.features.begin() + static_cast<std::ptrdiff_t>(idx[i] * len), len,
                b.x.begin() + static_cast<std::ptrdiff_t>(i * len));
    b.y[i] = data.labels[idx[i]];
  }
}

double validation_loss(Network<float>& net, const ModelParams& params, LabeledView data, double* acc) {
  const auto conf = infer(net, params, data.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const Label guess = conf[i].signal > conf[i].noise ? Label::signal : Label::noise;
    hits += guess == data.labels[i];
  }
  *acc = static_cast<double>(hits) / static_cast<double>(conf.size());
  return mean_loss(conf, data.labels);
}

}  // namespace

void TrainingHyper::validate() const {
  if (!(initial_lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epoch count must be at least 1");
  if (decay_every < 1) throw ConfigError("decay interval must be at least 1 epoch");
  if (validation_interval < 1) throw ConfigError("validation interval must be at least 1 iteration");
}

double learning_rate_at(const TrainingHyper& hyper, int epoch) {
  if (epoch < 0) throw DomainError("negative epoch");
  return hyper.initial_lr * std::pow(hyper.lr_decay, epoch / hyper.decay_every);
}

void sgd_step(ModelParams& params, ModelParams& velocity, const ModelParams& grads, double lr, double momentum) {
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.info[i].trainable()) continue;
    k.sgd_momentum(params.values[i].data(), velocity.values[i].data(), grads.values[i].data(),
                   params.values[i].size(), static_cast<float>(lr), static_cast<float>(momentum));
  }
}

double accuracy(Network<float>& net, const ModelParams& params, LabeledView data) {
  check_view(net, data);
  if (data.size() == 0) throw DomainError("accuracy of an empty set");
  double acc = 0.0;
  validation_loss(net, params, data, &acc);
  return acc;
}

TrainingResult train(Network<float>& net, ModelParams init, LabeledView train_set, LabeledView validation_set,
                     const TrainingHyper& hyper, std::uint64_t seed, const ProgressFn& progress) {
  hyper.validate();
  net.check_compatible(init);
  check_view(net, train_set);
  check_view(net, validation_set);
  if (train_set.size() == 0) throw DomainError("empty training set");

  const std::size_t len = static_cast<std::size_t>(net.spec().input_length);
  const std::size_t bs = static_cast<std::size_t>(hyper.batch_size);
  TrainingResult result;
  ModelParams params = std::move(init);
  ModelParams velocity = params.zeros_like();
  ModelParams grads = params.zeros_like();
  Batch batch;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  std::int64_t iteration = 0;
  bool have_best = false;

  auto checkpoint = [&](int epoch, double lr) {
    HistoryPoint h;
    h.iteration = iteration;
    h.epoch = epoch;
    h.learning_rate = lr;
    h.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    loss_sum = 0.0;
    loss_count = 0;
    if (validation_set.size() > 0) {
      h.validation_loss = validation_loss(net, params, validation_set, &h.validation_accuracy);
      if (!have_best || h.validation_accuracy > result.best_validation_accuracy) {
        have_best = true;
        result.best_validation_accuracy = h.validation_accuracy;
        result.best_iteration = iteration;
        result.params = params;
      }
    }
    result.history.push_back(h);
    if (progress) progress(h);
  };

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const double lr = learning_rate_at(hyper, epoch);
    const auto order = permutation(train_set.size(), seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      // a single-example batch has no batch statistics to normalize with
      if (n < 2 && order.size() >= 2) continue;
      gather(train_set, std::span(order).subspan(start, n), len, batch);
      ++iteration;
      net.forward(params, batch.x, static_cast<int>(n), Mode::train,
                  derive_seed(seed, SeedDomain::dropout, {static_cast<std::uint64_t>(iteration)}));
      const double loss = net.backward(params, batch.y, grads);
      if (!std::isfinite(loss) || !grads.all_finite()) throw TrainingFailure("non-finite loss", iteration);
      net.update_running_stats(params, hyper.bn_momentum);
      sgd_step(params, velocity, grads, lr, hyper.momentum);
      if (!params.all_finite()) throw TrainingFailure("non-finite parameters", iteration);
      loss_sum += loss;
      ++loss_count;
      if (iteration % hyper.validation_interval == 0) checkpoint(epoch, lr);
    }
  }
  if (result.history.empty() || result.history.back().iteration != iteration)
    checkpoint(hyper.epochs - 1, learning_rate_at(hyper, hyper.epochs - 1));
  result.iterations = iteration;
  if (!have_best) {
    result.params = params;
    result.best_iteration = iteration;
  }
  result.last_params = std::move(params);
  return result;
}

ModelParams finetune(Network<float>& net, const ModelParams& params, LabeledView data, const FinetuneHyper& hyper,
                     std::uint64_t seed) {
  if (hyper.epochs < 1) throw DomainError("fine-tuning needs at least one epoch");
  if (hyper.batch_size < 1) throw DomainError("batch size must be at least 1");
  if (hyper.learning_rate < 0.0) throw DomainError("learning rate must be non-negative");
  net.check_compatible(params);
  check_view(net, data);
  ModelParams out = params;
  if (data.size() == 0) return out;

  const std::size_t len = static_cast<std::size_t>(net.spec().input_length);
  const std::size_t bs = static_cast<std::size_t>(hyper.batch_size);
  ModelParams velocity = out.zeros_like();
  ModelParams grads = out.zeros_like();
  Batch batch;
  std::int64_t iteration = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto order = permutation(data.size(), seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      gather(data, std::span(order).subspan(start, n), len, batch);
      ++iteration;
      net.forward(out, batch.x, static_cast<int>(n), Mode::finetune,
                  derive_seed(seed, SeedDomain::dropout, {static_cast<std::uint64_t>(iteration)}));
      const double loss = net.backward(out, batch.y, grads);
      if (!std::isfinite(loss) || !grads.all_finite()) throw TrainingFailure("non-finite fine-tuning loss", iteration);
      sgd_step(out, velocity, grads, hyper.learning_rate, hyper.momentum);
    }
  }
  return out;
}

}  // namespace specsense::nn
