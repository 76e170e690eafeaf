#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "specsense/nn/architecture.hpp"
#include "specsense/nn/layers.hpp"
#include "specsense/nn/params.hpp"

namespace specsense::nn {

/// Output index 0 is the signal class, index 1 the noise class.
enum class Label : std::uint8_t { signal = 0, noise = 1 };

/// Softmax outputs; signal + noise == 1.
struct ConfidencePair {
  double signal = 0.5;
  double noise = 0.5;
};

/// -log(p_true + 1e-12).
double cross_entropy(const ConfidencePair& p, Label truth) noexcept;
/// Mean cross-entropy; throws DomainError for an empty or mismatched batch.
double mean_loss(std::span<const ConfidencePair> p, std::span<const Label> labels);
ConfidencePair softmax2(double z_signal, double z_noise) noexcept;

constexpr double kLossEpsilon = 1e-12;

template <typename T>
class Network {
 public:
  explicit Network(ArchitectureSpec spec);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  const std::vector<TensorInfo>& tensors() const noexcept { return tensors_; }

  /// He-normal weights, zero biases, unit scales, identity running statistics.
  ParamSet<T> initialize(std::uint64_t seed) const;
  /// Throws DomainError when names, shapes or roles differ from this architecture.
  void check_compatible(const ParamSet<T>& params) const;

  /// `inputs` holds batch consecutive feature vectors of spec().input_length values.
  void forward(const ParamSet<T>& params, std::span<const T> inputs, int batch, Mode mode,
               std::uint64_t dropout_seed = 0);
  std::vector<ConfidencePair> confidences() const;
  const Activation<T>& logits() const noexcept { return acts_.back(); }

  /// Mean cross-entropy of the last forward pass against labels.
  double loss(std::span<const Label> labels) const;
  /// Overwrites grads with the gradient of the mean loss; returns the loss.
  /// Requires a preceding forward in train or finetune mode.
  double backward(const ParamSet<T>& params, std::span<const Label> labels, ParamSet<T>& grads);
  void update_running_stats(ParamSet<T>& params, double momentum = 0.1);

  /// Shapes after every primitive layer, starting from the input.
  std::vector<Shape> activation_shapes() const;

 private:
  ArchitectureSpec spec_;
  std::vector<TensorInfo> tensors_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<Activation<T>> acts_;   // acts_[0] input, acts_[i+1] output of layers_[i]
  std::vector<Activation<T>> grads_;  // grads_[i] gradient w.r.t. acts_[i]
  bool have_cache_ = false;
  Mode last_mode_ = Mode::infer;
};

/// Signal/noise confidences for n feature vectors, evaluated in inference mode in chunks.
std::vector<ConfidencePair> infer(Network<float>& net, const ParamSet<float>& params,
                                  std::span<const float> features, std::size_t batch = 256);

}  // namespace specsense::nn
