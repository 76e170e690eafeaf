#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "specsense/nn/architecture.hpp"
#include "specsense/nn/params.hpp"

namespace specsense::nn {

/// Activations are channel-major: row c holds batch*length values, example b at offset b*length.
template <typename T>
struct Activation {
  int channels = 0;
  int batch = 0;
  int length = 0;
  std::vector<T> data;

  void resize(int c, int b, int l) {
    channels = c;
    batch = b;
    length = l;
    data.resize(static_cast<std::size_t>(c) * static_cast<std::size_t>(b) * static_cast<std::size_t>(l));
  }
  std::size_t row_size() const noexcept { return static_cast<std::size_t>(batch) * static_cast<std::size_t>(length); }
  T* row(int c) noexcept { return data.data() + static_cast<std::size_t>(c) * row_size(); }
  const T* row(int c) const noexcept { return data.data() + static_cast<std::size_t>(c) * row_size(); }
  Shape shape() const noexcept { return {channels, length}; }
};

/// train: batch statistics + dropout; infer: running statistics, no dropout;
/// finetune: running statistics (frozen) + dropout.
enum class Mode { train, infer, finetune };

struct ForwardContext {
  Mode mode = Mode::infer;
  std::uint64_t dropout_seed = 0;
};

class ParamRegistry {
 public:
  std::size_t add(std::string name, std::vector<int> shape, TensorRole role, int fan_in = 1);
  const std::vector<TensorInfo>& tensors() const noexcept { return tensors_; }

 private:
  std::vector<TensorInfo> tensors_;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Shape output_shape() const = 0;
  virtual void forward(const ParamSet<T>& params, const Activation<T>& in, Activation<T>& out,
                       const ForwardContext& ctx) = 0;
  /// Accumulates parameter gradients into `grads`; writes the input gradient when din != nullptr.
  /// Must follow a forward call on the same input in train or finetune mode.
  virtual void backward(const ParamSet<T>& params, const Activation<T>& in, const Activation<T>& out,
                        const Activation<T>& dout, Activation<T>* din, ParamSet<T>& grads) = 0;
  virtual void update_running_stats(ParamSet<T>& /*params*/, double /*momentum*/) {}
};

template <typename T>
class Conv1d final : public Layer<T> {
 public:
  Conv1d(ParamRegistry& reg, const std::string& prefix, Shape in, int channels, int kernel, int stride);
  Shape output_shape() const override { return out_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;

 private:
  Shape in_, out_;
  int kernel_, stride_, pad_;
  std::size_t weight_, bias_;
  std::vector<T> cols_;
  std::vector<T> dcols_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(ParamRegistry& reg, const std::string& prefix, Shape in);
  Shape output_shape() const override { return shape_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;
  void update_running_stats(ParamSet<T>& params, double momentum) override;

  static constexpr double kEpsilon = 1e-5;

 private:
  Shape shape_;
  std::size_t gamma_, beta_, mean_, var_;
  Mode mode_ = Mode::infer;
  std::vector<T> xhat_;
  std::vector<double> inv_std_, batch_mean_, batch_var_;
  std::size_t batch_n_ = 0;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  explicit Relu(Shape in) : shape_(in) {}
  Shape output_shape() const override { return shape_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;

 private:
  Shape shape_;
};

/// Max pooling with -inf padding of kernel/2 on each side.
template <typename T>
class MaxPool final : public Layer<T> {
 public:
  MaxPool(Shape in, int kernel, int stride);
  Shape output_shape() const override { return out_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;

 private:
  Shape in_, out_;
  int kernel_, stride_, pad_;
  std::vector<std::int32_t> argmax_;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
 public:
  explicit GlobalAvgPool(Shape in) : in_(in) {}
  Shape output_shape() const override { return {in_.channels, 1}; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;

 private:
  Shape in_;
};

/// Fully connected over the flattened (channel, position) features of each example.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(ParamRegistry& reg, const std::string& prefix, Shape in, int units);
  Shape output_shape() const override { return {units_, 1}; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;

 private:
  Shape in_;
  int units_;
  std::size_t weight_, bias_;
  std::vector<T> flat_;   // (C*L) x B
  std::vector<T> dflat_;
};

/// Inverted dropout; the mask is a pure function of (dropout_seed, layer salt, element index).
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(Shape in, double p, std::uint64_t salt) : shape_(in), p_(p), salt_(salt) {}
  Shape output_shape() const override { return shape_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;
  const std::vector<T>& mask() const noexcept { return mask_; }

 private:
  Shape shape_;
  double p_;
  std::uint64_t salt_;
  std::vector<T> mask_;  // 0 or 1/(1-p); empty when inactive
};

/// Two convolutions on the main path plus an identity or stride-2 projection shortcut,
/// summed and passed through ReLU.
template <typename T>
class ResidualBlock final : public Layer<T> {
 public:
  ResidualBlock(ParamRegistry& reg, const std::string& prefix, Shape in, int channels, bool downsample,
                int kernel, bool batch_norm);
  Shape output_shape() const override { return out_; }
  void forward(const ParamSet<T>&, const Activation<T>&, Activation<T>&, const ForwardContext&) override;
  void backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>&,
                Activation<T>*, ParamSet<T>&) override;
  void update_running_stats(ParamSet<T>& params, double momentum) override;

 private:
  Shape in_, out_;
  std::vector<std::unique_ptr<Layer<T>>> main_;
  std::vector<std::unique_ptr<Layer<T>>> shortcut_;  // empty for identity
  std::vector<Activation<T>> main_acts_;             // outputs of main_[i]
  std::vector<Activation<T>> short_acts_;
  std::vector<Activation<T>> main_grads_, short_grads_;
  Activation<T> dsum_;
};

}  // namespace specsense::nn
