#include "specsense/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>

#include "specsense/error.hpp"
#include "specsense/rng.hpp"

namespace specsense::nn {

ConfidencePair softmax2(double z_signal, double z_noise) noexcept {
  const double m = std::max(z_signal, z_noise);
  const double es = std::exp(z_signal - m);
  const double en = std::exp(z_noise - m);
  return {es / (es + en), en / (es + en)};
}

double cross_entropy(const ConfidencePair& p, Label truth) noexcept {
  const double pt = truth == Label::signal ? p.signal : p.noise;
  return -std::log(pt + kLossEpsilon);
}

template <typename T>
Network<T>::Network(ArchitectureSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  ParamRegistry reg;
  Shape s{1, spec_.input_length};
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const std::string prefix = "l" + std::to_string(i);
    auto push = [&](std::unique_ptr<Layer<T>> layer) {
      s = layer->output_shape();
      layers_.push_back(std::move(layer));
    };
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, ConvSpec>) {
            push(std::make_unique<Conv1d<T>>(reg, prefix + ".conv", s, l.channels, l.kernel, l.stride));
            if (spec_.batch_norm) push(std::make_unique<BatchNorm<T>>(reg, prefix + ".bn", s));
            push(std::make_unique<Relu<T>>(s));
          } else if constexpr (std::is_same_v<L, MaxPoolSpec>) {
            push(std::make_unique<MaxPool<T>>(s, l.kernel, l.stride));
          } else if constexpr (std::is_same_v<L, ResidualSpec>) {
            push(std::make_unique<ResidualBlock<T>>(reg, prefix, s, l.channels, l.downsample, spec_.block_kernel,
                                                    spec_.batch_norm));
          } else if constexpr (std::is_same_v<L, GlobalAvgPoolSpec>) {
            push(std::make_unique<GlobalAvgPool<T>>(s));
          } else if constexpr (std::is_same_v<L, DenseSpec>) {
            push(std::make_unique<Dense<T>>(reg, prefix + ".fc", s, l.units));
            if (l.relu) push(std::make_unique<Relu<T>>(s));
          } else if constexpr (std::is_same_v<L, DropoutSpec>) {
            push(std::make_unique<Dropout<T>>(s, l.p, i));
          }
        },
        spec_.layers[i]);
  }
  tensors_ = reg.tensors();
  acts_.resize(layers_.size() + 1);
  grads_.resize(layers_.size() + 1);
}

template <typename T>
ParamSet<T> Network<T>::initialize(std::uint64_t seed) const {
  ParamSet<T> p;
  p.info = tensors_;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const TensorInfo& t = tensors_[i];
    std::vector<T> v(t.count(), T(0));
    switch (t.role) {
      case TensorRole::weight: {
        CounterRng rng(derive_seed(seed, SeedDomain::init, {i}));
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / std::max(1, t.fan_in)));
        for (auto& x : v) x = static_cast<T>(dist(rng));
        break;
      }
      case TensorRole::norm_scale:
      case TensorRole::running_var:
        std::fill(v.begin(), v.end(), T(1));
        break;
      default:
        break;
    }
    p.values.push_back(std::move(v));
  }
  return p;
}

template <typename T>
void Network<T>::check_compatible(const ParamSet<T>& params) const {
  if (params.info.size() != tensors_.size() || params.values.size() != tensors_.size())
    throw DomainError("parameter set has " + std::to_string(params.info.size()) + " tensors, architecture needs " +
                      std::to_string(tensors_.size()));
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const TensorInfo& a = tensors_[i];
    const TensorInfo& b = params.info[i];
    if (a.name != b.name || a.shape != b.shape || a.role != b.role || params.values[i].size() != a.count())
      throw DomainError("tensor " + std::to_string(i) + " (" + b.name + ") does not match architecture tensor " +
                        a.name);
  }
}

template <typename T>
void Network<T>::forward(const ParamSet<T>& params, std::span<const T> inputs, int batch, Mode mode,
                         std::uint64_t dropout_seed) {
  const std::size_t len = static_cast<std::size_t>(spec_.input_length);
  if (batch <= 0 || inputs.size() != len * static_cast<std::size_t>(batch))
    throw DomainError("forward expects batch * " + std::to_string(len) + " input values");
  if (params.values.size() != tensors_.size()) throw DomainError("parameters do not belong to this network");
  acts_[0].resize(1, batch, spec_.input_length);
  std::copy(inputs.begin(), inputs.end(), acts_[0].data.begin());
  const ForwardContext ctx{mode, dropout_seed};
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->forward(params, acts_[i], acts_[i + 1], ctx);
  have_cache_ = true;
  last_mode_ = mode;
}

template <typename T>
std::vector<ConfidencePair> Network<T>::confidences() const {
  if (!have_cache_) throw StateError("confidences requested before forward");
  const Activation<T>& z = acts_.back();
  std::vector<ConfidencePair> out(static_cast<std::size_t>(z.batch));
  for (int b = 0; b < z.batch; ++b) out[static_cast<std::size_t>(b)] = softmax2(z.row(0)[b], z.row(1)[b]);
  return out;
}

double mean_loss(std::span<const ConfidencePair> p, std::span<const Label> labels) {
  if (p.empty()) throw DomainError("loss of an empty batch");
  if (labels.size() != p.size()) throw DomainError("label count does not match batch");
  double sum = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) sum += cross_entropy(p[b], labels[b]);
  return sum / static_cast<double>(p.size());
}

template <typename T>
double Network<T>::loss(std::span<const Label> labels) const {
  return mean_loss(confidences(), labels);
}

template <typename T>
double Network<T>::backward(const ParamSet<T>& params, std::span<const Label> labels, ParamSet<T>& grads) {
  if (!have_cache_ || last_mode_ == Mode::infer) throw StateError("backward needs a train or finetune forward");
  const auto p = confidences();
  if (labels.size() != p.size()) throw DomainError("label count does not match batch");
  if (grads.values.size() != tensors_.size()) grads = params.zeros_like();
  grads.zero();

  const int batch = static_cast<int>(p.size());
  Activation<T>& dz = grads_.back();
  dz.resize(2, batch, 1);
  double sum = 0.0;
  for (int b = 0; b < batch; ++b) {
    const ConfidencePair& q = p[static_cast<std::size_t>(b)];
    const int y = static_cast<int>(labels[static_cast<std::size_t>(b)]);
    const double pj[2] = {q.signal, q.noise};
    const double py = pj[y];
    sum += cross_entropy(q, labels[static_cast<std::size_t>(b)]);
    for (int j = 0; j < 2; ++j) {
      const double delta = j == y ? 1.0 : 0.0;
      dz.row(j)[b] = static_cast<T>(-py * (delta - pj[j]) / (py + kLossEpsilon) / batch);
    }
  }
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Activation<T>* din = i == 0 ? nullptr : &grads_[i];
    layers_[i]->backward(params, acts_[i], acts_[i + 1], grads_[i + 1], din, grads);
  }
  return sum / batch;
}

template <typename T>
void Network<T>::update_running_stats(ParamSet<T>& params, double momentum) {
  for (auto& l : layers_) l->update_running_stats(params, momentum);
}

template <typename T>
std::vector<Shape> Network<T>::activation_shapes() const {
  std::vector<Shape> out{{1, spec_.input_length}};
  for (const auto& l : layers_) out.push_back(l->output_shape());
  return out;
}

template class Network<float>;
template class Network<double>;

std::vector<ConfidencePair> infer(Network<float>& net, const ParamSet<float>& params, std::span<const float> features,
                                  std::size_t batch) {
  const std::size_t len = static_cast<std::size_t>(net.spec().input_length);
  if (features.size() % len != 0) throw DomainError("feature buffer is not a whole number of vectors");
  const std::size_t n = features.size() / len;
  std::vector<ConfidencePair> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t b = std::min(batch, n - start);
    net.forward(params, features.subspan(start * len, b * len), static_cast<int>(b), Mode::infer);
    const auto c = net.confidences();
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

}  // namespace specsense::nn
