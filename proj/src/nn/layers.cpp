#include "specsense/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specsense/error.hpp"
#include "specsense/rng.hpp"
#include "specsense/simd/gemm.hpp"
#include "specsense/simd/kernels.hpp"

namespace specsense::nn {
namespace {

using simd::MatrixView;

template <typename T>
MatrixView<T> view(const T* data, std::ptrdiff_t rs, std::ptrdiff_t cs) {
  return {data, rs, cs};
}

template <typename T>
void affine(const T* x, T* y, std::size_t n, T scale, T shift, bool relu) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().affine(x, y, n, scale, shift, relu);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const T v = scale * x[i] + shift;
      y[i] = relu && !(v > T(0)) ? T(0) : v;
    }
  }
}

template <typename T>
void sum_sumsq(const T* x, std::size_t n, double* s, double* q) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().sum_sumsq(x, n, s, q);
  } else {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += x[i];
      b += static_cast<double>(x[i]) * x[i];
    }
    *s = a;
    *q = b;
  }
}

template <typename T>
void sum_dot(const T* x, const T* y, std::size_t n, double* s, double* d) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().sum_dot(x, y, n, s, d);
  } else {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += y[i];
      b += static_cast<double>(x[i]) * y[i];
    }
    *s = a;
    *d = b;
  }
}

template <typename T>
void lincomb(const T* u, const T* v, T* out, std::size_t n, T a, T b, T c) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().lincomb(u, v, out, n, a, b, c);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * u[i] + b * v[i] + c;
  }
}

template <typename T>
void relu_backward(const T* y, T* dy, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().relu_backward(y, dy, n);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (!(y[i] > T(0))) dy[i] = T(0);
  }
}

template <typename T>
void add_into(const T* x, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    simd::kernels().axpy(1.0F, x, y, n);
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
  }
}

template <typename T>
T row_sum(const T* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return static_cast<T>(s);
}

int out_length(int len, int kernel, int stride) { return (len + 2 * (kernel / 2) - kernel) / stride + 1; }

}  // namespace

// ---------------------------------------------------------------- registry

std::size_t ParamRegistry::add(std::string name, std::vector<int> shape, TensorRole role, int fan_in) {
  for (const auto& t : tensors_)
    if (t.name == name) throw ConfigError("duplicate tensor name " + name);
  tensors_.push_back(TensorInfo{std::move(name), std::move(shape), role, fan_in});
  return tensors_.size() - 1;
}

// ---------------------------------------------------------------- conv

template <typename T>
Conv1d<T>::Conv1d(ParamRegistry& reg, const std::string& prefix, Shape in, int channels, int kernel, int stride)
    : in_(in),
      out_{channels, out_length(in.length, kernel, stride)},
      kernel_(kernel),
      stride_(stride),
      pad_(kernel / 2) {
  weight_ = reg.add(prefix + ".weight", {channels, in.channels, kernel}, TensorRole::weight, in.channels * kernel);
  bias_ = reg.add(prefix + ".bias", {channels}, TensorRole::bias);
}

template <typename T>
void Conv1d<T>::forward(const ParamSet<T>& p, const Activation<T>& in, Activation<T>& out, const ForwardContext&) {
  const int batch = in.batch;
  const int len = in_.length;
  const int lo = out_.length;
  const std::size_t blo = static_cast<std::size_t>(batch) * lo;
  const std::size_t rows = static_cast<std::size_t>(in_.channels) * kernel_;
  cols_.assign(rows * blo, T(0));
  for (int ci = 0; ci < in_.channels; ++ci) {
    const T* src = in.row(ci);
    for (int j = 0; j < kernel_; ++j) {
      T* dst = cols_.data() + (static_cast<std::size_t>(ci) * kernel_ + j) * blo;
      // valid output positions: 0 <= t*stride + j - pad < len
      const int t_lo = std::max(0, (pad_ - j + stride_ - 1) / stride_);
      const int t_hi = std::min(lo - 1, (len - 1 - j + pad_) / stride_);
      for (int b = 0; b < batch; ++b) {
        const T* s = src + static_cast<std::size_t>(b) * len;
        T* d = dst + static_cast<std::size_t>(b) * lo;
        if (stride_ == 1) {
          if (t_hi >= t_lo) std::copy(s + t_lo + j - pad_, s + t_hi + 1 + j - pad_, d + t_lo);
        } else {
          for (int t = t_lo; t <= t_hi; ++t) d[t] = s[t * stride_ + j - pad_];
        }
      }
    }
  }
  out.resize(out_.channels, batch, lo);
  const T* w = p[weight_].data();
  simd::gemm(static_cast<std::size_t>(out_.channels), blo, rows, view(w, static_cast<std::ptrdiff_t>(rows), 1),
             view(cols_.data(), static_cast<std::ptrdiff_t>(blo), 1), out.data.data(), blo, false);
  const T* bias = p[bias_].data();
  for (int co = 0; co < out_.channels; ++co) {
    T* r = out.row(co);
    const T b = bias[co];
    if (b != T(0))
      for (std::size_t i = 0; i < blo; ++i) r[i] += b;
  }
}

template <typename T>
void Conv1d<T>::backward(const ParamSet<T>& p, const Activation<T>&, const Activation<T>&, const Activation<T>& dout,
                         Activation<T>* din, ParamSet<T>& grads) {
  const int batch = dout.batch;
  const int len = in_.length;
  const int lo = out_.length;
  const std::size_t blo = static_cast<std::size_t>(batch) * lo;
  const std::size_t rows = static_cast<std::size_t>(in_.channels) * kernel_;
  if (cols_.size() != rows * blo) throw StateError("conv backward without a matching forward");

  // dW += dY * cols^T
  simd::gemm(static_cast<std::size_t>(out_.channels), rows, blo,
             view(dout.data.data(), static_cast<std::ptrdiff_t>(blo), 1),
             view(cols_.data(), 1, static_cast<std::ptrdiff_t>(blo)), grads[weight_].data(), rows, true);
  T* gb = grads[bias_].data();
  for (int co = 0; co < out_.channels; ++co) gb[co] += row_sum(dout.row(co), blo);

  if (!din) return;
  dcols_.resize(rows * blo);
  simd::gemm(rows, blo, static_cast<std::size_t>(out_.channels),
             view(p[weight_].data(), 1, static_cast<std::ptrdiff_t>(rows)),
             view(dout.data.data(), static_cast<std::ptrdiff_t>(blo), 1), dcols_.data(), blo, false);
  din->resize(in_.channels, batch, len);
  std::fill(din->data.begin(), din->data.end(), T(0));
  for (int ci = 0; ci < in_.channels; ++ci) {
    T* dst = din->row(ci);
    for (int j = 0; j < kernel_; ++j) {
      const T* src = dcols_.data() + (static_cast<std::size_t>(ci) * kernel_ + j) * blo;
      const int t_lo = std::max(0, (pad_ - j + stride_ - 1) / stride_);
      const int t_hi = std::min(lo - 1, (len - 1 - j + pad_) / stride_);
      for (int b = 0; b < batch; ++b) {
        T* d = dst + static_cast<std::size_t>(b) * len;
        const T* s = src + static_cast<std::size_t>(b) * lo;
        for (int t = t_lo; t <= t_hi; ++t) d[t * stride_ + j - pad_] += s[t];
      }
    }
  }
}

// ---------------------------------------------------------------- batch norm

template <typename T>
BatchNorm<T>::BatchNorm(ParamRegistry& reg, const std::string& prefix, Shape in) : shape_(in) {
  gamma_ = reg.add(prefix + ".gamma", {in.channels}, TensorRole::norm_scale);
  beta_ = reg.add(prefix + ".beta", {in.channels}, TensorRole::norm_shift);
  mean_ = reg.add(prefix + ".running_mean", {in.channels}, TensorRole::running_mean);
  var_ = reg.add(prefix + ".running_var", {in.channels}, TensorRole::running_var);
}

template <typename T>
void BatchNorm<T>::forward(const ParamSet<T>& p, const Activation<T>& in, Activation<T>& out,
                           const ForwardContext& ctx) {
  mode_ = ctx.mode;
  const std::size_t n = in.row_size();
  const int channels = in.channels;
  out.resize(channels, in.batch, in.length);
  inv_std_.assign(static_cast<std::size_t>(channels), 0.0);
  const bool keep_xhat = ctx.mode != Mode::infer;
  if (keep_xhat) xhat_.resize(in.data.size());
  if (ctx.mode == Mode::train) {
    batch_mean_.assign(static_cast<std::size_t>(channels), 0.0);
    batch_var_.assign(static_cast<std::size_t>(channels), 0.0);
    batch_n_ = n;
  }
  const T* gamma = p[gamma_].data();
  const T* beta = p[beta_].data();
  for (int c = 0; c < channels; ++c) {
    double mean, var;
    if (ctx.mode == Mode::train) {
      double s, q;
      sum_sumsq(in.row(c), n, &s, &q);
      mean = s / static_cast<double>(n);
      var = std::max(0.0, q / static_cast<double>(n) - mean * mean);
      batch_mean_[static_cast<std::size_t>(c)] = mean;
      batch_var_[static_cast<std::size_t>(c)] = var;
    } else {
      mean = p[mean_][static_cast<std::size_t>(c)];
      var = p[var_][static_cast<std::size_t>(c)];
    }
    const double inv = 1.0 / std::sqrt(var + kEpsilon);
    inv_std_[static_cast<std::size_t>(c)] = inv;
    const double g = gamma[c];
    if (keep_xhat) {
      T* xh = xhat_.data() + static_cast<std::size_t>(c) * n;
      affine(in.row(c), xh, n, static_cast<T>(inv), static_cast<T>(-mean * inv), false);
      affine(static_cast<const T*>(xh), out.row(c), n, gamma[c], beta[c], false);
    } else {
      affine(in.row(c), out.row(c), n, static_cast<T>(g * inv), static_cast<T>(beta[c] - g * mean * inv), false);
    }
  }
}

template <typename T>
void BatchNorm<T>::backward(const ParamSet<T>& p, const Activation<T>& in, const Activation<T>&,
                            const Activation<T>& dout, Activation<T>* din, ParamSet<T>& grads) {
  if (mode_ == Mode::infer || xhat_.size() != in.data.size())
    throw StateError("batch-norm backward needs a train or finetune forward");
  const std::size_t n = dout.row_size();
  const T* gamma = p[gamma_].data();
  T* gg = grads[gamma_].data();
  T* gbeta = grads[beta_].data();
  if (din) din->resize(dout.channels, dout.batch, dout.length);
  for (int c = 0; c < dout.channels; ++c) {
    const T* xh = xhat_.data() + static_cast<std::size_t>(c) * n;
    const T* dy = dout.row(c);
    double sum_dy, sum_dy_xh;
    sum_dot(xh, dy, n, &sum_dy, &sum_dy_xh);
    gg[c] += static_cast<T>(sum_dy_xh);
    gbeta[c] += static_cast<T>(sum_dy);
    if (!din) continue;
    const double k = gamma[c] * inv_std_[static_cast<std::size_t>(c)];
    if (mode_ == Mode::train) {
      const double inv_n = 1.0 / static_cast<double>(n);
      lincomb(dy, xh, din->row(c), n, static_cast<T>(k), static_cast<T>(-k * sum_dy_xh * inv_n),
              static_cast<T>(-k * sum_dy * inv_n));
    } else {
      lincomb(dy, xh, din->row(c), n, static_cast<T>(k), T(0), T(0));
    }
  }
}

template <typename T>
void BatchNorm<T>::update_running_stats(ParamSet<T>& p, double momentum) {
  if (mode_ != Mode::train || batch_mean_.empty()) return;
  const double unbias = batch_n_ > 1 ? static_cast<double>(batch_n_) / static_cast<double>(batch_n_ - 1) : 1.0;
  T* rm = p[mean_].data();
  T* rv = p[var_].data();
  for (std::size_t c = 0; c < batch_mean_.size(); ++c) {
    rm[c] = static_cast<T>((1.0 - momentum) * rm[c] + momentum * batch_mean_[c]);
    rv[c] = static_cast<T>((1.0 - momentum) * rv[c] + momentum * batch_var_[c] * unbias);
  }
}

// ---------------------------------------------------------------- relu

template <typename T>
void Relu<T>::forward(const ParamSet<T>&, const Activation<T>& in, Activation<T>& out, const ForwardContext&) {
  out.resize(in.channels, in.batch, in.length);
  affine(in.data.data(), out.data.data(), in.data.size(), T(1), T(0), true);
}

template <typename T>
void Relu<T>::backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>& out, const Activation<T>& dout,
                       Activation<T>* din, ParamSet<T>&) {
  if (!din) return;
  *din = dout;
  relu_backward(out.data.data(), din->data.data(), din->data.size());
}

// ---------------------------------------------------------------- max pool

template <typename T>
MaxPool<T>::MaxPool(Shape in, int kernel, int stride)
    : in_(in), out_{in.channels, out_length(in.length, kernel, stride)}, kernel_(kernel), stride_(stride), pad_(kernel / 2) {}

template <typename T>
void MaxPool<T>::forward(const ParamSet<T>&, const Activation<T>& in, Activation<T>& out, const ForwardContext&) {
  const int len = in_.length;
  const int lo = out_.length;
  out.resize(in.channels, in.batch, lo);
  argmax_.resize(out.data.size());
  std::size_t k = 0;
  for (int c = 0; c < in.channels; ++c) {
    const T* src = in.row(c);
    T* dst = out.row(c);
    for (int b = 0; b < in.batch; ++b) {
      const T* s = src + static_cast<std::size_t>(b) * len;
      for (int t = 0; t < lo; ++t, ++k) {
        T best = -std::numeric_limits<T>::infinity();
        int arg = -1;
        for (int j = 0; j < kernel_; ++j) {
          const int pos = t * stride_ + j - pad_;
          if (pos < 0 || pos >= len) continue;
          if (arg < 0 || s[pos] > best) {
            best = s[pos];
            arg = pos;
          }
        }
        dst[static_cast<std::size_t>(b) * lo + t] = best;
        argmax_[k] = b * len + arg;
      }
    }
  }
}

template <typename T>
void MaxPool<T>::backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>& dout,
                          Activation<T>* din, ParamSet<T>&) {
  if (!din) return;
  din->resize(dout.channels, dout.batch, in_.length);
  std::fill(din->data.begin(), din->data.end(), T(0));
  const std::size_t per_row = dout.row_size();
  for (int c = 0; c < dout.channels; ++c) {
    const T* g = dout.row(c);
    T* d = din->row(c);
    const std::int32_t* idx = argmax_.data() + static_cast<std::size_t>(c) * per_row;
    for (std::size_t i = 0; i < per_row; ++i) d[idx[i]] += g[i];
  }
}

// ---------------------------------------------------------------- global average pool

template <typename T>
void GlobalAvgPool<T>::forward(const ParamSet<T>&, const Activation<T>& in, Activation<T>& out, const ForwardContext&) {
  out.resize(in.channels, in.batch, 1);
  const double inv = 1.0 / in.length;
  for (int c = 0; c < in.channels; ++c) {
    const T* src = in.row(c);
    T* dst = out.row(c);
    for (int b = 0; b < in.batch; ++b) dst[b] = static_cast<T>(row_sum(src + static_cast<std::size_t>(b) * in.length, static_cast<std::size_t>(in.length)) * inv);
  }
}

template <typename T>
void GlobalAvgPool<T>::backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>& dout,
                                Activation<T>* din, ParamSet<T>&) {
  if (!din) return;
  din->resize(dout.channels, dout.batch, in_.length);
  const T inv = T(1) / static_cast<T>(in_.length);
  for (int c = 0; c < dout.channels; ++c) {
    const T* g = dout.row(c);
    T* d = din->row(c);
    for (int b = 0; b < dout.batch; ++b)
      std::fill(d + static_cast<std::size_t>(b) * in_.length, d + static_cast<std::size_t>(b + 1) * in_.length, g[b] * inv);
  }
}

// ---------------------------------------------------------------- dense

template <typename T>
Dense<T>::Dense(ParamRegistry& reg, const std::string& prefix, Shape in, int units) : in_(in), units_(units) {
  const int features = in.channels * in.length;
  weight_ = reg.add(prefix + ".weight", {units, features}, TensorRole::weight, features);
  bias_ = reg.add(prefix + ".bias", {units}, TensorRole::bias);
}

template <typename T>
void Dense<T>::forward(const ParamSet<T>& p, const Activation<T>& in, Activation<T>& out, const ForwardContext&) {
  const std::size_t batch = static_cast<std::size_t>(in.batch);
  const std::size_t features = static_cast<std::size_t>(in_.channels) * in_.length;
  const T* x = in.data.data();
  if (in_.length != 1) {
    flat_.resize(features * batch);
    for (int c = 0; c < in_.channels; ++c)
      for (std::size_t b = 0; b < batch; ++b)
        for (int t = 0; t < in_.length; ++t)
          flat_[(static_cast<std::size_t>(c) * in_.length + t) * batch + b] = in.row(c)[b * in_.length + t];
    x = flat_.data();
  }
  out.resize(units_, in.batch, 1);
  simd::gemm(static_cast<std::size_t>(units_), batch, features, view(p[weight_].data(), static_cast<std::ptrdiff_t>(features), 1),
             view(x, static_cast<std::ptrdiff_t>(batch), 1), out.data.data(), batch, false);
  const T* bias = p[bias_].data();
  for (int u = 0; u < units_; ++u) {
    T* r = out.row(u);
    for (std::size_t b = 0; b < batch; ++b) r[b] += bias[u];
  }
}

template <typename T>
void Dense<T>::backward(const ParamSet<T>& p, const Activation<T>& in, const Activation<T>&, const Activation<T>& dout,
                        Activation<T>* din, ParamSet<T>& grads) {
  const std::size_t batch = static_cast<std::size_t>(dout.batch);
  const std::size_t features = static_cast<std::size_t>(in_.channels) * in_.length;
  const T* x = in_.length == 1 ? in.data.data() : flat_.data();
  simd::gemm(static_cast<std::size_t>(units_), features, batch, view(dout.data.data(), static_cast<std::ptrdiff_t>(batch), 1),
             view(x, 1, static_cast<std::ptrdiff_t>(batch)), grads[weight_].data(), features, true);
  T* gb = grads[bias_].data();
  for (int u = 0; u < units_; ++u) gb[u] += row_sum(dout.row(u), batch);
  if (!din) return;
  din->resize(in_.channels, dout.batch, in_.length);
  T* dx = in_.length == 1 ? din->data.data() : (dflat_.resize(features * batch), dflat_.data());
  simd::gemm(features, batch, static_cast<std::size_t>(units_), view(p[weight_].data(), 1, static_cast<std::ptrdiff_t>(features)),
             view(dout.data.data(), static_cast<std::ptrdiff_t>(batch), 1), dx, batch, false);
  if (in_.length != 1) {
    for (int c = 0; c < in_.channels; ++c)
      for (std::size_t b = 0; b < batch; ++b)
        for (int t = 0; t < in_.length; ++t)
          din->row(c)[b * in_.length + t] = dflat_[(static_cast<std::size_t>(c) * in_.length + t) * batch + b];
  }
}

// ---------------------------------------------------------------- dropout

template <typename T>
void Dropout<T>::forward(const ParamSet<T>&, const Activation<T>& in, Activation<T>& out, const ForwardContext& ctx) {
  out = in;
  if (ctx.mode == Mode::infer || p_ == 0.0) {
    mask_.clear();
    return;
  }
  mask_.resize(in.data.size());
  CounterRng rng(derive_seed(ctx.dropout_seed, {salt_}));
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p_));
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    mask_[i] = rng.uniform() >= p_ ? keep_scale : T(0);
    out.data[i] *= mask_[i];
  }
}

template <typename T>
void Dropout<T>::backward(const ParamSet<T>&, const Activation<T>&, const Activation<T>&, const Activation<T>& dout,
                          Activation<T>* din, ParamSet<T>&) {
  if (!din) return;
  *din = dout;
  if (mask_.empty()) return;
  for (std::size_t i = 0; i < mask_.size(); ++i) din->data[i] *= mask_[i];
}

// ---------------------------------------------------------------- residual block

template <typename T>
ResidualBlock<T>::ResidualBlock(ParamRegistry& reg, const std::string& prefix, Shape in, int channels, bool downsample,
                                int kernel, bool batch_norm)
    : in_(in) {
  const int stride = downsample ? 2 : 1;
  auto conv_a = std::make_unique<Conv1d<T>>(reg, prefix + ".a.conv", in, channels, kernel, stride);
  const Shape mid = conv_a->output_shape();
  main_.push_back(std::move(conv_a));
  if (batch_norm) main_.push_back(std::make_unique<BatchNorm<T>>(reg, prefix + ".a.bn", mid));
  main_.push_back(std::make_unique<Relu<T>>(mid));
  auto conv_b = std::make_unique<Conv1d<T>>(reg, prefix + ".b.conv", mid, channels, kernel, 1);
  out_ = conv_b->output_shape();
  main_.push_back(std::move(conv_b));
  if (batch_norm) main_.push_back(std::make_unique<BatchNorm<T>>(reg, prefix + ".b.bn", out_));

  if (downsample || in.channels != channels) {
    auto proj = std::make_unique<Conv1d<T>>(reg, prefix + ".proj.conv", in, channels, 1, stride);
    if (proj->output_shape() != out_) throw ConfigError("residual shortcut shape mismatch");
    shortcut_.push_back(std::move(proj));
    if (batch_norm) shortcut_.push_back(std::make_unique<BatchNorm<T>>(reg, prefix + ".proj.bn", out_));
  } else if (in != out_) {
    throw ConfigError("identity shortcut requires matching shapes");
  }
  main_acts_.resize(main_.size());
  main_grads_.resize(main_.size());
  short_acts_.resize(shortcut_.size());
  short_grads_.resize(shortcut_.size());
}

template <typename T>
void ResidualBlock<T>::forward(const ParamSet<T>& p, const Activation<T>& in, Activation<T>& out,
                               const ForwardContext& ctx) {
  const Activation<T>* x = &in;
  for (std::size_t i = 0; i < main_.size(); ++i) {
    main_[i]->forward(p, *x, main_acts_[i], ctx);
    x = &main_acts_[i];
  }
  const Activation<T>* s = &in;
  for (std::size_t i = 0; i < shortcut_.size(); ++i) {
    shortcut_[i]->forward(p, *s, short_acts_[i], ctx);
    s = &short_acts_[i];
  }
  out = *x;
  add_into(s->data.data(), out.data.data(), out.data.size());
  affine(out.data.data(), out.data.data(), out.data.size(), T(1), T(0), true);
}

template <typename T>
void ResidualBlock<T>::backward(const ParamSet<T>& p, const Activation<T>& in, const Activation<T>& out,
                                const Activation<T>& dout, Activation<T>* din, ParamSet<T>& grads) {
  dsum_ = dout;
  relu_backward(out.data.data(), dsum_.data.data(), dsum_.data.size());

  Activation<T> main_din, short_din;
  const Activation<T>* g = &dsum_;
  for (std::size_t i = main_.size(); i-- > 0;) {
    const Activation<T>& x = i == 0 ? in : main_acts_[i - 1];
    Activation<T>* dprev = i == 0 ? (din ? &main_din : nullptr) : &main_grads_[i - 1];
    main_[i]->backward(p, x, main_acts_[i], *g, dprev, grads);
    g = dprev;
  }
  g = &dsum_;
  for (std::size_t i = shortcut_.size(); i-- > 0;) {
    const Activation<T>& x = i == 0 ? in : short_acts_[i - 1];
    Activation<T>* dprev = i == 0 ? (din ? &short_din : nullptr) : &short_grads_[i - 1];
    shortcut_[i]->backward(p, x, short_acts_[i], *g, dprev, grads);
    g = dprev;
  }
  if (!din) return;
  *din = std::move(main_din);
  const Activation<T>& sd = shortcut_.empty() ? dsum_ : short_din;
  add_into(sd.data.data(), din->data.data(), din->data.size());
}

template <typename T>
void ResidualBlock<T>::update_running_stats(ParamSet<T>& p, double momentum) {
  for (auto& l : main_) l->update_running_stats(p, momentum);
  for (auto& l : shortcut_) l->update_running_stats(p, momentum);
}

template class Conv1d<float>;
template class Conv1d<double>;
template class BatchNorm<float>;
template class BatchNorm<double>;
template class Relu<float>;
template class Relu<double>;
template class MaxPool<float>;
template class MaxPool<double>;
template class GlobalAvgPool<float>;
template class GlobalAvgPool<double>;
template class Dense<float>;
template class Dense<double>;
template class Dropout<float>;
template class Dropout<double>;
template class ResidualBlock<float>;
template class ResidualBlock<double>;

}  // namespace specsense::nn
