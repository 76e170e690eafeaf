#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specsense/error.hpp"

namespace specsense::nn {

enum class TensorRole { weight, bias, norm_scale, norm_shift, running_mean, running_var };

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  TensorRole role = TensorRole::weight;
  int fan_in = 1;  // used by the weight initializer

  std::size_t count() const noexcept {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
  bool trainable() const noexcept {
    return role != TensorRole::running_mean && role != TensorRole::running_var;
  }
  bool operator==(const TensorInfo&) const = default;
};

/// Named tensors in registration order. Running normalization statistics live here too
/// but are not trainable.
template <typename T>
struct ParamSet {
  std::vector<TensorInfo> info;
  std::vector<std::vector<T>> values;

  std::size_t size() const noexcept { return values.size(); }
  std::span<T> operator[](std::size_t i) noexcept { return values[i]; }
  std::span<const T> operator[](std::size_t i) const noexcept { return values[i]; }

  /// Throws DomainError for unknown names.
  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < info.size(); ++i)
      if (info[i].name == name) return i;
    throw DomainError("unknown tensor " + name);
  }

  std::size_t trainable_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : info)
      if (t.trainable()) n += t.count();
    return n;
  }
  std::size_t total_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : info) n += t.count();
    return n;
  }

  void zero() {
    for (auto& v : values) std::fill(v.begin(), v.end(), T(0));
  }
  bool all_finite() const noexcept {
    for (const auto& v : values)
      for (T x : v)
        if (!std::isfinite(x)) return false;
    return true;
  }

  /// Zero-filled set with the same layout.
  ParamSet zeros_like() const {
    ParamSet out;
    out.info = info;
    out.values.reserve(values.size());
    for (const auto& v : values) out.values.emplace_back(v.size(), T(0));
    return out;
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    out.info = info;
    for (const auto& v : values) out.values.emplace_back(v.begin(), v.end());
    return out;
  }
};

using ModelParams = ParamSet<float>;

}  // namespace specsense::nn
