#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace specsense::nn {

/// Convolution followed (when batch_norm is on) by normalization and ReLU.
struct ConvSpec {
  int kernel = 3;
  int channels = 1;
  int stride = 1;
  bool operator==(const ConvSpec&) const = default;
};
struct MaxPoolSpec {
  int kernel = 3;
  int stride = 2;
  bool operator==(const MaxPoolSpec&) const = default;
};
/// downsample = true is the stride-2 block with a projection shortcut; false keeps the length.
struct ResidualSpec {
  int channels = 64;
  bool downsample = false;
  bool operator==(const ResidualSpec&) const = default;
};
struct GlobalAvgPoolSpec {
  bool operator==(const GlobalAvgPoolSpec&) const = default;
};
struct DenseSpec {
  int units = 2;
  bool relu = false;
  bool operator==(const DenseSpec&) const = default;
};
struct DropoutSpec {
  double p = 0.5;
  bool operator==(const DropoutSpec&) const = default;
};

using LayerSpec = std::variant<ConvSpec, MaxPoolSpec, ResidualSpec, GlobalAvgPoolSpec, DenseSpec, DropoutSpec>;

struct Shape {
  int channels = 0;
  int length = 0;
  bool operator==(const Shape&) const = default;
};

struct ArchitectureSpec {
  int input_length = 512;
  int block_kernel = 3;
  bool batch_norm = true;
  std::vector<LayerSpec> layers;  // a softmax over the last layer's outputs is implicit

  /// Stem convs, maxpool, six residual blocks, pooling and the dense head.
  static ArchitectureSpec residual_detector();

  /// Throws ConfigError unless the layers chain and the head ends in two logits.
  void validate() const;
  /// Output shape of every layer in order, starting from the input.
  std::vector<Shape> shapes() const;

  nlohmann::json to_json() const;
  static ArchitectureSpec from_json(const nlohmann::json& j);

  bool operator==(const ArchitectureSpec&) const = default;
};

std::string describe(const LayerSpec& layer);

}  // namespace specsense::nn
