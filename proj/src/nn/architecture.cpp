#include "specsense/nn/architecture.hpp"

#include "specsense/error.hpp"

namespace specsense::nn {
namespace {

int conv_out(int len, int kernel, int stride) {
  const int pad = kernel / 2;
  return (len + 2 * pad - kernel) / stride + 1;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

ArchitectureSpec ArchitectureSpec::residual_detector() {
  ArchitectureSpec a;
  a.input_length = 512;
  a.block_kernel = 3;
  a.batch_norm = true;
  a.layers = {
      ConvSpec{15, 48, 1},
      ConvSpec{7, 64, 1},
      MaxPoolSpec{3, 2},
      ResidualSpec{64, true},
      ResidualSpec{64, false},
      ResidualSpec{128, true},
      ResidualSpec{128, false},
      ResidualSpec{128, false},
      ResidualSpec{256, true},
      GlobalAvgPoolSpec{},
      DenseSpec{32, true},
      DropoutSpec{0.5},
      DenseSpec{2, false},
  };
  return a;
}

std::vector<Shape> ArchitectureSpec::shapes() const {
  std::vector<Shape> out;
  Shape s{1, input_length};
  out.push_back(s);
  for (const auto& layer : layers) {
    s = std::visit(Overloaded{
                       [&](const ConvSpec& c) { return Shape{c.channels, conv_out(s.length, c.kernel, c.stride)}; },
                       [&](const MaxPoolSpec& p) { return Shape{s.channels, conv_out(s.length, p.kernel, p.stride)}; },
                       [&](const ResidualSpec& r) {
                         return Shape{r.channels, r.downsample ? conv_out(s.length, block_kernel, 2) : s.length};
                       },
                       [&](const GlobalAvgPoolSpec&) { return Shape{s.channels, 1}; },
                       [&](const DenseSpec& d) { return Shape{d.units, 1}; },
                       [&](const DropoutSpec&) { return s; },
                   },
                   layer);
    out.push_back(s);
  }
  return out;
}

void ArchitectureSpec::validate() const {
  if (input_length <= 0) throw ConfigError("input length must be positive");
  if (block_kernel <= 0 || block_kernel % 2 == 0) throw ConfigError("block kernel must be odd and positive");
  if (layers.empty()) throw ConfigError("architecture has no layers");
  Shape s{1, input_length};
  for (const auto& layer : layers) {
    std::visit(Overloaded{
                   [&](const ConvSpec& c) {
                     if (c.kernel <= 0 || c.channels <= 0 || c.stride <= 0) throw ConfigError("bad conv layer");
                   },
                   [&](const MaxPoolSpec& p) {
                     if (p.kernel <= 0 || p.stride <= 0) throw ConfigError("bad maxpool layer");
                   },
                   [&](const ResidualSpec& r) {
                     if (r.channels <= 0) throw ConfigError("bad residual block");
                     if (!r.downsample && r.channels != s.channels && s.channels <= 0)
                       throw ConfigError("bad residual block input");
                   },
                   [&](const GlobalAvgPoolSpec&) {},
                   [&](const DenseSpec& d) {
                     if (d.units <= 0) throw ConfigError("bad dense layer");
                   },
                   [&](const DropoutSpec& d) {
                     if (!(d.p >= 0.0 && d.p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
                   },
               },
               layer);
  }
  const auto sh = shapes();
  for (const auto& x : sh)
    if (x.length <= 0) throw ConfigError("architecture shrinks the signal to zero length");
  const auto* last = std::get_if<DenseSpec>(&layers.back());
  if (!last || last->units != 2 || last->relu)
    throw ConfigError("architecture must end in a linear dense layer with two outputs");
}

nlohmann::json ArchitectureSpec::to_json() const {
  nlohmann::json layers_j = nlohmann::json::array();
  for (const auto& layer : layers) {
    layers_j.push_back(std::visit(
        Overloaded{
            [](const ConvSpec& c) {
              return nlohmann::json{{"type", "conv"}, {"kernel", c.kernel}, {"channels", c.channels}, {"stride", c.stride}};
            },
            [](const MaxPoolSpec& p) {
              return nlohmann::json{{"type", "maxpool"}, {"kernel", p.kernel}, {"stride", p.stride}};
            },
            [](const ResidualSpec& r) {
              return nlohmann::json{{"type", "residual"}, {"channels", r.channels}, {"downsample", r.downsample}};
            },
            [](const GlobalAvgPoolSpec&) { return nlohmann::json{{"type", "global_avgpool"}}; },
            [](const DenseSpec& d) { return nlohmann::json{{"type", "dense"}, {"units", d.units}, {"relu", d.relu}}; },
            [](const DropoutSpec& d) { return nlohmann::json{{"type", "dropout"}, {"p", d.p}}; },
        },
        layer));
  }
  return {{"input_length", input_length}, {"block_kernel", block_kernel}, {"batch_norm", batch_norm}, {"layers", layers_j}};
}

ArchitectureSpec ArchitectureSpec::from_json(const nlohmann::json& j) {
  try {
    ArchitectureSpec a;
    a.input_length = j.at("input_length").get<int>();
    a.block_kernel = j.at("block_kernel").get<int>();
    a.batch_norm = j.at("batch_norm").get<bool>();
    for (const auto& l : j.at("layers")) {
      const std::string type = l.at("type").get<std::string>();
      if (type == "conv") {
        a.layers.push_back(ConvSpec{l.at("kernel").get<int>(), l.at("channels").get<int>(), l.at("stride").get<int>()});
      } else if (type == "maxpool") {
        a.layers.push_back(MaxPoolSpec{l.at("kernel").get<int>(), l.at("stride").get<int>()});
      } else if (type == "residual") {
        a.layers.push_back(ResidualSpec{l.at("channels").get<int>(), l.at("downsample").get<bool>()});
      } else if (type == "global_avgpool") {
        a.layers.push_back(GlobalAvgPoolSpec{});
      } else if (type == "dense") {
        a.layers.push_back(DenseSpec{l.at("units").get<int>(), l.at("relu").get<bool>()});
      } else if (type == "dropout") {
        a.layers.push_back(DropoutSpec{l.at("p").get<double>()});
      } else {
        throw ConfigError("unknown layer type '" + type + "'");
      }
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed architecture description: ") + e.what());
  }
}

std::string describe(const LayerSpec& layer) {
  return std::visit(Overloaded{
                        [](const ConvSpec& c) {
                          return std::to_string(c.kernel) + "x1 conv, " + std::to_string(c.channels) +
                                 (c.stride > 1 ? ", /" + std::to_string(c.stride) : "");
                        },
                        [](const MaxPoolSpec& p) {
                          return std::to_string(p.kernel) + "x1 maxpool, /" + std::to_string(p.stride);
                        },
                        [](const ResidualSpec& r) {
                          return std::string(r.downsample ? "residual-down(" : "residual(") +
                                 std::to_string(r.channels) + ")";
                        },
                        [](const GlobalAvgPoolSpec&) { return std::string("global avgpool"); },
                        [](const DenseSpec& d) { return "fc x" + std::to_string(d.units); },
                        [](const DropoutSpec& d) { return "dropout(" + std::to_string(d.p) + ")"; },
                    },
                    layer);
}

}  // namespace specsense::nn
