#pragma once

#include "sscl/numgrad/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sscl::model {

using numgrad::Index;

struct LayerSpec {
  enum class Kind { Conv, Pool };
  Kind kind = Kind::Conv;
  Index size = 0;  // output channels for Conv, window for Pool

  std::string label() const;  // "Conv32", "Pool3"
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Ordered encoder layers. Every Conv is kernel 2 / stride 1 / bias, followed by
// batch norm and ReLU; a global max pool follows the last layer.
struct EncoderConfig {
  std::string preset = "custom";
  std::vector<LayerSpec> layers;
  Index input_width = 0;
  Index context_dim = 0;
  std::uint64_t seed = 0;

  // "smaller-pack" or "larger-pack"; throws Error{Config} otherwise.
  static EncoderConfig from_preset(const std::string& name, Index input_width, std::uint64_t seed = 0);

  // Comma-separated list such as "conv8,conv16,pool2,conv32" (case-insensitive).
  static std::vector<LayerSpec> parse_layers(const std::string& text);
  static std::string format_layers(const std::vector<LayerSpec>& layers);

  Index hidden_dim() const;  // channel count of the last conv

  // Width after each layer; throws Error{InvalidShape} naming the first layer
  // that would produce an empty output.
  std::vector<Index> widths() const;
  void validate() const;

  std::string to_json() const;
  static EncoderConfig from_json(const std::string& text);

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Smallest input width the layer stack accepts.
Index min_input_width(const std::vector<LayerSpec>& layers);

}  // namespace sscl::model
