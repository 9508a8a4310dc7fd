#include "sscl/model/config.hpp"

#include "sscl/dataio/schema.hpp"
#include "sscl/error.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

namespace sscl::model {

using nlohmann::json;

std::string LayerSpec::label() const {
  return (kind == Kind::Conv ? "Conv" : "Pool") + std::to_string(size);
}

EncoderConfig EncoderConfig::from_preset(const std::string& name, Index input_width, std::uint64_t seed) {
  EncoderConfig c;
  c.input_width = input_width;
  c.seed = seed;
  const auto key = dataio::normalize_name(name);
  if (key == "smaller-pack") {
    c.preset = "smaller-pack";
    c.layers = parse_layers("conv32,conv64,conv128,pool3,conv256,pool2,conv512,pool4");
    c.context_dim = 256;
  } else if (key == "larger-pack") {
    c.preset = "larger-pack";
    c.layers = parse_layers("conv8,conv16,conv32,conv64,pool3,conv128,pool4,conv256");
    c.context_dim = 128;
  } else {
    throw Error(ErrorCode::Config, "unknown encoder preset '" + name + "'");
  }
  return c;
}

std::vector<LayerSpec> EncoderConfig::parse_layers(const std::string& text) {
  std::vector<LayerSpec> layers;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto token = dataio::normalize_name(item);
    LayerSpec spec;
    std::string_view digits;
    if (token.starts_with("conv")) {
      spec.kind = LayerSpec::Kind::Conv;
      digits = std::string_view(token).substr(4);
    } else if (token.starts_with("pool")) {
      spec.kind = LayerSpec::Kind::Pool;
      digits = std::string_view(token).substr(4);
    } else {
      throw Error(ErrorCode::Config, "bad layer spec '" + item + "'");
    }
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), spec.size);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || spec.size < 1) {
      throw Error(ErrorCode::Config, "bad layer spec '" + item + "'");
    }
    layers.push_back(spec);
  }
  if (layers.empty()) throw Error(ErrorCode::Config, "empty layer list");
  return layers;
}

std::string EncoderConfig::format_layers(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (const auto& l : layers) {
    if (!out.empty()) out += ',';
    out += (l.kind == LayerSpec::Kind::Conv ? "conv" : "pool") + std::to_string(l.size);
  }
  return out;
}

Index EncoderConfig::hidden_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerSpec::Kind::Conv) return it->size;
  }
  throw Error(ErrorCode::Config, "encoder has no conv layer");
}

std::vector<Index> EncoderConfig::widths() const {
  std::vector<Index> out;
  Index w = input_width;
  if (w < 1) throw Error(ErrorCode::InvalidShape, "input width must be positive");
  for (const auto& l : layers) {
    w = l.kind == LayerSpec::Kind::Conv ? w - 1 : w / l.size;
    if (w < 1) {
      throw Error(ErrorCode::InvalidShape, "input width " + std::to_string(input_width) + " too small: " + l.label() +
                                               " produces an empty output (minimum width " +
                                               std::to_string(min_input_width(layers)) + ")");
    }
    out.push_back(w);
  }
  return out;
}

void EncoderConfig::validate() const {
  hidden_dim();
  if (context_dim < 1) throw Error(ErrorCode::Config, "context_dim must be positive");
  widths();
}

Index min_input_width(const std::vector<LayerSpec>& layers) {
  // Walk backwards from a final width of 1.
  Index w = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    w = it->kind == LayerSpec::Kind::Conv ? w + 1 : w * it->size;
  }
  return w;
}

std::string EncoderConfig::to_json() const {
  json j;
  j["preset"] = preset;
  j["layers"] = format_layers(layers);
  j["input_width"] = input_width;
  j["context_dim"] = context_dim;
  j["seed"] = seed;
  return j.dump();
}

EncoderConfig EncoderConfig::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    EncoderConfig c;
    c.preset = j.at("preset").get<std::string>();
    c.layers = parse_layers(j.at("layers").get<std::string>());
    c.input_width = j.at("input_width").get<Index>();
    c.context_dim = j.at("context_dim").get<Index>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Checkpoint, std::string("malformed encoder config: ") + e.what());
  }
}

}  // namespace sscl::model
