#include "sscl/cli/config.hpp"

#include "sscl/dataio/schema.hpp"
#include "sscl/error.hpp"
#include "sscl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace sscl::cli {

namespace {

const std::vector<std::string> kAll{"preprocess", "pretrain", "train-head", "evaluate", "transfer-eval", "synth"};

}  // namespace

const std::vector<KeySpec>& key_table() {
  using V = ValueType;
  static const std::vector<KeySpec> table{
      {"seed", V::Int, "0", "root seed for every random stream", kAll},
      {"out_dir", V::Path, "out", "directory for artifacts and the manifest", kAll},
      // preprocess
      {"schema", V::Path, "", "dataset schema JSON", {"preprocess"}},
      {"train_csv", V::Path, "", "training CSV; the scaler is fitted on it", {"preprocess"}},
      {"test_csv", V::Path, "", "optional test CSV, transformed with the training fit", {"preprocess"}},
      // shared data and model inputs
      {"encoded", V::Path, "", "encoded dataset file", {"pretrain", "train-head", "evaluate"}},
      {"preprocessor", V::Path, "", "fitted preprocessor state", {"pretrain", "train-head", "evaluate", "transfer-eval"}},
      {"encoder", V::Path, "", "encoder checkpoint", {"train-head", "evaluate", "transfer-eval"}},
      {"head", V::Path, "", "classification head checkpoint", {"evaluate"}},
      // pretrain
      {"preset", V::String, "smaller-pack", "smaller-pack, larger-pack or custom", {"pretrain"}},
      {"layers", V::String, "", "custom layer list, e.g. conv8,conv16,pool2,conv32", {"pretrain"}},
      {"context_dim", V::Int, "0", "projection width for a custom encoder", {"pretrain"}},
      {"batch_size", V::Int, "32", "contrastive batch size N", {"pretrain"}},
      {"temperature", V::Double, "0.5", "NT-Xent temperature", {"pretrain"}},
      {"mask_ratio", V::Double, "0.3", "fraction of positions zeroed per view", {"pretrain"}},
      {"mask_groups", V::Bool, "false", "mask whole features instead of single positions", {"pretrain"}},
      {"epochs", V::Int, "100", "pretraining epochs", {"pretrain"}},
      {"learning_rate", V::Double, "0.0002", "pretraining base learning rate", {"pretrain"}},
      {"lr_gamma", V::Double, "0.99", "per-epoch learning-rate decay", {"pretrain", "train-head", "transfer-eval"}},
      {"weight_decay", V::Double, "0.01", "AdamW decoupled weight decay", {"pretrain", "train-head", "transfer-eval"}},
      {"holdout_fraction", V::Double, "0.2", "share of the encoder set kept for held-out loss", {"pretrain"}},
      // head
      {"classes", V::String, "all", "all, binary, or a comma-separated class list", {"train-head", "transfer-eval"}},
      {"label_fraction", V::Double, "1.0", "stratified share of labels used for the head", {"train-head", "transfer-eval"}},
      {"representation", V::String, "hidden", "hidden or context", {"train-head", "transfer-eval"}},
      {"head_epochs", V::Int, "50", "head training epochs", {"train-head", "transfer-eval"}},
      {"head_batch_size", V::Int, "32", "head minibatch size", {"train-head", "transfer-eval"}},
      {"head_learning_rate", V::Double, "0.0002", "head base learning rate", {"train-head", "transfer-eval"}},
      // transfer
      {"target_schema", V::Path, "", "schema of the target dataset", {"transfer-eval"}},
      {"target_train_csv", V::Path, "", "target CSV the head is trained on", {"transfer-eval"}},
      {"target_test_csv", V::Path, "", "target CSV for evaluation; empty splits target_train_csv", {"transfer-eval"}},
      {"train_fraction", V::Double, "0.8", "train share when splitting target_train_csv", {"transfer-eval"}},
      {"aliases", V::Path, "", "alias table, one 'original = target' per line", {"transfer-eval"}},
      // synth
      {"samples", V::Int, "2000", "number of synthetic samples", {"synth"}},
      {"features", V::Int, "16", "number of numeric features", {"synth"}},
      {"num_classes", V::Int, "2", "number of blob classes", {"synth"}},
      {"spread", V::Double, "0.05", "per-feature standard deviation in unit space", {"synth"}},
      {"test_fraction", V::Double, "0.2", "share of samples written to test.csv", {"synth"}},
      {"drop", V::String, "", "features removed in the reduced target copy", {"synth"}},
  };
  return table;
}

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::vector<const KeySpec*> keys_for(const std::string& command) {
  std::vector<const KeySpec*> out;
  for (const auto& k : key_table()) {
    if (std::find(k.commands.begin(), k.commands.end(), command) != k.commands.end()) out.push_back(&k);
  }
  return out;
}

namespace {

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

void check_type(const KeySpec& spec, const std::string& value) {
  auto fail = [&](const char* what) {
    throw Error(ErrorCode::Config, "config key '" + spec.name + "' expects " + what + ", got '" + value + "'");
  };
  switch (spec.type) {
    case ValueType::Int: {
      std::int64_t v = 0;
      if (!parse_number(value, v) || v < 0) fail("a non-negative integer");
      break;
    }
    case ValueType::Double: {
      double v = 0;
      if (!parse_number(value, v) || !std::isfinite(v)) fail("a finite number");
      break;
    }
    case ValueType::Bool:
      if (value != "true" && value != "false") fail("true or false");
      break;
    case ValueType::String:
    case ValueType::Path:
      break;
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : key_table()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  check_type(*spec, value);
  values_[key] = value;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  bool versioned = false;
  for (std::size_t row = 1; std::getline(in, line); ++row) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto key = dataio::normalize_name(line.substr(0, eq));
    if (key.empty() && eq == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "config line " + std::to_string(row) + " is not 'key = value'");
    }
    std::string value = line.substr(eq + 1);
    value.erase(0, value.find_first_not_of(" \t\r"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    if (key == "version") {
      if (value != std::to_string(kVersion)) {
        throw Error(ErrorCode::Config, "unsupported config version '" + value + "'");
      }
      versioned = true;
      continue;
    }
    config.set(key, value);
  }
  if (!versioned) throw Error(ErrorCode::Config, "config has no 'version = 1' line");
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  std::int64_t v = 0;
  parse_number(raw(key), v);
  return v;
}

std::uint64_t RunConfig::seed() const { return static_cast<std::uint64_t>(integer("seed")); }

double RunConfig::real(const std::string& key) const {
  double v = 0;
  parse_number(raw(key), v);
  return v;
}

bool RunConfig::flag(const std::string& key) const { return raw(key) == "true"; }

void RunConfig::require(const std::vector<std::string>& keys) const {
  for (const auto& k : keys) {
    if (!has(k)) throw Error(ErrorCode::Config, "missing required setting '" + k + "'");
  }
}

std::map<std::string, std::string> RunConfig::resolved(const std::string& command) const {
  std::map<std::string, std::string> out;
  for (const auto* k : keys_for(command)) out[k->name] = raw(k->name);
  return out;
}

}  // namespace sscl::cli
