#include "sscl/dataio/preprocess.hpp"

#include "sscl/error.hpp"
#include "sscl/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <unordered_map>

namespace sscl::dataio {

using nlohmann::json;

PreprocessorState::PreprocessorState(DatasetSchema schema, std::vector<NumericRange> ranges)
    : schema_(std::move(schema)), ranges_(std::move(ranges)) {
  if (ranges_.size() != schema_.features().size()) {
    throw Error(ErrorCode::SchemaMismatch, "preprocessor ranges do not match schema features");
  }
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (!(ranges_[i].min <= ranges_[i].max)) {
      throw Error(ErrorCode::SchemaMismatch, "min > max for feature '" + schema_.features()[i].name + "'");
    }
  }
  vocab_index_.resize(ranges_.size());
  for (std::size_t f = 0; f < ranges_.size(); ++f) {
    const auto& vocab = schema_.features()[f].vocabulary;
    for (std::size_t v = 0; v < vocab.size(); ++v) vocab_index_[f].emplace(normalize_name(vocab[v]), v);
  }
}

std::optional<std::size_t> PreprocessorState::category_index(std::size_t feature, const std::string& value) const {
  const auto& index = vocab_index_.at(feature);
  const auto it = index.find(normalize_name(value));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> PreprocessorState::degenerate_features() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (schema_.features()[i].kind == FeatureKind::Numeric && ranges_[i].degenerate()) {
      out.push_back(schema_.features()[i].name);
    }
  }
  return out;
}

std::string PreprocessorState::to_json() const {
  json j;
  j["format"] = "sscl-preprocessor";
  j["version"] = kVersion;
  j["schema_fingerprint"] = schema_.fingerprint();
  j["schema"] = json::parse(schema_.to_json());
  json ranges = json::array();
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (schema_.features()[i].kind != FeatureKind::Numeric) continue;
    ranges.push_back({{"name", schema_.features()[i].name}, {"min", ranges_[i].min}, {"max", ranges_[i].max}});
  }
  j["numeric_ranges"] = ranges;
  return j.dump(1);
}

PreprocessorState PreprocessorState::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "sscl-preprocessor") {
      throw Error(ErrorCode::SchemaMismatch, "not an sscl-preprocessor document");
    }
    if (j.at("version").get<int>() != kVersion) throw Error(ErrorCode::SchemaMismatch, "unsupported preprocessor version");
    DatasetSchema schema = DatasetSchema::from_json(j.at("schema").dump());
    if (schema.fingerprint() != j.at("schema_fingerprint").get<std::string>()) {
      throw Error(ErrorCode::SchemaMismatch, "preprocessor schema fingerprint mismatch");
    }
    std::vector<NumericRange> ranges(schema.features().size());
    for (const auto& r : j.at("numeric_ranges")) {
      const auto idx = schema.find_feature(r.at("name").get<std::string>());
      if (!idx) throw Error(ErrorCode::SchemaMismatch, "range for unknown feature");
      ranges[*idx] = {r.at("min").get<double>(), r.at("max").get<double>()};
    }
    return PreprocessorState(std::move(schema), std::move(ranges));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed preprocessor state: ") + e.what());
  }
}

void PreprocessorState::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json() + "\n"); }

PreprocessorState PreprocessorState::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

PreprocessorState fit_preprocessor(const std::vector<RawRecord>& records, const DatasetSchema& schema) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a preprocessor on zero records");
  const auto& features = schema.features();
  std::vector<NumericRange> ranges(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind != FeatureKind::Numeric) continue;
    double lo = records.front().numeric.at(f), hi = lo;
    for (const auto& r : records) {
      lo = std::min(lo, r.numeric[f]);
      hi = std::max(hi, r.numeric[f]);
    }
    ranges[f] = {lo, hi};
  }
  return PreprocessorState(schema, std::move(ranges));
}

EncodedSample transform(const RawRecord& record, const PreprocessorState& state, TransformStats* stats) {
  const DatasetSchema& schema = state.schema();
  const auto& features = schema.features();
  EncodedSample out;
  out.features = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.encoded_width()));
  out.label = record.label;
  for (const FeatureSlot& slot : schema.layout()) {
    const FeatureSpec& spec = features[slot.feature];
    const auto pos = static_cast<Eigen::Index>(slot.offset);
    if (spec.kind == FeatureKind::Numeric) {
      const NumericRange& r = state.ranges()[slot.feature];
      if (r.degenerate()) continue;
      const double scaled = (record.numeric.at(slot.feature) - r.min) / (r.max - r.min);
      out.features[pos] = std::clamp(scaled, 0.0, 1.0);
      continue;
    }
    const std::string& cell = record.category.at(slot.feature);
    if (cell == kMissingCategory) {
      if (stats) ++stats->masked_missing;
      continue;
    }
    if (const auto v = state.category_index(slot.feature, cell)) {
      out.features[pos + static_cast<Eigen::Index>(*v)] = 1.0;
    } else if (stats) {
      ++stats->unseen_category;
    }
  }
  return out;
}

Dataset transform_all(const std::vector<RawRecord>& records, const PreprocessorState& state, TransformStats* stats) {
  Dataset out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(transform(r, state, stats));
  return out;
}

}  // namespace sscl::dataio
