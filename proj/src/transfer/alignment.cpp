#include "sscl/transfer/alignment.hpp"

#include "sscl/error.hpp"
#include "sscl/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace sscl::transfer {

using dataio::FeatureKind;
using dataio::normalize_name;

void AliasTable::add(const std::string& original, const std::string& target) {
  const auto key = normalize_name(original);
  const auto value = normalize_name(target);
  if (key.empty() || value.empty()) throw Error(ErrorCode::Config, "alias needs both names");
  if (!map_.emplace(key, value).second) throw Error(ErrorCode::Config, "feature '" + original + "' aliased twice");
}

std::string AliasTable::target_name(const std::string& original) const {
  const auto key = normalize_name(original);
  const auto it = map_.find(key);
  return it == map_.end() ? key : it->second;
}

AliasTable AliasTable::parse(const std::string& text) {
  AliasTable table;
  std::istringstream in(text);
  std::string line;
  for (std::size_t row = 1; std::getline(in, line); ++row) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (normalize_name(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "alias line " + std::to_string(row) + " is not 'original = target'");
    }
    table.add(line.substr(0, eq), line.substr(eq + 1));
  }
  return table;
}

AliasTable AliasTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::size_t FeatureAlignmentMap::mapped() const {
  std::size_t n = 0;
  for (const auto& s : source) n += s.has_value();
  return n;
}

std::size_t FeatureAlignmentMap::omitted() const {
  std::vector<bool> used(target_width, false);
  for (const auto& s : source) {
    if (s) used[*s] = true;
  }
  return static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
}

FeatureAlignmentMap build_alignment(const dataio::DatasetSchema& original, const dataio::DatasetSchema& target,
                                    const AliasTable& aliases) {
  FeatureAlignmentMap map;
  map.original_width = original.encoded_width();
  map.target_width = target.encoded_width();
  map.source.assign(map.original_width, std::nullopt);
  map.feature_source.assign(original.features().size(), std::nullopt);
  const auto o_layout = original.layout();
  const auto t_layout = target.layout();
  std::vector<bool> target_used(target.features().size(), false);

  for (std::size_t f = 0; f < original.features().size(); ++f) {
    const auto& of = original.features()[f];
    const auto t = target.find_feature(aliases.target_name(of.name));
    if (!t || target.features()[*t].kind != of.kind) {
      map.masked_features.push_back(of.name);
      continue;
    }
    const auto& tf = target.features()[*t];
    const auto& os = o_layout[f];
    const auto& ts = t_layout[*t];
    bool any = false;
    if (of.kind == FeatureKind::Numeric) {
      map.source[os.offset] = ts.offset;
      any = true;
    } else {
      for (std::size_t c = 0; c < of.vocabulary.size(); ++c) {
        const auto key = normalize_name(of.vocabulary[c]);
        for (std::size_t d = 0; d < tf.vocabulary.size(); ++d) {
          if (normalize_name(tf.vocabulary[d]) == key) {
            map.source[os.offset + c] = ts.offset + d;
            any = true;
            break;
          }
        }
      }
    }
    if (any) {
      map.feature_source[f] = *t;
      target_used[*t] = true;
    } else {
      map.masked_features.push_back(of.name);
    }
  }
  for (std::size_t t = 0; t < target.features().size(); ++t) {
    if (!target_used[t]) map.omitted_features.push_back(target.features()[t].name);
  }
  if (map.mapped() == 0) {
    throw Error(ErrorCode::NoSharedFeatures,
                "schemas '" + original.name() + "' and '" + target.name() + "' share no features");
  }
  return map;
}

Eigen::VectorXd align_sample(const Eigen::VectorXd& target, const FeatureAlignmentMap& map) {
  if (static_cast<std::size_t>(target.size()) != map.target_width) {
    throw Error(ErrorCode::InvalidShape, "target sample has width " + std::to_string(target.size()) +
                                             ", alignment expects " + std::to_string(map.target_width));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.original_width));
  for (std::size_t p = 0; p < map.original_width; ++p) {
    if (map.source[p]) out[static_cast<Eigen::Index>(p)] = target[static_cast<Eigen::Index>(*map.source[p])];
  }
  return out;
}

dataio::Dataset align_dataset(const dataio::Dataset& target, const FeatureAlignmentMap& map) {
  dataio::Dataset out;
  out.reserve(target.size());
  for (const auto& s : target) out.push_back({align_sample(s.features, map), s.label});
  return out;
}

dataio::PreprocessorState derive_target_preprocessor(const dataio::PreprocessorState& original,
                                                     const dataio::DatasetSchema& target,
                                                     const FeatureAlignmentMap& map,
                                                     const std::vector<dataio::RawRecord>& target_records) {
  std::vector<dataio::NumericRange> ranges(target.features().size());
  if (!target_records.empty()) ranges = dataio::fit_preprocessor(target_records, target).ranges();
  const auto& ofeatures = original.schema().features();
  for (std::size_t f = 0; f < map.feature_source.size() && f < ofeatures.size(); ++f) {
    if (map.feature_source[f] && ofeatures[f].kind == FeatureKind::Numeric) {
      ranges[*map.feature_source[f]] = original.ranges()[f];
    }
  }
  return dataio::PreprocessorState(target, std::move(ranges));
}

TransferReport transfer_evaluate(const model::ContrastiveModel& model, const FeatureAlignmentMap& map,
                                 const dataio::Dataset& target_train, const dataio::Dataset& target_test,
                                 std::size_t num_classes, const contrastive::HeadConfig& config) {
  if (static_cast<std::size_t>(model.encoder.config().input_width) != map.original_width) {
    throw Error(ErrorCode::InvalidShape, "alignment width " + std::to_string(map.original_width) +
                                             " does not match the encoder input width " +
                                             std::to_string(model.encoder.config().input_width));
  }
  const auto train = align_dataset(target_train, map);
  const auto test = align_dataset(target_test, map);
  const auto head = contrastive::train_head(model, train, num_classes, config).head;
  const auto labels = contrastive::require_labels(test);
  const auto preds = contrastive::predict(model, head, config.representation, test);

  TransferReport r;
  r.metrics = eval::metrics(eval::confusion(preds, labels, num_classes));
  r.mapped = map.mapped();
  r.masked = map.masked();
  r.omitted = map.omitted();
  r.masked_features = map.masked_features;
  r.omitted_features = map.omitted_features;
  return r;
}

std::string to_json(const TransferReport& report, const std::vector<std::string>& class_names) {
  auto j = nlohmann::ordered_json::parse(eval::to_json(report.metrics, class_names));
  j["alignment"] = {{"mapped_positions", report.mapped},
                    {"masked_positions", report.masked},
                    {"omitted_positions", report.omitted},
                    {"masked_features", report.masked_features},
                    {"omitted_features", report.omitted_features}};
  return j.dump(2);
}

}  // namespace sscl::transfer
