#pragma once

#include "sscl/contrastive/train.hpp"
#include "sscl/dataio/preprocess.hpp"
#include "sscl/dataio/schema.hpp"
#include "sscl/eval/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sscl::transfer {

// Renamed features across datasets: original name -> target name, keys and
// values normalized. Text form is one "original = target" per line; '#'
// starts a comment.
class AliasTable {
 public:
  AliasTable() = default;

  void add(const std::string& original, const std::string& target);  // throws Error{Config} on a duplicate
  std::string target_name(const std::string& original) const;        // identity when not aliased
  std::size_t size() const { return map_.size(); }

  static AliasTable parse(const std::string& text);
  static AliasTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> map_;
};

// For every encoder-input position, the target encoded position it reads, or
// nothing (masked).
struct FeatureAlignmentMap {
  std::size_t original_width = 0;
  std::size_t target_width = 0;
  std::vector<std::optional<std::size_t>> source;
  // Per original feature, the matched target feature.
  std::vector<std::optional<std::size_t>> feature_source;
  std::vector<std::string> masked_features;   // original features with no counterpart
  std::vector<std::string> omitted_features;  // target features nothing reads

  std::size_t mapped() const;
  std::size_t masked() const { return original_width - mapped(); }
  std::size_t omitted() const;  // target positions nothing reads
};

// Features match by normalized name (after aliasing) and kind; one-hot
// positions match per category string. Throws Error{NoSharedFeatures} when no
// position maps.
FeatureAlignmentMap build_alignment(const dataio::DatasetSchema& original, const dataio::DatasetSchema& target,
                                    const AliasTable& aliases = {});

// Copies mapped positions, zeroes the rest. Throws Error{InvalidShape} if the
// sample width differs from map.target_width.
Eigen::VectorXd align_sample(const Eigen::VectorXd& target, const FeatureAlignmentMap& map);
dataio::Dataset align_dataset(const dataio::Dataset& target, const FeatureAlignmentMap& map);

// Target-schema preprocessor whose shared numeric features use the original
// dataset's ranges. Target-only numerics, which alignment drops anyway, are
// fitted on `target_records` (or left degenerate when none are given).
dataio::PreprocessorState derive_target_preprocessor(const dataio::PreprocessorState& original,
                                                     const dataio::DatasetSchema& target,
                                                     const FeatureAlignmentMap& map,
                                                     const std::vector<dataio::RawRecord>& target_records = {});

struct TransferReport {
  eval::MetricsReport metrics;
  std::size_t mapped = 0;
  std::size_t masked = 0;
  std::size_t omitted = 0;
  std::vector<std::string> masked_features;
  std::vector<std::string> omitted_features;
};

// Aligns both target splits, trains a fresh head on the frozen encoder's
// representation of the training split and evaluates it on the test split.
TransferReport transfer_evaluate(const model::ContrastiveModel& model, const FeatureAlignmentMap& map,
                                 const dataio::Dataset& target_train, const dataio::Dataset& target_test,
                                 std::size_t num_classes, const contrastive::HeadConfig& config);

std::string to_json(const TransferReport& report, const std::vector<std::string>& class_names);

}  // namespace sscl::transfer
