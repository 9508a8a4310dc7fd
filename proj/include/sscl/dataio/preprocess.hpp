#pragma once

#include "sscl/dataio/csv.hpp"
#include "sscl/dataio/schema.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sscl::dataio {

struct EncodedSample {
  Eigen::VectorXd features;
  std::optional<int> label;
};

using Dataset = std::vector<EncodedSample>;

struct NumericRange {
  double min = 0.0;
  double max = 0.0;

  bool degenerate() const { return min == max; }
};

// Counters filled in by transform(); unseen categories are not errors.
struct TransformStats {
  std::size_t masked_missing = 0;  // "-" cells
  std::size_t unseen_category = 0;
};

// Min/max ranges fitted on training records, plus the frozen schema they
// apply to. Immutable after fitting.
class PreprocessorState {
 public:
  static constexpr int kVersion = 1;

  PreprocessorState(DatasetSchema schema, std::vector<NumericRange> ranges);

  const DatasetSchema& schema() const { return schema_; }
  // One entry per schema feature; categorical entries are unused {0, 0}.
  const std::vector<NumericRange>& ranges() const { return ranges_; }
  std::size_t encoded_width() const { return schema_.encoded_width(); }
  std::vector<std::string> degenerate_features() const;

  // Category index within a categorical feature's vocabulary (case-insensitive).
  std::optional<std::size_t> category_index(std::size_t feature, const std::string& value) const;

  std::string to_json() const;
  static PreprocessorState from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static PreprocessorState load(const std::filesystem::path& path);

 private:
  DatasetSchema schema_;
  std::vector<NumericRange> ranges_;
  std::vector<std::unordered_map<std::string, std::size_t>> vocab_index_;
};

// Per-numeric-feature min/max over `records`; throws Error{EmptyDataset}.
PreprocessorState fit_preprocessor(const std::vector<RawRecord>& records, const DatasetSchema& schema);

// Numeric: (x - min) / (max - min) clipped to [0, 1], 0 for a degenerate range.
// Categorical: one-hot over the schema vocabulary; "-" and unseen values give
// an all-zero block.
EncodedSample transform(const RawRecord& record, const PreprocessorState& state, TransformStats* stats = nullptr);
Dataset transform_all(const std::vector<RawRecord>& records, const PreprocessorState& state,
                      TransformStats* stats = nullptr);

// Literal cell value that is masked after one-hot encoding.
inline constexpr std::string_view kMissingCategory = "-";

}  // namespace sscl::dataio
