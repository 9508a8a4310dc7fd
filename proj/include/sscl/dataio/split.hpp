#pragma once

#include "sscl/dataio/preprocess.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sscl::dataio {

enum class SplitRole { EncoderSet, HeadSet };

struct SplitSpec {
  SplitRole role = SplitRole::HeadSet;
  double fraction = 1.0;  // per class, in (0, 1]
  std::uint64_t seed = 0;
};

// Keeps max(1, round(fraction * n_c)) samples of every class c, chosen
// uniformly without replacement; survivors keep their original order.
// Throws Error{MissingLabel} if any sample is unlabeled.
Dataset stratified_subsample(const Dataset& samples, const SplitSpec& spec);

// Number of samples per class (labels must be present).
std::vector<std::size_t> label_counts(const Dataset& samples, std::size_t num_classes);

struct FilteredDataset {
  Dataset samples;
  std::vector<std::string> class_names;  // keep-list order
};

// Keeps only the named classes and relabels them 0..K-1 in keep-list order.
// Names are resolved against `schema` (aliases allowed); unknown names throw
// Error{UnknownClass}.
FilteredDataset filter_classes(const Dataset& samples, const DatasetSchema& schema,
                               const std::vector<std::string>& keep);

// Normal -> 0, every other class -> 1.
FilteredDataset to_binary(const Dataset& samples, const DatasetSchema& schema);

// Random split into (first, second) with round(fraction * n) samples in the
// first part; both parts keep the original relative order. When `stratified`
// is set the split is done per class.
std::pair<Dataset, Dataset> split_dataset(const Dataset& samples, double fraction, std::uint64_t seed,
                                          bool stratified);

}  // namespace sscl::dataio
