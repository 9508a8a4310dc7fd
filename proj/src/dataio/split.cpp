#include "sscl/dataio/split.hpp"

#include "sscl/error.hpp"
#include "sscl/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sscl::dataio {

namespace {

void require_labels(const Dataset& samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].label) throw Error(ErrorCode::MissingLabel, "sample " + std::to_string(i) + " has no label");
  }
}

std::map<int, std::vector<std::size_t>> indices_by_class(const Dataset& samples) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[*samples[i].label].push_back(i);
  return by_class;
}

Dataset gather(const Dataset& samples, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  Dataset out;
  out.reserve(indices.size());
  for (const auto i : indices) out.push_back(samples[i]);
  return out;
}

}  // namespace

Dataset stratified_subsample(const Dataset& samples, const SplitSpec& spec) {
  if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
    throw Error(ErrorCode::Config, "subsample fraction must be in (0, 1]");
  }
  require_labels(samples);
  Rng rng(derive_seed(spec.seed, "subsample"));
  std::vector<std::size_t> chosen;
  for (const auto& [label, idx] : indices_by_class(samples)) {
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.fraction * double(idx.size()))));
    for (const auto pick : sample_without_replacement(rng, idx.size(), std::min(want, idx.size()))) {
      chosen.push_back(idx[pick]);
    }
  }
  return gather(samples, std::move(chosen));
}

std::vector<std::size_t> label_counts(const Dataset& samples, std::size_t num_classes) {
  require_labels(samples);
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& s : samples) {
    if (*s.label < 0 || static_cast<std::size_t>(*s.label) >= num_classes) {
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(*s.label) + " out of range");
    }
    ++counts[*s.label];
  }
  return counts;
}

FilteredDataset filter_classes(const Dataset& samples, const DatasetSchema& schema,
                               const std::vector<std::string>& keep) {
  std::map<int, int> remap;
  FilteredDataset out;
  for (const auto& name : keep) {
    const auto cls = schema.find_class(name);
    if (!cls) throw Error(ErrorCode::UnknownClass, "unknown class '" + name + "'");
    if (remap.contains(*cls)) continue;
    remap[*cls] = static_cast<int>(out.class_names.size());
    out.class_names.push_back(schema.classes()[*cls].name);
  }
  require_labels(samples);
  for (const auto& s : samples) {
    const auto it = remap.find(*s.label);
    if (it == remap.end()) continue;
    out.samples.push_back({s.features, it->second});
  }
  return out;
}

FilteredDataset to_binary(const Dataset& samples, const DatasetSchema& schema) {
  const auto normal = schema.find_class(schema.normal_class());
  if (!normal) throw Error(ErrorCode::UnknownClass, "schema has no class '" + schema.normal_class() + "'");
  require_labels(samples);
  FilteredDataset out;
  out.class_names = {schema.classes()[*normal].name, "Attack"};
  out.samples.reserve(samples.size());
  for (const auto& s : samples) out.samples.push_back({s.features, *s.label == *normal ? 0 : 1});
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& samples, double fraction, std::uint64_t seed,
                                          bool stratified) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::Config, "split fraction must be in [0, 1]");
  Rng rng(derive_seed(seed, "split"));
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    require_labels(samples);
    for (auto& [label, idx] : indices_by_class(samples)) groups.push_back(std::move(idx));
  } else {
    std::vector<std::size_t> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups.push_back(std::move(all));
  }
  std::vector<std::size_t> first, second;
  for (auto& idx : groups) {
    shuffle(idx, rng);
    const auto n_first = static_cast<std::size_t>(std::llround(fraction * double(idx.size())));
    first.insert(first.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_first));
    second.insert(second.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_first), idx.end());
  }
  return {gather(samples, std::move(first)), gather(samples, std::move(second))};
}

}  // namespace sscl::dataio
