#pragma once

#include "sscl/dataio/preprocess.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sscl::dataio {

// Encoded dataset persisted in the tensor container format: tensor
// "features" [n, width], tensor "labels" [n] (-1 for unlabeled) and a JSON
// metadata header carrying class names and the schema fingerprint.
struct EncodedDataset {
  Dataset samples;
  std::vector<std::string> class_names;
  std::string schema_fingerprint;

  std::size_t width() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().features.size()); }
};

void save_encoded(const std::filesystem::path& path, const EncodedDataset& data);
EncodedDataset load_encoded(const std::filesystem::path& path);

}  // namespace sscl::dataio
