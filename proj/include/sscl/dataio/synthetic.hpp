#pragma once

#include "sscl/dataio/csv.hpp"
#include "sscl/dataio/schema.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sscl::dataio {

// Gaussian blobs in feature space, one per class, for desk-scale runs.
// Raw values are scaled by `value_scale` so the min-max step has real work.
struct BlobOptions {
  std::size_t samples = 2000;
  std::size_t features = 16;
  std::size_t classes = 2;
  double spread = 0.05;        // per-feature standard deviation in unit space
  double min_separation = 0.6; // minimum Euclidean distance between class centres
  double value_scale = 100.0;
  std::uint64_t seed = 0;
};

// Numeric features "f0".."f{n-1}", label column "class", classes
// "Normal", "Attack1", ... (class 0 is the benign one).
DatasetSchema blob_schema(std::size_t features, std::size_t classes, const std::string& name = "synthetic-blobs");

// Balanced classes (round-robin labels); deterministic in `seed`.
std::vector<RawRecord> generate_blobs(const BlobOptions& options);

// Same schema minus the named features.
DatasetSchema drop_features(const DatasetSchema& schema, const std::vector<std::string>& names,
                            const std::string& new_name);

// Re-expresses records of `from` in the feature order of `to` (matched by
// name). Every feature of `to` must exist in `from`.
std::vector<RawRecord> project_records(const std::vector<RawRecord>& records, const DatasetSchema& from,
                                       const DatasetSchema& to);

// Header + one row per record, numbers printed with round-trip precision.
void write_csv(std::ostream& out, const DatasetSchema& schema, const std::vector<RawRecord>& records);
void write_csv(const std::filesystem::path& path, const DatasetSchema& schema, const std::vector<RawRecord>& records);

}  // namespace sscl::dataio
