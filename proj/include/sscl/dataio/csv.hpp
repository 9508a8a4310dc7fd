#pragma once

#include "sscl/dataio/schema.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace sscl::dataio {

// One parsed flow record. Values are stored per schema feature, in schema
// order: numeric features use `numeric`, categorical ones use `category`.
struct RawRecord {
  std::vector<double> numeric;
  std::vector<std::string> category;
  std::optional<int> label;  // class index into the schema's class list
};

// Splits one CSV line into fields (RFC 4180 quoting, "" escapes a quote).
// Returns false if a quoted field is left open.
bool split_csv_line(const std::string& line, std::vector<std::string>& fields);

// Reads a header row and then one record per line. Header names are matched
// against the schema case-insensitively and in any order; extra columns are
// ignored. Throws Error{SchemaMismatch} on missing columns and ParseError with
// the 1-based data-row index on malformed rows.
std::vector<RawRecord> load_csv(std::istream& in, const DatasetSchema& schema);
std::vector<RawRecord> load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

// Number of records per class, indexed like schema.classes().
std::vector<std::size_t> class_counts(const std::vector<RawRecord>& records, std::size_t num_classes);

}  // namespace sscl::dataio
