#include "sscl/dataio/csv.hpp"

#include "sscl/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace sscl::dataio {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Reads one logical CSV record, joining physical lines while a quote is open.
bool read_record(std::istream& in, std::string& record) {
  record.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  record = line;
  std::size_t quotes = static_cast<std::size_t>(std::count(line.begin(), line.end(), '"'));
  while (quotes % 2 == 1 && std::getline(in, line)) {
    record += '\n';
    record += line;
    quotes += static_cast<std::size_t>(std::count(line.begin(), line.end(), '"'));
  }
  return true;
}

}  // namespace

bool split_csv_line(const std::string& line, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' || i + 1 != line.size()) {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return !quoted;
}

std::vector<RawRecord> load_csv(std::istream& in, const DatasetSchema& schema) {
  std::string line;
  std::vector<std::string> fields;
  if (!read_record(in, line)) throw Error(ErrorCode::SchemaMismatch, "CSV has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!split_csv_line(line, fields)) throw Error(ErrorCode::SchemaMismatch, "unterminated quote in header");

  const auto& features = schema.features();
  std::vector<std::optional<std::size_t>> column_of(features.size());
  std::optional<std::size_t> label_col;
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const std::string key = normalize_name(fields[c]);
    if (key == normalize_name(schema.label_column())) {
      label_col = c;
    } else if (const auto f = schema.find_feature(key)) {
      column_of[*f] = c;
    }
  }
  std::string missing;
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (!column_of[f]) missing += (missing.empty() ? "" : ", ") + features[f].name;
  }
  if (!label_col) missing += (missing.empty() ? "" : ", ") + schema.label_column();
  if (!missing.empty()) throw Error(ErrorCode::SchemaMismatch, "CSV is missing column(s): " + missing);

  const std::size_t columns = fields.size();
  std::vector<RawRecord> records;
  std::size_t row = 0;
  while (read_record(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    if (!split_csv_line(line, fields)) throw ParseError(row, "unterminated quoted field");
    if (fields.size() != columns) {
      throw ParseError(row, "expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.numeric.assign(features.size(), 0.0);
    rec.category.assign(features.size(), std::string());
    for (std::size_t f = 0; f < features.size(); ++f) {
      const std::string& cell = fields[*column_of[f]];
      if (features[f].kind == FeatureKind::Numeric) {
        auto v = parse_double(cell);
        if (!v && trim(cell).empty()) v = schema.blank_numeric();
        if (!v) throw ParseError(row, "column '" + features[f].name + "': cannot parse '" + cell + "' as a number");
        rec.numeric[f] = *v;
      } else {
        rec.category[f] = std::string(trim(cell));
      }
    }
    std::string label(trim(fields[*label_col]));
    if (label.empty() && schema.blank_label()) label = *schema.blank_label();
    const auto cls = schema.find_class(label);
    if (!cls) throw ParseError(row, "unknown class label '" + label + "'");
    rec.label = *cls;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return load_csv(in, schema);
}

std::vector<std::size_t> class_counts(const std::vector<RawRecord>& records, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& r : records) {
    if (r.label && *r.label >= 0 && static_cast<std::size_t>(*r.label) < num_classes) ++counts[*r.label];
  }
  return counts;
}

}  // namespace sscl::dataio
