#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sscl::dataio {

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::string> vocabulary;  // categorical only, in encoding order
};

struct ClassSpec {
  std::string name;
  std::vector<std::string> aliases;  // alternative spellings accepted in data and filters
};

// Position of one feature inside the encoded vector.
struct FeatureSlot {
  std::size_t feature = 0;
  std::size_t offset = 0;
  std::size_t width = 0;
};

// Declarative description of one flow-record dataset. Vocabularies come from
// here rather than from the data, so the encoded width is known up front.
class DatasetSchema {
 public:
  static constexpr int kVersion = 1;

  DatasetSchema() = default;
  DatasetSchema(std::string name, std::vector<FeatureSpec> features, std::string label_column,
                std::vector<ClassSpec> classes);

  const std::string& name() const { return name_; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const std::string& label_column() const { return label_column_; }
  const std::vector<ClassSpec>& classes() const { return classes_; }
  std::vector<std::string> class_names() const;

  // Class assigned to rows whose label cell is empty (the raw UNSW-NB15 files
  // leave attack_cat blank for benign traffic).
  const std::optional<std::string>& blank_label() const { return blank_label_; }
  void set_blank_label(std::optional<std::string> name) { blank_label_ = std::move(name); }

  // Value substituted for an empty numeric cell; unset means empty cells are
  // parse errors.
  const std::optional<double>& blank_numeric() const { return blank_numeric_; }
  void set_blank_numeric(std::optional<double> v) { blank_numeric_ = v; }

  // Class treated as benign when collapsing to a binary task.
  const std::string& normal_class() const { return normal_class_; }
  void set_normal_class(std::string name) { normal_class_ = std::move(name); }

  std::size_t encoded_width() const;
  std::vector<FeatureSlot> layout() const;
  std::size_t numeric_count() const;

  std::optional<std::size_t> find_feature(const std::string& name) const;  // case-insensitive
  std::optional<int> find_class(const std::string& name) const;            // name or alias, case-insensitive

  // Canonical JSON text; the fingerprint is its SHA-256.
  std::string to_json() const;
  std::string fingerprint() const;

  static DatasetSchema from_json(const std::string& text);
  static DatasetSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  void validate() const;

  std::string name_;
  std::vector<FeatureSpec> features_;
  std::string label_column_;
  std::vector<ClassSpec> classes_;
  std::optional<std::string> blank_label_;
  std::optional<double> blank_numeric_;
  std::string normal_class_ = "Normal";
};

// Lowercase + trim, used for every name comparison in the data layer.
std::string normalize_name(std::string_view s);

}  // namespace sscl::dataio
