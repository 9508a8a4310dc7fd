#include "sscl/dataio/schema.hpp"

#include "sscl/error.hpp"
#include "sscl/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace sscl::dataio {

using nlohmann::json;

std::string normalize_name(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

DatasetSchema::DatasetSchema(std::string name, std::vector<FeatureSpec> features, std::string label_column,
                             std::vector<ClassSpec> classes)
    : name_(std::move(name)),
      features_(std::move(features)),
      label_column_(std::move(label_column)),
      classes_(std::move(classes)) {
  validate();
}

void DatasetSchema::validate() const {
  if (features_.empty()) throw Error(ErrorCode::SchemaMismatch, "schema '" + name_ + "' has no features");
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (!seen.insert(normalize_name(f.name)).second) {
      throw Error(ErrorCode::SchemaMismatch, "duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::Categorical) {
      if (f.vocabulary.empty()) throw Error(ErrorCode::SchemaMismatch, "feature '" + f.name + "' has no vocabulary");
      std::set<std::string> vocab;
      for (const auto& v : f.vocabulary) {
        if (!vocab.insert(normalize_name(v)).second) {
          throw Error(ErrorCode::SchemaMismatch, "duplicate category '" + v + "' in '" + f.name + "'");
        }
      }
    } else if (!f.vocabulary.empty()) {
      throw Error(ErrorCode::SchemaMismatch, "numeric feature '" + f.name + "' has a vocabulary");
    }
  }
  if (label_column_.empty()) throw Error(ErrorCode::SchemaMismatch, "schema has no label column");
  if (seen.contains(normalize_name(label_column_))) {
    throw Error(ErrorCode::SchemaMismatch, "label column '" + label_column_ + "' is also a feature");
  }
  if (classes_.empty()) throw Error(ErrorCode::SchemaMismatch, "schema has no classes");
  std::set<std::string> names;
  for (const auto& c : classes_) {
    if (!names.insert(normalize_name(c.name)).second) {
      throw Error(ErrorCode::SchemaMismatch, "duplicate class '" + c.name + "'");
    }
    for (const auto& a : c.aliases) {
      if (!names.insert(normalize_name(a)).second) {
        throw Error(ErrorCode::SchemaMismatch, "duplicate class alias '" + a + "'");
      }
    }
  }
}

std::vector<std::string> DatasetSchema::class_names() const {
  std::vector<std::string> out;
  for (const auto& c : classes_) out.push_back(c.name);
  return out;
}

std::size_t DatasetSchema::encoded_width() const {
  std::size_t w = 0;
  for (const auto& f : features_) w += f.kind == FeatureKind::Numeric ? 1 : f.vocabulary.size();
  return w;
}

std::vector<FeatureSlot> DatasetSchema::layout() const {
  std::vector<FeatureSlot> slots;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const std::size_t w = features_[i].kind == FeatureKind::Numeric ? 1 : features_[i].vocabulary.size();
    slots.push_back({i, offset, w});
    offset += w;
  }
  return slots;
}

std::size_t DatasetSchema::numeric_count() const {
  return static_cast<std::size_t>(std::count_if(features_.begin(), features_.end(),
                                                [](const FeatureSpec& f) { return f.kind == FeatureKind::Numeric; }));
}

std::optional<std::size_t> DatasetSchema::find_feature(const std::string& name) const {
  const std::string key = normalize_name(name);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (normalize_name(features_[i].name) == key) return i;
  }
  return std::nullopt;
}

std::optional<int> DatasetSchema::find_class(const std::string& name) const {
  const std::string key = normalize_name(name);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (normalize_name(classes_[i].name) == key) return static_cast<int>(i);
    for (const auto& a : classes_[i].aliases) {
      if (normalize_name(a) == key) return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::string DatasetSchema::to_json() const {
  json j;
  j["format"] = "sscl-schema";
  j["version"] = kVersion;
  j["name"] = name_;
  j["label_column"] = label_column_;
  j["normal_class"] = normal_class_;
  if (blank_label_) j["blank_label"] = *blank_label_;
  if (blank_numeric_) j["blank_numeric"] = *blank_numeric_;
  json classes = json::array();
  for (const auto& c : classes_) {
    if (c.aliases.empty()) {
      classes.push_back(c.name);
    } else {
      classes.push_back({{"name", c.name}, {"aliases", c.aliases}});
    }
  }
  j["classes"] = classes;
  json feats = json::array();
  for (const auto& f : features_) {
    if (f.kind == FeatureKind::Numeric) {
      feats.push_back({{"name", f.name}, {"kind", "numeric"}});
    } else {
      feats.push_back({{"name", f.name}, {"kind", "categorical"}, {"vocabulary", f.vocabulary}});
    }
  }
  j["features"] = feats;
  return j.dump(1);
}

std::string DatasetSchema::fingerprint() const { return sha256_hex(to_json()); }

DatasetSchema DatasetSchema::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("schema is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "sscl-schema") throw Error(ErrorCode::SchemaMismatch, "not an sscl-schema document");
    const int version = j.at("version").get<int>();
    if (version != kVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported schema version " + std::to_string(version));
    }
    std::vector<FeatureSpec> features;
    for (const auto& f : j.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      const auto kind = f.at("kind").get<std::string>();
      if (kind == "numeric") {
        spec.kind = FeatureKind::Numeric;
      } else if (kind == "categorical") {
        spec.kind = FeatureKind::Categorical;
        spec.vocabulary = f.at("vocabulary").get<std::vector<std::string>>();
      } else {
        throw Error(ErrorCode::SchemaMismatch, "unknown feature kind '" + kind + "'");
      }
      features.push_back(std::move(spec));
    }
    std::vector<ClassSpec> classes;
    for (const auto& c : j.at("classes")) {
      if (c.is_string()) {
        classes.push_back({c.get<std::string>(), {}});
      } else {
        classes.push_back({c.at("name").get<std::string>(), c.value("aliases", std::vector<std::string>{})});
      }
    }
    DatasetSchema schema(j.at("name").get<std::string>(), std::move(features), j.at("label_column").get<std::string>(),
                         std::move(classes));
    schema.set_normal_class(j.value("normal_class", std::string("Normal")));
    if (j.contains("blank_label")) schema.set_blank_label(j.at("blank_label").get<std::string>());
    if (j.contains("blank_numeric")) schema.set_blank_numeric(j.at("blank_numeric").get<double>());
    return schema;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("malformed schema: ") + e.what());
  }
}

DatasetSchema DatasetSchema::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

void DatasetSchema::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json() + "\n"); }

}  // namespace sscl::dataio
