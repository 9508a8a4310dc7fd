#include "sscl/dataio/synthetic.hpp"

#include "sscl/error.hpp"
#include "sscl/io.hpp"
#include "sscl/random.hpp"

#include <Eigen/Core>

#include <charconv>
#include <sstream>

namespace sscl::dataio {

DatasetSchema blob_schema(std::size_t features, std::size_t classes, const std::string& name) {
  std::vector<FeatureSpec> feats;
  for (std::size_t i = 0; i < features; ++i) feats.push_back({"f" + std::to_string(i), FeatureKind::Numeric, {}});
  std::vector<ClassSpec> cls{{"Normal", {}}};
  for (std::size_t c = 1; c < classes; ++c) cls.push_back({"Attack" + std::to_string(c), {}});
  return DatasetSchema(name, std::move(feats), "class", std::move(cls));
}

std::vector<RawRecord> generate_blobs(const BlobOptions& o) {
  if (o.classes < 1 || o.features < 1) throw Error(ErrorCode::Config, "blob generator needs >= 1 class and feature");
  Rng rng(derive_seed(o.seed, "blobs"));
  const auto d = static_cast<Eigen::Index>(o.features);
  std::vector<Eigen::VectorXd> centres;
  for (int attempt = 0; centres.size() < o.classes; ++attempt) {
    if (attempt > 10000) throw Error(ErrorCode::Config, "cannot place blob centres with the requested separation");
    Eigen::VectorXd c(d);
    for (Eigen::Index j = 0; j < d; ++j) c[j] = uniform(rng, 0.15, 0.85);
    bool ok = true;
    for (const auto& other : centres) ok = ok && (other - c).norm() >= o.min_separation;
    if (ok) centres.push_back(std::move(c));
  }
  std::vector<RawRecord> records;
  records.reserve(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) {
    const std::size_t cls = i % o.classes;
    RawRecord r;
    r.numeric.resize(o.features);
    r.category.resize(o.features);
    for (std::size_t j = 0; j < o.features; ++j) {
      r.numeric[j] = o.value_scale * (centres[cls][static_cast<Eigen::Index>(j)] + o.spread * standard_normal(rng));
    }
    r.label = static_cast<int>(cls);
    records.push_back(std::move(r));
  }
  return records;
}

DatasetSchema drop_features(const DatasetSchema& schema, const std::vector<std::string>& names,
                            const std::string& new_name) {
  std::vector<FeatureSpec> kept;
  for (const auto& f : schema.features()) {
    bool drop = false;
    for (const auto& n : names) drop = drop || normalize_name(n) == normalize_name(f.name);
    if (!drop) kept.push_back(f);
  }
  DatasetSchema out(new_name, std::move(kept), schema.label_column(), schema.classes());
  out.set_normal_class(schema.normal_class());
  out.set_blank_label(schema.blank_label());
  out.set_blank_numeric(schema.blank_numeric());
  return out;
}

std::vector<RawRecord> project_records(const std::vector<RawRecord>& records, const DatasetSchema& from,
                                       const DatasetSchema& to) {
  std::vector<std::size_t> source;
  for (const auto& f : to.features()) {
    const auto idx = from.find_feature(f.name);
    if (!idx) throw Error(ErrorCode::SchemaMismatch, "feature '" + f.name + "' missing from source schema");
    source.push_back(*idx);
  }
  std::vector<RawRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    RawRecord p;
    p.label = r.label;
    for (const auto s : source) {
      p.numeric.push_back(r.numeric.at(s));
      p.category.push_back(r.category.at(s));
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

void write_csv(std::ostream& out, const DatasetSchema& schema, const std::vector<RawRecord>& records) {
  const auto& features = schema.features();
  for (const auto& f : features) out << quote_if_needed(f.name) << ',';
  out << quote_if_needed(schema.label_column()) << '\n';
  for (const auto& r : records) {
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (features[f].kind == FeatureKind::Numeric) {
        out << format_double(r.numeric.at(f));
      } else {
        out << quote_if_needed(r.category.at(f));
      }
      out << ',';
    }
    if (r.label) out << quote_if_needed(schema.classes().at(static_cast<std::size_t>(*r.label)).name);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const DatasetSchema& schema, const std::vector<RawRecord>& records) {
  std::ostringstream os;
  write_csv(os, schema, records);
  write_file_atomic(path, os.str());
}

}  // namespace sscl::dataio
