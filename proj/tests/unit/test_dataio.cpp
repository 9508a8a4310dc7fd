#include <doctest.h>

#include "sscl/dataio/csv.hpp"
#include "sscl/dataio/dataset_file.hpp"
#include "sscl/dataio/preprocess.hpp"
#include "sscl/dataio/split.hpp"
#include "sscl/dataio/synthetic.hpp"
#include "sscl/error.hpp"
#include "sscl/random.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace sscl;
using namespace sscl::dataio;

namespace {

const std::filesystem::path kSchemaDir = SSCL_SOURCE_DIR "/schemas";

DatasetSchema toy_schema() {
  return DatasetSchema("toy",
                       {{"bytes", FeatureKind::Numeric, {}},
                        {"service", FeatureKind::Categorical, {"-", "http", "dns"}},
                        {"rate", FeatureKind::Numeric, {}}},
                       "attack_cat", {{"Normal", {}}, {"Exploits", {"Exploit"}}, {"DoS", {}}});
}

std::vector<RawRecord> parse(const std::string& text, const DatasetSchema& schema = toy_schema()) {
  std::istringstream in(text);
  return load_csv(in, schema);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an sscl::Error");
  return ErrorCode::Io;
}

Dataset labeled(const std::vector<std::pair<int, std::size_t>>& class_sizes) {
  Dataset d;
  for (const auto& [label, n] : class_sizes) {
    for (std::size_t i = 0; i < n; ++i) d.push_back({Eigen::VectorXd::Constant(2, double(d.size())), label});
  }
  return d;
}

}  // namespace

TEST_SUITE("schema") {
  TEST_CASE("encoded width is computable without data") {
    CHECK(toy_schema().encoded_width() == 5);
    const auto layout = toy_schema().layout();
    REQUIRE(layout.size() == 3);
    CHECK(layout[1].offset == 1);
    CHECK(layout[1].width == 3);
    CHECK(layout[2].offset == 4);
  }

  TEST_CASE("shipped UNSW-NB15 schemas") {
    const auto small = DatasetSchema::load(kSchemaDir / "unsw-nb15-smaller-pack.json");
    CHECK(small.encoded_width() == 196);
    CHECK(small.numeric_count() == 39);
    CHECK(small.features()[*small.find_feature("service")].vocabulary.size() == 13);
    CHECK(small.classes().size() == 10);
    const auto large = DatasetSchema::load(kSchemaDir / "unsw-nb15-larger-pack.json");
    CHECK(large.classes().size() == 10);
    for (const char* name : {"cic-ids2017-template.json", "cidds-001-template.json", "bot-iot-template.json"}) {
      CHECK_NOTHROW(DatasetSchema::load(kSchemaDir / name));
    }
  }

  TEST_CASE("invalid schemas are rejected") {
    CHECK(code_of([] {
            DatasetSchema("x", {{"a", FeatureKind::Numeric, {}}, {"A", FeatureKind::Numeric, {}}}, "y", {{"c", {}}});
          }) == ErrorCode::SchemaMismatch);
    CHECK(code_of([] { DatasetSchema("x", {{"a", FeatureKind::Categorical, {"p", "p"}}}, "y", {{"c", {}}}); }) ==
          ErrorCode::SchemaMismatch);
    CHECK(code_of([] { DatasetSchema::from_json(R"({"format":"sscl-schema","version":2})"); }) ==
          ErrorCode::SchemaMismatch);
  }

  TEST_CASE("json round trip keeps the fingerprint") {
    auto s = toy_schema();
    s.set_blank_label("Normal");
    s.set_blank_numeric(0.0);
    const auto back = DatasetSchema::from_json(s.to_json());
    CHECK(back.fingerprint() == s.fingerprint());
    CHECK(back.blank_label() == s.blank_label());
    CHECK(back.find_class("exploit") == 1);
  }
}

TEST_SUITE("load_csv") {
  TEST_CASE("well-formed file with reordered and extra columns") {
    const auto recs = parse(
        "id,rate,attack_cat,service,bytes\n"
        "1,0.5,Normal,http,10\n"
        "2,1.5,\" Exploits\",-,20\n"
        "3,2.5,dos,dns,30\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].numeric[0] == 10);
    CHECK(recs[0].numeric[2] == 0.5);
    CHECK(recs[1].category[1] == "-");
    CHECK(recs[1].label == 1);
    CHECK(recs[2].label == 2);
  }

  TEST_CASE("quoted fields with commas and escaped quotes") {
    std::vector<std::string> fields;
    CHECK(split_csv_line(R"(a,"b,c","say ""hi""",)", fields));
    REQUIRE(fields.size() == 4);
    CHECK(fields[1] == "b,c");
    CHECK(fields[2] == "say \"hi\"");
    CHECK(fields[3].empty());
    CHECK_FALSE(split_csv_line(R"(a,"open)", fields));
  }

  TEST_CASE("missing label column") {
    CHECK(code_of([] { parse("bytes,service,rate\n1,http,2\n"); }) == ErrorCode::SchemaMismatch);
  }

  TEST_CASE("malformed rows report their row index") {
    try {
      parse("bytes,service,rate,attack_cat\n1,http,2,Normal\n1,http,oops,Normal\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
    }
    try {
      parse("bytes,service,rate,attack_cat\n1,http,2\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 1);
    }
    CHECK(code_of([] { parse("bytes,service,rate,attack_cat\n1,http,2,Martian\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse("bytes,service,rate,attack_cat\n,http,2,Normal\n"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("blank label and blank numeric substitutions") {
    auto schema = toy_schema();
    schema.set_blank_label("Normal");
    schema.set_blank_numeric(0.0);
    const auto recs = parse("bytes,service,rate,attack_cat\n,http,2,\n", schema);
    CHECK(recs[0].numeric[0] == 0.0);
    CHECK(recs[0].label == 0);
  }

  TEST_CASE("missing file") {
    CHECK(code_of([] { load_csv(std::filesystem::path("/nonexistent/x.csv"), toy_schema()); }) == ErrorCode::Io);
  }

  // Runs only when the UNSW-NB15 training CSV is supplied.
  TEST_CASE("UNSW-NB15 smaller-pack training file class counts" * doctest::skip(std::getenv("SSCL_UNSW_SMALL_TRAIN") == nullptr)) {
    const auto schema = DatasetSchema::load(kSchemaDir / "unsw-nb15-smaller-pack.json");
    const auto recs = load_csv(std::filesystem::path(std::getenv("SSCL_UNSW_SMALL_TRAIN")), schema);
    CHECK(recs.size() == 175341);
    const auto counts = class_counts(recs, schema.classes().size());
    const std::vector<std::size_t> expected{56000, 18184, 2000, 1746, 12264, 33393, 40000, 10491, 1133, 130};
    CHECK(counts == expected);
  }
}

TEST_SUITE("preprocess") {
  std::vector<RawRecord> three() {
    return parse(
        "bytes,service,rate,attack_cat\n"
        "2,http,5,Normal\n"
        "4,-,5,Exploits\n"
        "10,dns,5,DoS\n");
  }

  TEST_CASE("fit finds min and max") {
    const auto state = fit_preprocessor(three(), toy_schema());
    CHECK(state.ranges()[0].min == 2);
    CHECK(state.ranges()[0].max == 10);
    CHECK(state.ranges()[2].degenerate());
    CHECK(state.degenerate_features() == std::vector<std::string>{"rate"});
  }

  TEST_CASE("single record and empty input") {
    const auto recs = three();
    const auto state = fit_preprocessor({recs[0]}, toy_schema());
    CHECK(state.ranges()[0].min == state.ranges()[0].max);
    CHECK(code_of([] { fit_preprocessor({}, toy_schema()); }) == ErrorCode::EmptyDataset);
  }

  TEST_CASE("transform endpoints, midpoint and one-hot blocks") {
    const auto recs = three();
    const auto state = fit_preprocessor(recs, toy_schema());
    TransformStats stats;
    const auto lo = transform(recs[0], state, &stats);
    CHECK(lo.features[0] == 0.0);
    CHECK(lo.features.segment(1, 3) == Eigen::Vector3d(0, 1, 0));
    CHECK(lo.features[4] == 0.0);  // degenerate feature
    CHECK(transform(recs[2], state).features[0] == 1.0);
    RawRecord mid = recs[0];
    mid.numeric[0] = 6.0;
    CHECK(transform(mid, state).features[0] == 0.5);
    const auto masked = transform(recs[1], state, &stats);
    CHECK(masked.features.segment(1, 3).isZero());
    CHECK(stats.masked_missing == 1);
    RawRecord unseen = recs[0];
    unseen.category[1] = "gopher";
    CHECK(transform(unseen, state, &stats).features.segment(1, 3).isZero());
    CHECK(stats.unseen_category == 1);
  }

  TEST_CASE("UNSW service '-' encodes as 13 zeros") {
    const auto schema = DatasetSchema::load(kSchemaDir / "unsw-nb15-smaller-pack.json");
    RawRecord r;
    r.numeric.assign(schema.features().size(), 1.0);
    r.category.assign(schema.features().size(), "");
    r.category[*schema.find_feature("proto")] = "tcp";
    r.category[*schema.find_feature("state")] = "FIN";
    r.category[*schema.find_feature("service")] = "-";
    r.label = 0;
    const auto state = fit_preprocessor({r}, schema);
    const auto x = transform(r, state);
    CHECK(x.features.size() == 196);
    const auto slot = schema.layout()[*schema.find_feature("service")];
    CHECK(slot.width == 13);
    CHECK(x.features.segment(static_cast<Eigen::Index>(slot.offset), 13).isZero());
    CHECK(x.features.sum() == 2.0);  // one-hot proto + state
  }

  TEST_CASE("properties on random data") {
    Rng rng(3);
    const auto schema = toy_schema();
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<RawRecord> recs;
      const std::size_t n = 1 + uniform_index(rng, 30);
      const char* services[] = {"-", "http", "dns", "ftp"};
      for (std::size_t i = 0; i < n; ++i) {
        recs.push_back({{uniform(rng, -100, 100), 0.0, uniform(rng, 0, 1e6)},
                        {"", services[uniform_index(rng, 4)], ""},
                        static_cast<int>(uniform_index(rng, 3))});
      }
      const auto state = fit_preprocessor(recs, schema);
      const auto data = transform_all(recs, state);
      Eigen::VectorXd lo = Eigen::VectorXd::Constant(5, 2.0), hi = Eigen::VectorXd::Constant(5, -1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& x = data[i].features;
        REQUIRE(x.size() == 5);
        CHECK(x.minCoeff() >= 0.0);
        CHECK(x.maxCoeff() <= 1.0);
        const double block = x.segment(1, 3).sum();
        CHECK((block == 0.0 || block == 1.0));
        CHECK(transform(recs[i], state).features == x);
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
      }
      for (const int f : {0, 4}) {
        const auto r = state.ranges()[f == 0 ? 0 : 2];
        if (!r.degenerate()) {
          CHECK(lo[f] == 0.0);
          CHECK(hi[f] == 1.0);
        }
      }
      // Values outside the fitted range are clipped.
      RawRecord outside = recs[0];
      outside.numeric[0] = 1e9;
      outside.numeric[2] = -1e9;
      const auto clipped = transform(outside, state).features;
      CHECK(clipped.minCoeff() >= 0.0);
      CHECK(clipped.maxCoeff() <= 1.0);
    }
  }

  TEST_CASE("state persists exactly") {
    auto recs = three();
    recs[0].numeric[0] = 1.0 / 3.0;
    recs[1].numeric[2] = 0.1 + 0.2;
    const auto state = fit_preprocessor(recs, toy_schema());
    const auto back = PreprocessorState::from_json(state.to_json());
    for (std::size_t f = 0; f < 3; ++f) {
      CHECK(back.ranges()[f].min == state.ranges()[f].min);
      CHECK(back.ranges()[f].max == state.ranges()[f].max);
    }
    CHECK(back.schema().fingerprint() == state.schema().fingerprint());
  }
}

TEST_SUITE("splits") {
  TEST_CASE("fraction 1.0 is the identity") {
    const auto d = labeled({{0, 7}, {1, 3}});
    const auto s = stratified_subsample(d, {SplitRole::HeadSet, 1.0, 42});
    REQUIRE(s.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(s[i].features == d[i].features);
  }

  TEST_CASE("per-class counts with the minimum-one rule") {
    const auto d = labeled({{0, 200}, {1, 40}, {2, 1}});
    const auto s = stratified_subsample(d, {SplitRole::HeadSet, 0.05, 1});
    CHECK(label_counts(s, 3) == std::vector<std::size_t>{10, 2, 1});
    const auto tiny = stratified_subsample(d, {SplitRole::HeadSet, 0.01, 1});
    CHECK(label_counts(tiny, 3) == std::vector<std::size_t>{2, 1, 1});
  }

  TEST_CASE("subsample property: exact round(f*n) per class, no duplicates, deterministic") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::pair<int, std::size_t>> sizes;
      const int k = 1 + static_cast<int>(uniform_index(rng, 5));
      for (int c = 0; c < k; ++c) sizes.push_back({c, 1 + uniform_index(rng, 300)});
      const auto d = labeled(sizes);
      const double f = uniform(rng, 0.001, 1.0);
      const SplitSpec spec{SplitRole::HeadSet, f, rng()};
      const auto s = stratified_subsample(d, spec);
      const auto counts = label_counts(s, static_cast<std::size_t>(k));
      for (int c = 0; c < k; ++c) {
        const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * double(sizes[c].second))));
        CHECK(counts[c] == want);
      }
      std::set<double> ids;
      for (const auto& x : s) ids.insert(x.features[0]);
      CHECK(ids.size() == s.size());
      const auto again = stratified_subsample(d, spec);
      REQUIRE(again.size() == s.size());
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(again[i].features == s[i].features);
    }
  }

  TEST_CASE("unlabeled samples are rejected") {
    Dataset d = labeled({{0, 3}});
    d.push_back({Eigen::VectorXd::Zero(2), std::nullopt});
    CHECK(code_of([&] { stratified_subsample(d, {}); }) == ErrorCode::MissingLabel);
  }

  TEST_CASE("filter_classes") {
    const auto schema = toy_schema();
    const auto d = labeled({{0, 3}, {1, 2}, {2, 4}});
    const auto all = filter_classes(d, schema, {"Normal", "Exploits", "DoS"});
    CHECK(all.samples.size() == 9);
    const auto normal = filter_classes(d, schema, {"normal"});
    CHECK(normal.samples.size() == 3);
    for (const auto& s : normal.samples) CHECK(s.label == 0);
    const auto reordered = filter_classes(d, schema, {"DoS", "Exploit"});
    CHECK(reordered.class_names == std::vector<std::string>{"DoS", "Exploits"});
    CHECK(label_counts(reordered.samples, 2) == std::vector<std::size_t>{4, 2});
    CHECK(code_of([&] { filter_classes(d, schema, {"Worms"}); }) == ErrorCode::UnknownClass);
  }

  TEST_CASE("six-class filter on the larger-pack class totals") {
    const auto schema = DatasetSchema::load(kSchemaDir / "unsw-nb15-larger-pack.json");
    // Table-1 larger-pack training counts, one zero-width sample per row.
    const std::vector<std::size_t> counts{542254, 4034, 404, 426, 921, 4337, 6029, 1398, 177, 20};
    Dataset d;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      for (std::size_t i = 0; i < counts[c]; ++i) d.push_back({Eigen::VectorXd(), static_cast<int>(c)});
    }
    const auto six = filter_classes(d, schema, {"Normal", "Fuzzers", "Dos", "Exploit", "Generic", "Reconnaissance"});
    CHECK(six.samples.size() == 542254 + 4034 + 921 + 4337 + 6029 + 1398);
  }

  TEST_CASE("binary collapse") {
    const auto bin = to_binary(labeled({{0, 2}, {1, 1}, {2, 3}}), toy_schema());
    CHECK(label_counts(bin.samples, 2) == std::vector<std::size_t>{2, 4});
  }

  TEST_CASE("split_dataset sizes and stratification") {
    const auto d = labeled({{0, 50}, {1, 30}});
    const auto [a, b] = split_dataset(d, 0.8, 5, true);
    CHECK(label_counts(a, 2) == std::vector<std::size_t>{40, 24});
    CHECK(label_counts(b, 2) == std::vector<std::size_t>{10, 6});
    const auto [c, e] = split_dataset(d, 0.8, 5, false);
    CHECK(c.size() == 64);
    CHECK(e.size() == 16);
  }
}

TEST_SUITE("files") {
  TEST_CASE("encoded dataset round trip") {
    EncodedDataset data;
    data.class_names = {"Normal", "Attack"};
    data.schema_fingerprint = "abc";
    data.samples = {{Eigen::Vector3d(0.1, 1.0 / 3.0, 0.0), 1}, {Eigen::Vector3d(1, 0, 0.5), std::nullopt}};
    const auto path = std::filesystem::temp_directory_path() / "sscl_encoded.bin";
    save_encoded(path, data);
    const auto back = load_encoded(path);
    CHECK(back.class_names == data.class_names);
    CHECK(back.schema_fingerprint == "abc");
    REQUIRE(back.samples.size() == 2);
    CHECK(back.samples[0].features == data.samples[0].features);
    CHECK(back.samples[0].label == 1);
    CHECK_FALSE(back.samples[1].label.has_value());
    std::filesystem::remove(path);
  }

  TEST_CASE("synthetic CSV survives write and load") {
    BlobOptions o;
    o.samples = 20;
    o.features = 4;
    o.seed = 3;
    const auto schema = blob_schema(4, 2);
    const auto recs = generate_blobs(o);
    std::ostringstream out;
    write_csv(out, schema, recs);
    std::istringstream in(out.str());
    const auto back = load_csv(in, schema);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].numeric == recs[i].numeric);
      CHECK(back[i].label == recs[i].label);
    }
    const auto reduced = drop_features(schema, {"f1"}, "reduced");
    const auto projected = project_records(recs, schema, reduced);
    CHECK(projected[0].numeric == std::vector<double>{recs[0].numeric[0], recs[0].numeric[2], recs[0].numeric[3]});
  }
}
