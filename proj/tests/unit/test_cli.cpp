#include <doctest.h>

#include "sscl/cli/app.hpp"
#include "sscl/cli/config.hpp"
#include "sscl/io.hpp"
#include "sscl/model/network.hpp"
#include "sscl/numgrad/checkpoint.hpp"
#include "sscl/random.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sscl;
using namespace sscl::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sscl_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int invoke(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::ostringstream out;
  const int code = run(args, out);
  if (captured) *captured = out.str();
  return code;
}

std::string p(const fs::path& path) { return path.string(); }

const std::vector<std::string> kDesk{"--preset", "custom", "--layers", "conv8,conv16,pool2,conv32",
                                     "--context-dim", "16"};

std::vector<std::string> with(std::vector<std::string> args, const std::vector<std::string>& more) {
  args.insert(args.end(), more.begin(), more.end());
  return args;
}

// Synthetic data, preprocessed, pretrained for two epochs. Built once.
struct Pipeline {
  fs::path root, data, prep, enc;

  Pipeline() : root(scratch("pipeline")), data(root / "data"), prep(root / "prep"), enc(root / "enc") {
    REQUIRE(invoke({"synth", "--samples", "400", "--seed", "3", "--drop", "f0,f1,f2", "--out-dir", p(data)}) == 0);
    REQUIRE(invoke({"preprocess", "--schema", p(data / "schema.json"), "--train-csv", p(data / "train.csv"),
                  "--test-csv", p(data / "test.csv"), "--out-dir", p(prep)}) == 0);
    REQUIRE(invoke(with({"pretrain", "--encoded", p(prep / "train.bin"), "--epochs", "2", "--out-dir", p(enc)},
                      kDesk)) == 0);
  }

  std::vector<std::string> head_args() const {
    return {"--encoder", p(enc / "encoder.ckpt"), "--preprocessor", p(prep / "preprocessor.json"),
            "--head-learning-rate", "0.01", "--head-epochs", "10"};
  }
};

const Pipeline& pipeline() {
  static const Pipeline instance;
  return instance;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c;
  CHECK(c.real("temperature") == 0.5);
  CHECK(c.integer("batch_size") == 32);
  CHECK(c.real("mask_ratio") == 0.3);
  CHECK(c.integer("epochs") == 100);
  CHECK(c.real("learning_rate") == 2e-4);
  CHECK(c.real("lr_gamma") == 0.99);
  CHECK(c.str("preset") == "smaller-pack");
}

TEST_CASE("config files are versioned and strict") {
  CHECK(RunConfig::parse("version = 1\ntemperature = 0.25 # cooler\n").real("temperature") == 0.25);
  CHECK_THROWS_AS(RunConfig::parse("temperature = 0.25\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("version = 2\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("version = 1\ntemprature = 0.25\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("version = 1\nbatch_size = many\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("version = 1\nno equals sign\n"), Error);
}

TEST_CASE("manifest echoes resolved defaults and flags override the file") {
  const auto& pl = pipeline();
  const auto manifest = json::parse(read_file(pl.enc / "pretrain.manifest.json"));
  CHECK(manifest["command"] == "pretrain");
  CHECK(manifest["config"]["temperature"] == "0.5");
  CHECK(manifest["config"]["batch_size"] == "32");
  CHECK(manifest["config"]["mask_ratio"] == "0.3");
  CHECK(manifest["inputs"].contains(p(pl.prep / "train.bin")));
  CHECK(manifest["outputs"][p(pl.enc / "encoder.ckpt")] == sha256_file(pl.enc / "encoder.ckpt"));
  CHECK_FALSE(manifest.dump().find("time") != std::string::npos);

  const auto dir = scratch("override");
  write_file_atomic(dir / "run.cfg", "version = 1\nepochs = 5\ntemperature = 0.2\n");
  REQUIRE(invoke(with({"pretrain", "-c", p(dir / "run.cfg"), "--epochs", "0", "--encoded", p(pl.prep / "train.bin"),
                     "--out-dir", p(dir)},
                    kDesk)) == 0);
  const auto m2 = json::parse(read_file(dir / "pretrain.manifest.json"));
  CHECK(m2["config"]["epochs"] == "0");
  CHECK(m2["config"]["temperature"] == "0.2");
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exits");
  CHECK(invoke({}) == kExitUsage);
  CHECK(invoke({"frobnicate"}) == kExitUsage);
  CHECK(invoke({"pretrain", "--no-such-flag", "1"}) == kExitUsage);
  CHECK(invoke({"--help"}) == kExitOk);
  CHECK(invoke({"pretrain", "--encoded", p(dir / "missing.bin")}) == kExitIo);
  CHECK(invoke({"pretrain", "-c", p(dir / "missing.cfg")}) == kExitIo);
  CHECK(invoke({"pretrain"}) == kExitUsage);  // no encoded input
  CHECK(invoke({"pretrain", "--temperature", "0", "--encoded", "x"}) == kExitUsage);
  CHECK(invoke({"pretrain", "--mask-ratio", "1.5", "--encoded", "x"}) == kExitUsage);

  write_file_atomic(dir / "bad.csv", "f0,class\n1.0,Normal\nnot-a-number,Normal\n");
  REQUIRE(invoke({"synth", "--samples", "20", "--features", "1", "--out-dir", p(dir)}) == 0);
  CHECK(invoke({"preprocess", "--schema", p(dir / "schema.json"), "--train-csv", p(dir / "bad.csv"), "--out-dir",
              p(dir / "prep")}) == kExitParse);

  CHECK(exit_code(ErrorCode::NoSharedFeatures) == kExitNoShared);
  CHECK(exit_code(ErrorCode::Checkpoint) == kExitCheckpoint);
  CHECK(exit_code(ErrorCode::NonFiniteGradient) == kExitNumeric);
  CHECK(exit_code(ErrorCode::SchemaMismatch) == kExitSchema);
}

TEST_CASE("encoded data from another schema is refused") {
  const auto& pl = pipeline();
  const auto dir = scratch("mismatch");
  REQUIRE(invoke({"preprocess", "--schema", p(pl.data / "target_schema.json"), "--train-csv",
                p(pl.data / "target_train.csv"), "--out-dir", p(dir)}) == 0);
  CHECK(invoke(with({"train-head", "--encoded", p(dir / "train.bin"), "--out-dir", p(dir / "h")}, pl.head_args())) ==
        kExitSchema);
}

TEST_CASE("zero epochs leaves the initial weights") {
  const auto& pl = pipeline();
  const auto dir = scratch("zero");
  REQUIRE(invoke(with({"pretrain", "--encoded", p(pl.prep / "train.bin"), "--epochs", "0", "--seed", "11",
                     "--out-dir", p(dir)},
                    kDesk)) == 0);
  const auto saved = numgrad::load_checkpoint(dir / "encoder.ckpt");
  auto config = model::ContrastiveModel::from_checkpoint(saved).encoder.config();
  CHECK(config.seed == derive_seed(11, "init"));
  const auto fresh = model::ContrastiveModel::build(config).to_checkpoint();
  REQUIRE(fresh.tensors.size() == saved.tensors.size());
  for (std::size_t i = 0; i < fresh.tensors.size(); ++i) {
    CHECK(fresh.tensors[i].first == saved.tensors[i].first);
    CHECK(fresh.tensors[i].second == saved.tensors[i].second);
  }
}

TEST_CASE("reruns are byte-identical") {
  const auto& pl = pipeline();
  const auto dir = scratch("rerun");
  REQUIRE(invoke(with({"pretrain", "--encoded", p(pl.prep / "train.bin"), "--epochs", "2", "--out-dir", p(dir)},
                    kDesk)) == 0);
  for (const char* f : {"encoder.ckpt", "pretrain.json"}) {
    INFO(f);
    CHECK(read_file(dir / f) == read_file(pl.enc / f));
  }
  for (const char* f : {"train.bin", "test.bin", "preprocessor.json"}) CHECK(fs::exists(pl.prep / f));
}

TEST_CASE("identity transfer reproduces evaluate") {
  const auto& pl = pipeline();
  const auto dir = scratch("identity");
  REQUIRE(invoke(with({"train-head", "--encoded", p(pl.prep / "train.bin"), "--out-dir", p(dir / "h")},
                    pl.head_args())) == 0);
  std::string eval_out;
  REQUIRE(invoke({"evaluate", "--encoder", p(pl.enc / "encoder.ckpt"), "--head", p(dir / "h/head.ckpt"), "--encoded",
                p(pl.prep / "test.bin"), "--preprocessor", p(pl.prep / "preprocessor.json"), "--out-dir",
                p(dir / "ev")},
               &eval_out) == 0);
  CHECK(eval_out == read_file(dir / "ev/metrics.json"));
  REQUIRE(invoke(with({"transfer-eval", "--target-schema", p(pl.data / "schema.json"), "--target-train-csv",
                     p(pl.data / "train.csv"), "--target-test-csv", p(pl.data / "test.csv"), "--out-dir",
                     p(dir / "t")},
                    pl.head_args())) == 0);
  auto transfer = nlohmann::ordered_json::parse(read_file(dir / "t/transfer.json"));
  CHECK(transfer["alignment"]["mapped_positions"] == 16);
  CHECK(transfer["alignment"]["masked_positions"] == 0);
  transfer.erase("alignment");
  CHECK(transfer.dump(2) + "\n" == read_file(dir / "ev/metrics.json"));
}

TEST_CASE("dropped features are masked and aliases map") {
  const auto& pl = pipeline();
  const auto dir = scratch("reduced");
  std::string text;
  REQUIRE(invoke(with({"transfer-eval", "--target-schema", p(pl.data / "target_schema.json"), "--target-train-csv",
                     p(pl.data / "target_train.csv"), "--target-test-csv", p(pl.data / "target_test.csv"),
                     "--out-dir", p(dir / "t")},
                    pl.head_args()),
               &text) == 0);
  auto report = json::parse(text);
  CHECK(report["alignment"]["masked_positions"] == 3);
  CHECK(report["alignment"]["mapped_positions"] == 13);
  CHECK(report["alignment"]["masked_features"] == json({"f0", "f1", "f2"}));

  // Rename f5 to rate5 in the target and map it back with an alias.
  auto schema = json::parse(read_file(pl.data / "target_schema.json"));
  for (auto& f : schema["features"]) {
    if (f["name"] == "f5") f["name"] = "rate5";
  }
  schema["name"] = "renamed";
  write_file_atomic(dir / "schema.json", schema.dump(1));
  for (const char* split : {"train", "test"}) {
    auto csv = read_file(pl.data / (std::string("target_") + split + ".csv"));
    csv.replace(csv.find(",f5,"), 4, ",rate5,");
    write_file_atomic(dir / (std::string(split) + ".csv"), csv);
  }
  const auto renamed = with({"transfer-eval", "--target-schema", p(dir / "schema.json"), "--target-train-csv",
                             p(dir / "train.csv"), "--target-test-csv", p(dir / "test.csv")},
                            pl.head_args());
  REQUIRE(invoke(with(renamed, {"--out-dir", p(dir / "plain")}), &text) == 0);
  CHECK(json::parse(text)["alignment"]["masked_positions"] == 4);
  CHECK(json::parse(text)["alignment"]["omitted_positions"] == 1);

  write_file_atomic(dir / "aliases.txt", "# original = target\nf5 = rate5\n");
  REQUIRE(invoke(with(renamed, {"--aliases", p(dir / "aliases.txt"), "--out-dir", p(dir / "aliased")}), &text) == 0);
  report = json::parse(text);
  CHECK(report["alignment"]["masked_positions"] == 3);
  CHECK(report["alignment"]["mapped_positions"] == 13);
  CHECK(report["alignment"]["omitted_positions"] == 0);
}

TEST_CASE("class filters and label fractions") {
  const auto& pl = pipeline();
  const auto dir = scratch("filters");
  std::string text;
  REQUIRE(invoke(with({"train-head", "--encoded", p(pl.prep / "train.bin"), "--label-fraction", "0.1", "--out-dir",
                     p(dir)},
                    pl.head_args()),
               &text) == 0);
  const auto report = json::parse(text);
  CHECK(report["samples"] == 32);  // 10% of 320, stratified
  CHECK(report["classes"] == json({"Normal", "Attack1"}));
  const auto meta = json::parse(numgrad::load_checkpoint(dir / "head.ckpt").metadata);
  CHECK(meta["classes"] == "all");
  CHECK(meta["representation"] == "hidden");
  CHECK(invoke(with({"train-head", "--encoded", p(pl.prep / "train.bin"), "--classes", "Normal,Nope", "--out-dir",
                   p(dir)},
                  pl.head_args())) == kExitSchema);
  CHECK(invoke(with({"train-head", "--encoded", p(pl.prep / "train.bin"), "--label-fraction", "0", "--out-dir",
                   p(dir)},
                  pl.head_args())) == kExitUsage);
}
