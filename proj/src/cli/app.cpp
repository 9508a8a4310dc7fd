#include "sscl/cli/app.hpp"

#include "sscl/cli/config.hpp"
#include "sscl/contrastive/train.hpp"
#include "sscl/dataio/csv.hpp"
#include "sscl/dataio/dataset_file.hpp"
#include "sscl/dataio/split.hpp"
#include "sscl/dataio/synthetic.hpp"
#include "sscl/eval/metrics.hpp"
#include "sscl/io.hpp"
#include "sscl/model/network.hpp"
#include "sscl/random.hpp"
#include "sscl/transfer/alignment.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace sscl::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return kExitUsage;
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::SchemaMismatch:
    case ErrorCode::UnknownClass: return kExitSchema;
    case ErrorCode::ParseError: return kExitParse;
    case ErrorCode::InsufficientData:
    case ErrorCode::EmptyDataset:
    case ErrorCode::MissingLabel:
    case ErrorCode::EmptyEvaluation: return kExitData;
    case ErrorCode::NoSharedFeatures: return kExitNoShared;
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::DegenerateVector: return kExitNumeric;
    case ErrorCode::Checkpoint: return kExitCheckpoint;
    case ErrorCode::InvalidShape:
    case ErrorCode::InvalidLabel:
    case ErrorCode::InvalidPair:
    case ErrorCode::InvalidBatch: return kExitShape;
  }
  return kExitInternal;
}

namespace {

std::shared_ptr<spdlog::logger> logger() {
  if (auto existing = spdlog::get("sscl")) return existing;
  auto log = spdlog::stderr_logger_mt("sscl");
  log->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("SSCL_LOG_LEVEL")) level = spdlog::level::from_str(env);
  log->set_level(level);
  return log;
}

// Records the files a command read and wrote for its manifest.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config) : command_(std::move(command)), config_(config) {}

  void input(const fs::path& p) { inputs_[p.string()] = sha256_file(p); }
  void output(const fs::path& p) { outputs_[p.string()] = sha256_file(p); }

  void write(const fs::path& dir) const {
    ordered_json j;
    j["tool"] = "sscl";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_.resolved(command_);
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    write_file_atomic(dir / (command_ + ".manifest.json"), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  const RunConfig& config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

void write_json(const fs::path& path, const std::string& text, Manifest& manifest) {
  write_file_atomic(path, text + "\n");
  manifest.output(path);
}

void check_fraction(const RunConfig& c, const std::string& key, bool allow_zero = false) {
  const double v = c.real(key);
  if (!(v <= 1.0 && (allow_zero ? v >= 0.0 : v > 0.0))) {
    throw Error(ErrorCode::Config, "'" + key + "' must be in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
  }
}

void check_positive(const RunConfig& c, const std::string& key) {
  if (c.real(key) <= 0.0) throw Error(ErrorCode::Config, "'" + key + "' must be positive");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!dataio::normalize_name(item).empty()) out.push_back(item.substr(item.find_first_not_of(' ')));
  }
  for (auto& s : out) s.erase(s.find_last_not_of(' ') + 1);
  return out;
}

// "all", "binary" or an explicit class list.
dataio::FilteredDataset apply_class_filter(const dataio::Dataset& samples, const dataio::DatasetSchema& schema,
                                           const std::string& spec) {
  if (spec == "all") return {samples, schema.class_names()};
  if (spec == "binary") return dataio::to_binary(samples, schema);
  return dataio::filter_classes(samples, schema, split_list(spec));
}

std::string counts_text(const dataio::Dataset& samples, const std::vector<std::string>& names) {
  const auto counts = dataio::label_counts(samples, names.size());
  std::string out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (!out.empty()) out += ", ";
    out += names[c] + "=" + std::to_string(counts[c]);
  }
  return out;
}

ordered_json counts_json(const std::vector<std::size_t>& counts, const std::vector<std::string>& names) {
  ordered_json j = ordered_json::object();
  for (std::size_t c = 0; c < names.size(); ++c) j[names[c]] = counts[c];
  return j;
}

contrastive::HeadConfig head_config(const RunConfig& c) {
  contrastive::HeadConfig h;
  h.representation = contrastive::parse_representation(c.str("representation"));
  h.epochs = static_cast<std::size_t>(c.integer("head_epochs"));
  h.batch_size = static_cast<std::size_t>(c.integer("head_batch_size"));
  h.optimizer.learning_rate = c.real("head_learning_rate");
  h.optimizer.weight_decay = c.real("weight_decay");
  h.schedule = {c.real("head_learning_rate"), c.real("lr_gamma")};
  h.seed = derive_seed(c.seed(), "head");
  h.validate();
  return h;
}

void validate_head_settings(const RunConfig& c) {
  check_fraction(c, "label_fraction");
  check_positive(c, "head_learning_rate");
  check_fraction(c, "lr_gamma");
  head_config(c);
}

dataio::PreprocessorState load_state(const RunConfig& c, Manifest& m) {
  m.input(c.path("preprocessor"));
  return dataio::PreprocessorState::load(c.path("preprocessor"));
}

dataio::EncodedDataset load_encoded_for(const fs::path& path, const dataio::PreprocessorState& state, Manifest& m) {
  m.input(path);
  auto data = dataio::load_encoded(path);
  if (data.schema_fingerprint != state.schema().fingerprint()) {
    throw Error(ErrorCode::SchemaMismatch, "'" + path.string() + "' was not encoded with this preprocessor's schema");
  }
  return data;
}

model::ContrastiveModel load_model(const fs::path& path, Manifest& m) {
  m.input(path);
  return model::ContrastiveModel::from_checkpoint(numgrad::load_checkpoint(path));
}

// Label-fraction subsample with its per-class counts logged.
dataio::Dataset head_subset(const dataio::FilteredDataset& data, const RunConfig& c) {
  const auto sub = dataio::stratified_subsample(
      data.samples, {dataio::SplitRole::HeadSet, c.real("label_fraction"), derive_seed(c.seed(), "subsample")});
  logger()->info("head set at label fraction {}: {} samples ({})", c.real("label_fraction"), sub.size(),
                 counts_text(sub, data.class_names));
  return sub;
}

// ---- commands ----

int cmd_preprocess(const RunConfig& c, std::ostream& out) {
  c.require({"schema", "train_csv"});
  Manifest m("preprocess", c);
  const fs::path dir = c.path("out_dir");
  m.input(c.path("schema"));
  const auto schema = dataio::DatasetSchema::load(c.path("schema"));
  m.input(c.path("train_csv"));
  const auto train = dataio::load_csv(c.path("train_csv"), schema);
  const auto state = dataio::fit_preprocessor(train, schema);
  logger()->info("schema '{}': encoded width {}", schema.name(), schema.encoded_width());
  for (const auto& f : state.degenerate_features()) logger()->warn("feature '{}' is constant in the training data", f);

  ensure_dir(dir);
  state.save(dir / "preprocessor.json");
  m.output(dir / "preprocessor.json");

  ordered_json summary;
  summary["encoded_width"] = schema.encoded_width();
  auto encode_split = [&](const std::vector<dataio::RawRecord>& records, const std::string& name) {
    dataio::TransformStats stats;
    dataio::EncodedDataset enc{dataio::transform_all(records, state, &stats), schema.class_names(),
                               schema.fingerprint()};
    const auto path = dir / (name + ".bin");
    dataio::save_encoded(path, enc);
    m.output(path);
    const auto counts = dataio::class_counts(records, schema.classes().size());
    logger()->info("{}: {} records ({})", name, records.size(), counts_text(enc.samples, enc.class_names));
    if (stats.unseen_category > 0) logger()->warn("{}: {} unseen category values encoded as zeros", name, stats.unseen_category);
    summary[name] = {{"records", records.size()},
                     {"class_counts", counts_json(counts, enc.class_names)},
                     {"masked_missing", stats.masked_missing},
                     {"unseen_category", stats.unseen_category}};
  };
  encode_split(train, "train");
  if (c.has("test_csv")) {
    m.input(c.path("test_csv"));
    encode_split(dataio::load_csv(c.path("test_csv"), schema), "test");
  }
  summary["degenerate_features"] = state.degenerate_features();
  m.write(dir);
  out << summary.dump(2) << "\n";
  return kExitOk;
}

model::EncoderConfig encoder_config(const RunConfig& c, model::Index width) {
  const auto init = derive_seed(c.seed(), "init");
  if (c.str("preset") != "custom") {
    if (c.has("layers")) throw Error(ErrorCode::Config, "'layers' is only used with preset = custom");
    return model::EncoderConfig::from_preset(c.str("preset"), width, init);
  }
  c.require({"layers"});
  model::EncoderConfig e;
  e.layers = model::EncoderConfig::parse_layers(c.str("layers"));
  e.input_width = width;
  e.context_dim = c.integer("context_dim");
  e.seed = init;
  if (e.context_dim < 1) throw Error(ErrorCode::Config, "custom encoder needs context_dim > 0");
  return e;
}

contrastive::ContrastiveConfig contrastive_config(const RunConfig& c) {
  contrastive::ContrastiveConfig cc;
  cc.batch_size = static_cast<std::size_t>(c.integer("batch_size"));
  cc.temperature = c.real("temperature");
  cc.epochs = static_cast<std::size_t>(c.integer("epochs"));
  cc.masking.ratio = c.real("mask_ratio");
  cc.masking.seed = derive_seed(c.seed(), "augment");
  cc.optimizer.learning_rate = c.real("learning_rate");
  cc.optimizer.weight_decay = c.real("weight_decay");
  cc.schedule = {c.real("learning_rate"), c.real("lr_gamma")};
  cc.seed = derive_seed(c.seed(), "shuffle");
  cc.validate();
  return cc;
}

int cmd_pretrain(const RunConfig& c, std::ostream& out) {
  c.require({"encoded"});
  if (c.flag("mask_groups")) c.require({"preprocessor"});
  check_fraction(c, "holdout_fraction", true);
  if (c.real("holdout_fraction") >= 1.0) throw Error(ErrorCode::Config, "'holdout_fraction' must be below 1");
  auto cc = contrastive_config(c);
  if (c.str("preset") != "custom") model::EncoderConfig::from_preset(c.str("preset"), 1);

  Manifest m("pretrain", c);
  m.input(c.path("encoded"));
  const auto data = dataio::load_encoded(c.path("encoded"));
  if (data.samples.empty()) throw Error(ErrorCode::InsufficientData, "encoded dataset is empty");
  if (c.flag("mask_groups")) {
    const auto state = load_state(c, m);
    if (state.schema().fingerprint() != data.schema_fingerprint) {
      throw Error(ErrorCode::SchemaMismatch, "preprocessor and encoded data use different schemas");
    }
    cc.masking.groups = state.schema().layout();
  }
  auto [train, held] = dataio::split_dataset(data.samples, 1.0 - c.real("holdout_fraction"),
                                             derive_seed(c.seed(), "holdout"), false);
  auto ecfg = encoder_config(c, static_cast<model::Index>(data.width()));
  ecfg.validate();
  auto model = model::ContrastiveModel::build(ecfg);
  logger()->info("pretraining {} encoder ({} parameters) on {} samples, {} held out; N={}, tau={}, m={}",
                 ecfg.preset, model::count_parameters(model), train.size(), held.size(), cc.batch_size,
                 cc.temperature, cc.masking.ratio);

  ordered_json history = ordered_json::array();
  const auto records = contrastive::pretrain(
      model, train, cc, held.empty() ? nullptr : &held, [&](const contrastive::EpochRecord& r) {
        logger()->info("epoch {}: loss {:.6f}, held-out {}, lr {:.6g}", r.epoch, r.mean_loss,
                       r.held_out_loss ? std::to_string(*r.held_out_loss) : "n/a", r.learning_rate);
      });
  for (const auto& r : records) {
    ordered_json e{{"epoch", r.epoch}, {"loss", r.mean_loss}, {"learning_rate", r.learning_rate}};
    e["held_out_loss"] = r.held_out_loss ? ordered_json(*r.held_out_loss) : ordered_json(nullptr);
    history.push_back(e);
  }

  const fs::path dir = c.path("out_dir");
  ensure_dir(dir);
  ordered_json extra{{"batch_size", cc.batch_size},
                     {"temperature", cc.temperature},
                     {"mask_ratio", cc.masking.ratio},
                     {"epochs", cc.epochs},
                     {"schema_fingerprint", data.schema_fingerprint}};
  numgrad::save_checkpoint(dir / "encoder.ckpt", model.to_checkpoint(extra.dump()));
  m.output(dir / "encoder.ckpt");
  ordered_json report{{"encoder", ordered_json::parse(ecfg.to_json())},
                      {"parameters", model::count_parameters(model)},
                      {"batch_size", cc.batch_size},
                      {"temperature", cc.temperature},
                      {"mask_ratio", cc.masking.ratio},
                      {"train_samples", train.size()},
                      {"held_out_samples", held.size()},
                      {"history", history}};
  write_json(dir / "pretrain.json", report.dump(2), m);
  m.write(dir);
  out << report.dump(2) << "\n";
  return kExitOk;
}

numgrad::Checkpoint head_checkpoint(const model::ClassificationHead& head, const RunConfig& c,
                                    const std::vector<std::string>& class_names, const std::string& encoder_sha) {
  numgrad::Checkpoint ckpt;
  ordered_json meta{{"kind", "sscl-head"},
                    {"representation", c.str("representation")},
                    {"classes", c.str("classes")},
                    {"class_names", class_names},
                    {"encoder_sha256", encoder_sha}};
  ckpt.metadata = meta.dump();
  head.write(ckpt, "head.");
  return ckpt;
}

int cmd_train_head(const RunConfig& c, std::ostream& out) {
  c.require({"encoder", "encoded", "preprocessor"});
  validate_head_settings(c);
  const auto h = head_config(c);
  Manifest m("train-head", c);
  const auto model = load_model(c.path("encoder"), m);
  const auto state = load_state(c, m);
  const auto data = load_encoded_for(c.path("encoded"), state, m);
  const auto filtered = apply_class_filter(data.samples, state.schema(), c.str("classes"));
  const auto subset = head_subset(filtered, c);
  const auto result = contrastive::train_head(model, subset, filtered.class_names.size(), h);
  logger()->info("head trained on {} representation, final loss {:.6f}", c.str("representation"),
                 result.history.empty() ? 0.0 : result.history.back().mean_loss);

  const fs::path dir = c.path("out_dir");
  ensure_dir(dir);
  numgrad::save_checkpoint(dir / "head.ckpt",
                           head_checkpoint(result.head, c, filtered.class_names, sha256_file(c.path("encoder"))));
  m.output(dir / "head.ckpt");
  ordered_json report{{"representation", c.str("representation")},
                      {"head_input_dim", result.head.in_dim()},
                      {"classes", filtered.class_names},
                      {"label_fraction", c.real("label_fraction")},
                      {"samples", subset.size()},
                      {"class_counts", counts_json(dataio::label_counts(subset, filtered.class_names.size()),
                                                   filtered.class_names)}};
  ordered_json losses = ordered_json::array();
  for (const auto& r : result.history) losses.push_back(r.mean_loss);
  report["loss_history"] = losses;
  write_json(dir / "train-head.json", report.dump(2), m);
  m.write(dir);
  out << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  c.require({"encoder", "head", "encoded", "preprocessor"});
  Manifest m("evaluate", c);
  const auto model = load_model(c.path("encoder"), m);
  m.input(c.path("head"));
  const auto ckpt = numgrad::load_checkpoint(c.path("head"));
  ordered_json meta;
  try {
    meta = ordered_json::parse(ckpt.metadata);
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::Checkpoint, std::string("head metadata is not JSON: ") + e.what());
  }
  if (meta.value("kind", "") != "sscl-head") throw Error(ErrorCode::Checkpoint, "not a head checkpoint");
  if (meta.value("encoder_sha256", "") != sha256_file(c.path("encoder"))) {
    logger()->warn("head was trained against a different encoder checkpoint");
  }
  const auto head = model::Linear::read(ckpt, "head.");
  const auto rep = contrastive::parse_representation(meta.at("representation").get<std::string>());
  const auto state = load_state(c, m);
  const auto data = load_encoded_for(c.path("encoded"), state, m);
  const auto filtered = apply_class_filter(data.samples, state.schema(), meta.at("classes").get<std::string>());
  if (static_cast<std::size_t>(head.out_dim()) != filtered.class_names.size()) {
    throw Error(ErrorCode::Checkpoint, "head has " + std::to_string(head.out_dim()) + " outputs for " +
                                           std::to_string(filtered.class_names.size()) + " classes");
  }
  const auto preds = contrastive::predict(model, head, rep, filtered.samples);
  const auto labels = contrastive::require_labels(filtered.samples);
  const auto report = eval::metrics(eval::confusion(preds, labels, filtered.class_names.size()));
  for (const auto cls : report.never_predicted) {
    logger()->warn("class '{}' was never predicted; its precision is reported as 0", filtered.class_names[cls]);
  }
  const auto text = eval::to_json(report, filtered.class_names);
  const fs::path dir = c.path("out_dir");
  ensure_dir(dir);
  write_json(dir / "metrics.json", text, m);
  m.write(dir);
  out << text << "\n";
  return kExitOk;
}

int cmd_transfer_eval(const RunConfig& c, std::ostream& out) {
  c.require({"encoder", "preprocessor", "target_schema", "target_train_csv"});
  validate_head_settings(c);
  check_fraction(c, "train_fraction");
  const auto h = head_config(c);
  Manifest m("transfer-eval", c);
  const auto model = load_model(c.path("encoder"), m);
  const auto original = load_state(c, m);
  m.input(c.path("target_schema"));
  const auto target = dataio::DatasetSchema::load(c.path("target_schema"));
  transfer::AliasTable aliases;
  if (c.has("aliases")) {
    m.input(c.path("aliases"));
    aliases = transfer::AliasTable::load(c.path("aliases"));
  }
  const auto map = transfer::build_alignment(original.schema(), target, aliases);
  logger()->info("alignment: {} positions mapped, {} masked, {} target positions omitted", map.mapped(),
                 map.masked(), map.omitted());
  for (const auto& f : map.masked_features) logger()->info("masked original feature '{}'", f);

  m.input(c.path("target_train_csv"));
  const auto train_records = dataio::load_csv(c.path("target_train_csv"), target);
  const auto tstate = transfer::derive_target_preprocessor(original, target, map, train_records);
  dataio::Dataset train = dataio::transform_all(train_records, tstate);
  dataio::Dataset test;
  if (c.has("target_test_csv")) {
    m.input(c.path("target_test_csv"));
    test = dataio::transform_all(dataio::load_csv(c.path("target_test_csv"), target), tstate);
  } else {
    std::tie(train, test) = dataio::split_dataset(train, c.real("train_fraction"), derive_seed(c.seed(), "target-split"), true);
  }
  const auto ftrain = apply_class_filter(train, target, c.str("classes"));
  const auto ftest = apply_class_filter(test, target, c.str("classes"));
  const auto subset = head_subset(ftrain, c);
  const auto report = transfer::transfer_evaluate(model, map, subset, ftest.samples, ftrain.class_names.size(), h);
  const auto text = transfer::to_json(report, ftrain.class_names);
  const fs::path dir = c.path("out_dir");
  ensure_dir(dir);
  write_json(dir / "transfer.json", text, m);
  m.write(dir);
  out << text << "\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  dataio::BlobOptions o;
  o.samples = static_cast<std::size_t>(c.integer("samples"));
  o.features = static_cast<std::size_t>(c.integer("features"));
  o.classes = static_cast<std::size_t>(c.integer("num_classes"));
  o.spread = c.real("spread");
  o.seed = derive_seed(c.seed(), "synth");
  check_fraction(c, "test_fraction", true);
  if (o.samples < 1 || o.features < 1 || o.classes < 1) {
    throw Error(ErrorCode::Config, "samples, features and num_classes must be positive");
  }
  Manifest m("synth", c);
  const auto schema = dataio::blob_schema(o.features, o.classes);
  const auto drop = split_list(c.str("drop"));
  for (const auto& d : drop) {
    if (!schema.find_feature(d)) throw Error(ErrorCode::Config, "cannot drop unknown feature '" + d + "'");
  }
  const auto records = dataio::generate_blobs(o);
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(c.seed(), "synth-split"));
  shuffle(order, rng);
  const auto n_test = static_cast<std::size_t>(std::llround(c.real("test_fraction") * double(records.size())));
  std::vector<dataio::RawRecord> train, test;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_test ? test : train).push_back(records[order[i]]);

  const fs::path dir = c.path("out_dir");
  ensure_dir(dir);
  auto emit = [&](const dataio::DatasetSchema& s, const std::string& prefix,
                  const std::vector<dataio::RawRecord>& tr, const std::vector<dataio::RawRecord>& te) {
    s.save(dir / (prefix + "schema.json"));
    m.output(dir / (prefix + "schema.json"));
    dataio::write_csv(dir / (prefix + "train.csv"), s, tr);
    m.output(dir / (prefix + "train.csv"));
    if (!te.empty()) {
      dataio::write_csv(dir / (prefix + "test.csv"), s, te);
      m.output(dir / (prefix + "test.csv"));
    }
  };
  emit(schema, "", train, test);
  ordered_json summary{{"train_samples", train.size()}, {"test_samples", test.size()}, {"features", o.features}};
  if (!drop.empty()) {
    const auto reduced = dataio::drop_features(schema, drop, "synthetic-blobs-reduced");
    emit(reduced, "target_", dataio::project_records(train, schema, reduced), dataio::project_records(test, schema, reduced));
    summary["target_features"] = reduced.features().size();
  }
  m.write(dir);
  out << summary.dump(2) << "\n";
  return kExitOk;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Self-supervised contrastive pretraining for network-flow records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  using Handler = std::function<int(const RunConfig&, std::ostream&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"preprocess", "fit the scaler on a training CSV and encode the splits", cmd_preprocess},
      {"pretrain", "contrastive pretraining of the encoder and projection head", cmd_pretrain},
      {"train-head", "train a classification head on the frozen encoder", cmd_train_head},
      {"evaluate", "score a trained head on an encoded test split", cmd_evaluate},
      {"transfer-eval", "align a foreign dataset, train and score a new head", cmd_transfer_eval},
      {"synth", "write a synthetic blob dataset with its schema", cmd_synth},
  };

  std::string config_path;
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::vector<std::pair<CLI::App*, const Handler*>> subs;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "versioned key = value config file");
    for (const KeySpec* k : keys_for(name)) {
      std::string desc = k->help;
      if (!k->default_value.empty()) desc += " (default " + k->default_value + ")";
      sub->add_option_function<std::string>(
          flag_name(k->name), [&flags, name = name, key = k->name](const std::string& v) { flags[name][key] = v; }, desc);
    }
    subs.emplace_back(sub, &handler);
  }

  std::vector<const char*> argv{"sscl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, std::cerr);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    try {
      RunConfig config = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
      for (const auto& [key, value] : flags[name]) config.set(key, value);
      return (*handler)(config, out);
    } catch (const Error& e) {
      logger()->error("{}", e.what());
      return exit_code(e.code());
    } catch (const std::exception& e) {
      logger()->error("internal error: {}", e.what());
      return kExitInternal;
    }
  }
  return kExitUsage;
}

}  // namespace sscl::cli
