// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Oracles here are written independently of the library.

#include "gradcheck.hpp"
#include "sscl/augment/masking.hpp"
#include "sscl/cli/app.hpp"
#include "sscl/contrastive/loss.hpp"
#include "sscl/eval/metrics.hpp"
#include "sscl/io.hpp"
#include "sscl/model/network.hpp"
#include "sscl/numgrad/ops.hpp"
#include "sscl/random.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace sscl;
using numgrad::Index;
using numgrad::RowMatrix;
using numgrad::Shape;
using numgrad::Tape;
using numgrad::Tensor;
using numgrad::Var;
using sscl::testing::gradient_relative_error;
using sscl::testing::LossBuilder;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, lo, hi);
  return t;
}

Tensor away_from_zero(Rng& rng, Shape shape) {
  Tensor t = random_tensor(rng, std::move(shape));
  for (Index i = 0; i < t.size(); ++i) {
    if (std::abs(t.data()[i]) < 1e-2) t.data()[i] += 0.05;
  }
  return t;
}

Var weighted_sum(Tape& tape, Var v, std::uint64_t seed) {
  Rng rng(seed);
  return numgrad::dot(tape, v, tape.constant(random_tensor(rng, tape.value(v).shape())));
}

// ---- 1 ----

Outcome parameter_count() {
  const auto config = model::EncoderConfig::from_preset("smaller-pack", 196, 1);
  const auto n = model::count_parameters(model::ContrastiveModel::build(config));
  return {n == 482528, std::to_string(n) + " parameters, expected 482528"};
}

// ---- 2 ----

double naive_loss(const RowMatrix& z, double tau) {
  const Index rows = z.rows();
  auto cos = [&](Index a, Index b) {
    double ab = 0, aa = 0, bb = 0;
    for (Index d = 0; d < z.cols(); ++d) {
      ab += z(a, d) * z(b, d);
      aa += z(a, d) * z(a, d);
      bb += z(b, d) * z(b, d);
    }
    return ab / std::sqrt(aa * bb);
  };
  auto pair = [&](Index i, Index j) {
    double denom = 0;
    for (Index k = 0; k < rows; ++k) {
      if (k != i) denom += std::exp(cos(i, k) / tau);
    }
    return -std::log(std::exp(cos(i, j) / tau) / denom);
  };
  double total = 0;
  for (Index k = 0; k < rows / 2; ++k) total += pair(2 * k, 2 * k + 1) + pair(2 * k + 1, 2 * k);
  return total / double(rows);
}

Outcome loss_oracle() {
  Rng rng(2024);
  double worst = 0;
  bool singles_zero = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + uniform_index(rng, 8), d = 2 + uniform_index(rng, 15);
    const double tau = uniform(rng, 0.1, 1.0);
    RowMatrix z(2 * n, d);
    for (Index i = 0; i < z.size(); ++i) z.data()[i] = uniform(rng, -1, 1);
    const double got = contrastive::batch_loss(z, tau);
    worst = std::max(worst, std::abs(got - naive_loss(z, tau)));
    if (n == 1 && got != 0.0) singles_zero = false;
  }
  std::ostringstream s;
  s << "max |error| " << worst << " over 1000 batches; N=1 exactly 0: " << (singles_zero ? "yes" : "no");
  return {worst < 1e-9 && singles_zero, s.str()};
}

// ---- 3 ----

Outcome gradients() {
  using namespace numgrad;
  constexpr int kConfigs = 20;
  Rng rng(303);
  std::map<std::string, double> worst;
  auto check = [&](const std::string& op, const LossBuilder& f, const std::vector<Tensor>& in) {
    worst[op] = std::max(worst[op], gradient_relative_error(f, in));
  };
  for (int trial = 0; trial < kConfigs; ++trial) {
    const Index b = 1 + uniform_index(rng, 3), c = 1 + uniform_index(rng, 3), o = 1 + uniform_index(rng, 3);
    const Index w = 2 + uniform_index(rng, 5), win = 1 + uniform_index(rng, 2);
    const auto seed = rng();
    check("conv1d", [seed](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, conv1d(t, v[0], v[1], v[2]), seed); },
          {random_tensor(rng, {b, c, w}), random_tensor(rng, {o, c, 2}), random_tensor(rng, {o})});
    check("maxpool1d", [seed, win](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, maxpool1d(t, v[0], win), seed); },
          {random_tensor(rng, {b, c, w})});
    check("global_maxpool1d", [seed](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, global_maxpool1d(t, v[0]), seed); },
          {random_tensor(rng, {b, c, w})});
    const RunningStats eval_stats{random_tensor(rng, {c}).data(), random_tensor(rng, {c}, 0.5, 2.0).data()};
    for (const auto mode : {BatchNormMode::Train, BatchNormMode::Eval}) {
      check(mode == BatchNormMode::Train ? "batchnorm1d/train" : "batchnorm1d/eval",
            [seed, mode, eval_stats, c](Tape& t, const std::vector<Var>& v) {
              RunningStats stats = mode == BatchNormMode::Train ? RunningStats::init(c) : eval_stats;
              return weighted_sum(t, batchnorm1d(t, v[0], v[1], v[2], mode, stats), seed);
            },
            {random_tensor(rng, {b + 1, c, w}), random_tensor(rng, {c}), random_tensor(rng, {c})});
    }
    check("relu", [seed](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, relu(t, v[0]), seed); },
          {away_from_zero(rng, {b, w})});
    check("affine", [seed](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, affine(t, v[0], v[1], v[2]), seed); },
          {random_tensor(rng, {b, w}), random_tensor(rng, {o, w}), random_tensor(rng, {o})});
    std::vector<int> labels;
    for (Index n = 0; n < b; ++n) labels.push_back(static_cast<int>(uniform_index(rng, o + 1)));
    check("softmax_cross_entropy", [labels](Tape& t, const std::vector<Var>& v) { return softmax_cross_entropy(t, v[0], labels); },
          {random_tensor(rng, {b, o + 1}, -3, 3)});
    check("sum", [seed](Tape& t, const std::vector<Var>& v) { return sum(t, v[0]); }, {random_tensor(rng, {b, w})});
    check("dot", [](Tape& t, const std::vector<Var>& v) { return dot(t, v[0], v[1]); },
          {random_tensor(rng, {w}), random_tensor(rng, {w})});
    check("cosine_similarity", [](Tape& t, const std::vector<Var>& v) { return cosine_similarity(t, v[0], v[1]); },
          {away_from_zero(rng, {w}), away_from_zero(rng, {w})});
    const double tau = uniform(rng, 0.2, 1.0);
    check("nt_xent", [tau](Tape& t, const std::vector<Var>& v) { return contrastive::nt_xent(t, v[0], tau); },
          {away_from_zero(rng, {2 * b, w})});
  }

  // Composed encoder + projector + loss, over all model parameters at once.
  double composed = 0;
  for (int trial = 0; trial < kConfigs; ++trial) {
    model::EncoderConfig config;
    config.layers = model::EncoderConfig::parse_layers(trial % 2 ? "conv4,pool2,conv8" : "conv6,conv8");
    config.input_width = 6 + static_cast<Index>(uniform_index(rng, 4));
    config.context_dim = 2 + static_cast<Index>(uniform_index(rng, 3));
    config.seed = rng();
    auto net = model::ContrastiveModel::build(config);
    const Index rows = 2 * (2 + static_cast<Index>(uniform_index(rng, 2)));
    RowMatrix x(rows, config.input_width);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng);
    auto loss = [&](bool backward) {
      Tape tape;
      const Var z = net.projection.forward(tape, net.encoder.forward_train(tape, tape.constant(model::to_tensor(x))));
      const Var l = contrastive::nt_xent(tape, z, 0.5);
      if (backward) tape.backward(l);
      return tape.value(l).item();
    };
    for (auto* p : net.parameters()) p->zero_grad();
    loss(true);
    std::vector<double> a, n;
    for (auto* p : net.parameters()) {
      for (Index i = 0; i < p->size(); ++i) {
        const double orig = p->value.data()[i];
        p->value.data()[i] = orig + 1e-5;
        const double up = loss(false);
        p->value.data()[i] = orig - 1e-5;
        const double down = loss(false);
        p->value.data()[i] = orig;
        n.push_back((up - down) / 2e-5);
        a.push_back(p->grad[i]);
      }
    }
    const Eigen::Map<numgrad::Vector> av(a.data(), Index(a.size())), nv(n.data(), Index(n.size()));
    composed = std::max(composed, (av - nv).norm() / std::max(av.norm() + nv.norm(), 1e-12));
  }
  worst["encoder+projector+loss"] = composed;

  double max_err = 0;
  std::string which;
  for (const auto& [op, e] : worst) {
    if (e >= max_err) {
      max_err = e;
      which = op;
    }
  }
  std::ostringstream s;
  s << worst.size() << " checks x " << kConfigs << " configs, worst relative error " << max_err << " (" << which << ")";
  return {max_err < 1e-4, s.str()};
}

// ---- 4 ----

Outcome metrics_identity() {
  Rng rng(404);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 5);
    eval::ConfusionMatrix cm(k);
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t p = 0; p < k; ++p) cm.at(t, p) = uniform_index(rng, 20);
    if (cm.total() == 0) cm.at(0, 0) = 1;
    const auto r = eval::metrics(cm);
    double diag = 0;
    for (std::size_t c = 0; c < k; ++c) diag += double(cm.at(c, c));
    worst = std::max({worst, std::abs(r.recall - r.accuracy), std::abs(r.accuracy - diag / double(cm.total()))});
  }
  eval::ConfusionMatrix hand(2);
  hand.at(0, 0) = 1;
  hand.at(0, 1) = 1;
  hand.at(1, 1) = 1;
  const auto r = eval::metrics(hand);
  const bool hand_ok = std::abs(r.accuracy - 2.0 / 3) < 1e-12 && std::abs(r.precision - 5.0 / 6) < 1e-12 &&
                       std::abs(r.f1 - 2.0 / 3) < 1e-12;
  std::ostringstream s;
  s << "max |recall - accuracy| " << worst << "; [[1,1],[0,1]] gives acc " << r.accuracy << ", P " << r.precision
    << ", F1 " << r.f1;
  return {worst < 1e-12 && hand_ok, s.str()};
}

// ---- 7 ----

Outcome masking_statistics() {
  constexpr int kDraws = 100000;
  const augment::MaskingConfig config{0.25, 0, {}};
  Rng rng(707);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(8);
  std::vector<double> freq(8, 0.0);
  bool exact = true;
  for (int d = 0; d < kDraws; ++d) {
    const auto v = augment::mask_view(x, config, rng);
    int zeros = 0;
    for (Index i = 0; i < 8; ++i) {
      if (v[i] == 0.0) {
        ++zeros;
        freq[i] += 1.0;
      }
    }
    exact = exact && zeros == 2;
  }
  double dev = 0;
  for (double& f : freq) dev = std::max(dev, std::abs(f / kDraws - 0.25));
  std::ostringstream s;
  s << "max |frequency - 0.25| " << dev << "; exactly 2 zeros in every draw: " << (exact ? "yes" : "no");
  return {dev <= 0.01 && exact, s.str()};
}

// ---- 5, 6, 8 ----

std::string p(const fs::path& path) { return path.string(); }

bool sscl_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream sink;
  const int code = cli::run(args, sink);
  if (out) *out = sink.str();
  if (code != 0) std::cerr << "command failed (" << code << "): " << args.front() << "\n";
  return code == 0;
}

struct DeskRun {
  bool ok = false;
  double full = 0, one_percent = 0, reduced = 0;
  bool identity_exact = false;
  std::map<std::string, std::string> reports;  // file name -> bytes
};

constexpr int kPretrainEpochs = 50;

// The desk-scale pipeline through the command-line entry point.
DeskRun desk_run(const fs::path& dir) {
  DeskRun r;
  fs::remove_all(dir);
  const std::vector<std::string> encoder{"--preset", "custom", "--layers", "conv8,conv16,pool2,conv32",
                                         "--context-dim", "16"};
  auto args = [](std::vector<std::string> a, const std::vector<std::string>& more) {
    a.insert(a.end(), more.begin(), more.end());
    return a;
  };
  const auto data = dir / "data", prep = dir / "prep", enc = dir / "enc";
  const std::vector<std::string> seed{"--seed", "42"};
  // Head learning rate 1e-2: at 2e-4 the 1% head gets too few steps in 50 epochs.
  const std::vector<std::string> head{"--encoder", p(enc / "encoder.ckpt"), "--preprocessor",
                                      p(prep / "preprocessor.json"), "--head-learning-rate", "0.01",
                                      "--head-epochs", "50", "--seed", "42"};
  if (!sscl_cli(args({"synth", "--samples", "2000", "--features", "16", "--num-classes", "2", "--drop",
                      "f3,f8,f13", "--out-dir", p(data)},
                     seed)) ||
      !sscl_cli({"preprocess", "--schema", p(data / "schema.json"), "--train-csv", p(data / "train.csv"),
                 "--test-csv", p(data / "test.csv"), "--out-dir", p(prep)}) ||
      !sscl_cli(args(args({"pretrain", "--encoded", p(prep / "train.bin"), "--epochs", std::to_string(kPretrainEpochs),
                           "--mask-ratio", "0.3", "--temperature", "0.5", "--batch-size", "32", "--out-dir", p(enc)},
                          encoder),
                     seed))) {
    return r;
  }
  auto eval_fraction = [&](const std::string& fraction, const std::string& name) -> double {
    const auto hd = dir / ("head-" + name), ed = dir / ("eval-" + name);
    if (!sscl_cli(args({"train-head", "--encoded", p(prep / "train.bin"), "--label-fraction", fraction, "--out-dir",
                        p(hd)},
                       head)) ||
        !sscl_cli({"evaluate", "--encoder", p(enc / "encoder.ckpt"), "--head", p(hd / "head.ckpt"), "--encoded",
                   p(prep / "test.bin"), "--preprocessor", p(prep / "preprocessor.json"), "--out-dir", p(ed)})) {
      return -1;
    }
    r.reports["metrics-" + name + ".json"] = read_file(ed / "metrics.json");
    return nlohmann::json::parse(read_file(ed / "metrics.json"))["accuracy"].get<double>();
  };
  r.full = eval_fraction("1", "full");
  r.one_percent = eval_fraction("0.01", "one-percent");

  auto transfer = [&](const std::string& prefix, const std::string& name) -> nlohmann::ordered_json {
    const auto td = dir / ("transfer-" + name);
    if (!sscl_cli(args({"transfer-eval", "--target-schema", p(data / (prefix + "schema.json")), "--target-train-csv",
                        p(data / (prefix + "train.csv")), "--target-test-csv", p(data / (prefix + "test.csv")),
                        "--out-dir", p(td)},
                       head))) {
      return nullptr;
    }
    r.reports["transfer-" + name + ".json"] = read_file(td / "transfer.json");
    return nlohmann::ordered_json::parse(read_file(td / "transfer.json"));
  };
  auto identity = transfer("", "identity");
  auto reduced = transfer("target_", "reduced");
  if (identity.is_null() || reduced.is_null() || r.full < 0 || r.one_percent < 0) return r;
  identity.erase("alignment");
  r.identity_exact = identity.dump(2) + "\n" == r.reports["metrics-full.json"];
  r.reduced = reduced["accuracy"].get<double>();
  r.reports["pretrain.json"] = read_file(enc / "pretrain.json");
  r.ok = true;
  return r;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": " << o.detail << " ("
              << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::endl;
  };

  report(1, "parameter count", parameter_count);
  report(2, "loss oracle", loss_oracle);
  report(3, "gradient checks", gradients);
  report(4, "metrics identity", metrics_identity);

  const fs::path root = fs::temp_directory_path() / "sscl_acceptance";
  DeskRun first;
  report(5, "desk-scale pipeline", [&]() -> Outcome {
    first = desk_run(root / "run1");
    if (!first.ok) return {false, "pipeline did not complete"};
    std::ostringstream s;
    s << "100% labels " << first.full << ", 1% labels " << first.one_percent << " (" << kPretrainEpochs
      << " pretraining epochs)";
    return {first.full >= 0.95 && first.full - first.one_percent <= 0.05, s.str()};
  });
  report(6, "transfer", [&]() -> Outcome {
    if (!first.ok) return {false, "pipeline did not complete"};
    std::ostringstream s;
    s << "3 of 16 features dropped: " << first.reduced << " vs unablated " << first.full
      << "; identity transfer equals evaluate: " << (first.identity_exact ? "yes" : "no");
    return {std::abs(first.full - first.reduced) <= 0.10 && first.identity_exact, s.str()};
  });
  report(7, "masking statistics", masking_statistics);
  report(8, "determinism", [&]() -> Outcome {
    if (!first.ok) return {false, "first run did not complete"};
    const auto second = desk_run(root / "run2");
    if (!second.ok) return {false, "second run did not complete"};
    std::size_t same = 0;
    for (const auto& [name, bytes] : first.reports) {
      const auto it = second.reports.find(name);
      if (it != second.reports.end() && it->second == bytes) ++same;
    }
    return {same == first.reports.size() && second.reports.size() == same,
            std::to_string(same) + " of " + std::to_string(first.reports.size()) + " reports byte-identical"};
  });
  std::cout << "criterion 9 [SKIP] UNSW-NB15 reproduction: manual recipe, see README" << std::endl;
  return failures == 0 ? 0 : 1;
}
