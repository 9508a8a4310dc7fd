#include "sscl/model/network.hpp"

#include "sscl/error.hpp"
#include "sscl/random.hpp"

#include <json.hpp>

#include <cmath>

namespace sscl::model {

using numgrad::BatchNormMode;
using numgrad::Tensor;
using numgrad::Vector;
using nlohmann::json;

namespace {

Tensor kaiming_uniform(numgrad::Shape shape, Index fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

Tensor to_tensor(const RowMatrix& x) {
  return Tensor({x.rows(), x.cols()}, Eigen::Map<const Vector>(x.data(), x.size()));
}

Encoder::Encoder(EncoderConfig config) : config_(std::move(config)) {
  config_.validate();
  Index in_ch = 1;
  std::uint64_t index = 0;
  for (const auto& layer : config_.layers) {
    if (layer.kind != LayerSpec::Kind::Conv) continue;
    const Index out = layer.size;
    Rng rng(derive_seed(config_.seed, "init", index));
    const std::string name = "conv" + std::to_string(index);
    ConvUnit u{Parameter(name + ".kernel", kaiming_uniform({out, in_ch, 2}, in_ch * 2, rng)),
               Parameter(name + ".bias", Tensor::filled({out}, 0.0)),
               Parameter(name + ".gamma", Tensor::filled({out}, 1.0)),
               Parameter(name + ".beta", Tensor::filled({out}, 0.0)),
               numgrad::RunningStats::init(out)};
    units_.push_back(std::move(u));
    in_ch = out;
    ++index;
  }
}

Var Encoder::reshape_input(Tape& tape, Var input) const {
  const auto& v = tape.value(input);
  if (v.rank() != 2 || v.dim(1) != config_.input_width) {
    throw Error(ErrorCode::InvalidShape, "encoder expects [batch, " + std::to_string(config_.input_width) +
                                             "], got " + numgrad::to_string(v.shape()));
  }
  // [batch, width] -> [batch, 1, width]; same buffer, new shape.
  const Index batch = v.dim(0), width = v.dim(1);
  return tape.record(Tensor({batch, 1, width}, v.data()), {input},
                     [input](Tape& t, std::size_t self) { t.accumulate(input, t.grad(self)); });
}

Var Encoder::forward(Tape& tape, Var input, bool train, std::vector<numgrad::RunningStats>& stats,
                     const std::vector<Var>& params) const {
  Var x = reshape_input(tape, input);
  std::size_t unit = 0;
  for (const auto& layer : config_.layers) {
    if (layer.kind == LayerSpec::Kind::Pool) {
      x = numgrad::maxpool1d(tape, x, layer.size);
      continue;
    }
    const Var* p = &params[4 * unit];
    x = numgrad::conv1d(tape, x, p[0], p[1]);
    x = numgrad::batchnorm1d(tape, x, p[2], p[3], train ? BatchNormMode::Train : BatchNormMode::Eval, stats[unit]);
    x = numgrad::relu(tape, x);
    ++unit;
  }
  return numgrad::global_maxpool1d(tape, x);
}

Var Encoder::forward_train(Tape& tape, Var input) {
  std::vector<Var> params;
  std::vector<numgrad::RunningStats> stats;
  for (auto& u : units_) {
    for (Parameter* p : {&u.kernel, &u.bias, &u.gamma, &u.beta}) params.push_back(tape.parameter(*p));
    stats.push_back(u.stats);
  }
  const Var out = forward(tape, input, true, stats, params);
  for (std::size_t i = 0; i < units_.size(); ++i) units_[i].stats = std::move(stats[i]);
  return out;
}

Var Encoder::forward_eval(Tape& tape, Var input) const {
  std::vector<Var> params;
  std::vector<numgrad::RunningStats> stats;
  for (const auto& u : units_) {
    for (const Parameter* p : {&u.kernel, &u.bias, &u.gamma, &u.beta}) params.push_back(tape.constant(p->value));
    stats.push_back(u.stats);
  }
  return forward(tape, input, false, stats, params);
}

RowMatrix Encoder::encode(const RowMatrix& x) const {
  Tape tape;
  const Var h = forward_eval(tape, tape.constant(to_tensor(x)));
  return tape.value(h).matrix();
}

std::vector<Parameter*> Encoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& u : units_) out.insert(out.end(), {&u.kernel, &u.bias, &u.gamma, &u.beta});
  return out;
}

std::vector<const Parameter*> Encoder::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& u : units_) out.insert(out.end(), {&u.kernel, &u.bias, &u.gamma, &u.beta});
  return out;
}

void Encoder::write(numgrad::Checkpoint& ckpt, const std::string& prefix) const {
  for (const auto& u : units_) {
    for (const Parameter* p : {&u.kernel, &u.bias, &u.gamma, &u.beta}) ckpt.add(prefix + p->name, p->value);
    const std::string base = prefix + u.kernel.name.substr(0, u.kernel.name.find('.'));
    const Index ch = u.stats.mean.size();
    ckpt.add(base + ".running_mean", Tensor({ch}, u.stats.mean));
    ckpt.add(base + ".running_var", Tensor({ch}, u.stats.var));
  }
}

Encoder Encoder::read(const numgrad::Checkpoint& ckpt, const std::string& prefix, EncoderConfig config) {
  Encoder e(std::move(config));
  auto load = [&](Parameter& p) {
    const Tensor& t = ckpt.at(prefix + p.name);
    if (t.shape() != p.value.shape()) {
      throw Error(ErrorCode::Checkpoint, "tensor '" + p.name + "' has shape " + numgrad::to_string(t.shape()) +
                                             ", expected " + numgrad::to_string(p.value.shape()));
    }
    p.value = t;
    p.zero_grad();
  };
  for (auto& u : e.units_) {
    for (Parameter* p : {&u.kernel, &u.bias, &u.gamma, &u.beta}) load(*p);
    const std::string base = prefix + u.kernel.name.substr(0, u.kernel.name.find('.'));
    u.stats.mean = ckpt.at(base + ".running_mean").data();
    u.stats.var = ckpt.at(base + ".running_var").data();
    if (u.stats.mean.size() != u.bias.size() || u.stats.var.size() != u.bias.size()) {
      throw Error(ErrorCode::Checkpoint, "running statistics of '" + base + "' have the wrong size");
    }
  }
  return e;
}

Linear::Linear(Index in, Index out, std::uint64_t seed) {
  if (in < 1 || out < 1) throw Error(ErrorCode::InvalidShape, "linear layer needs positive dimensions");
  Rng rng(seed);
  weight_ = Parameter("weight", kaiming_uniform({out, in}, in, rng));
  bias_ = Parameter("bias", Tensor::filled({out}, 0.0));
}

Var Linear::forward(Tape& tape, Var input) {
  return numgrad::affine(tape, input, tape.parameter(weight_), tape.parameter(bias_));
}

Var Linear::forward_const(Tape& tape, Var input) const {
  return numgrad::affine(tape, input, tape.constant(weight_.value), tape.constant(bias_.value));
}

RowMatrix Linear::apply(const RowMatrix& x) const {
  Tape tape;
  return tape.value(forward_const(tape, tape.constant(to_tensor(x)))).matrix();
}

void Linear::write(numgrad::Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.add(prefix + "weight", weight_.value);
  ckpt.add(prefix + "bias", bias_.value);
}

Linear Linear::read(const numgrad::Checkpoint& ckpt, const std::string& prefix) {
  const Tensor& w = ckpt.at(prefix + "weight");
  const Tensor& b = ckpt.at(prefix + "bias");
  if (w.rank() != 2 || b.rank() != 1 || b.dim(0) != w.dim(0)) {
    throw Error(ErrorCode::Checkpoint, "malformed linear layer '" + prefix + "'");
  }
  Linear l;
  l.weight_ = Parameter("weight", w);
  l.bias_ = Parameter("bias", b);
  return l;
}

ContrastiveModel ContrastiveModel::build(const EncoderConfig& config) {
  ContrastiveModel m;
  m.encoder = Encoder(config);
  m.projection = Linear(config.hidden_dim(), config.context_dim, derive_seed(config.seed, "init-projection"));
  return m;
}

std::vector<Parameter*> ContrastiveModel::parameters() {
  auto out = encoder.parameters();
  for (Parameter* p : projection.parameters()) out.push_back(p);
  return out;
}

numgrad::Checkpoint ContrastiveModel::to_checkpoint(const std::string& extra_metadata) const {
  numgrad::Checkpoint ckpt;
  json meta;
  meta["kind"] = "sscl-contrastive-model";
  meta["encoder"] = json::parse(encoder.config().to_json());
  meta["extra"] = json::parse(extra_metadata);
  ckpt.metadata = meta.dump();
  encoder.write(ckpt, "encoder.");
  projection.write(ckpt, "projection.");
  return ckpt;
}

ContrastiveModel ContrastiveModel::from_checkpoint(const numgrad::Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.metadata);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Checkpoint, std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  if (meta.value("kind", "") != "sscl-contrastive-model" || !meta.contains("encoder")) {
    throw Error(ErrorCode::Checkpoint, "checkpoint does not hold a contrastive model");
  }
  ContrastiveModel m;
  m.encoder = Encoder::read(ckpt, "encoder.", EncoderConfig::from_json(meta["encoder"].dump()));
  m.projection = Linear::read(ckpt, "projection.");
  if (m.projection.in_dim() != m.encoder.hidden_dim()) {
    throw Error(ErrorCode::Checkpoint, "projection input does not match the encoder's hidden dimension");
  }
  return m;
}

std::size_t count_parameters(const std::vector<const Parameter*>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += static_cast<std::size_t>(p->size());
  return n;
}

std::size_t count_parameters(const Encoder& encoder) { return count_parameters(encoder.parameters()); }
std::size_t count_parameters(const Linear& head) { return count_parameters(head.parameters()); }
std::size_t count_parameters(const ContrastiveModel& model) {
  return count_parameters(model.encoder) + count_parameters(model.projection);
}

}  // namespace sscl::model
