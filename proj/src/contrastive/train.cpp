#include "sscl/contrastive/train.hpp"

#include "sscl/contrastive/loss.hpp"
#include "sscl/error.hpp"
#include "sscl/random.hpp"

#include <numeric>

namespace sscl::contrastive {

using numgrad::Tape;
using numgrad::Var;
using model::Index;

namespace {

constexpr std::size_t kRepresentBatch = 256;

// Two masked views per listed sample, interleaved as rows (2k, 2k+1).
RowMatrix view_batch(const dataio::Dataset& samples, std::span<const std::size_t> idx,
                     const augment::MaskingConfig& masking, std::uint64_t stream_seed, std::uint64_t epoch) {
  const auto width = samples[idx[0]].features.size();
  RowMatrix x(static_cast<Index>(2 * idx.size()), width);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Rng rng = augment::sample_stream(stream_seed, epoch, idx[k]);
    auto pair = augment::augment_pair(samples[idx[k]].features, masking, rng);
    x.row(static_cast<Index>(2 * k)) = pair.x_i.transpose();
    x.row(static_cast<Index>(2 * k + 1)) = pair.x_j.transpose();
  }
  return x;
}

void check_width(const dataio::Dataset& samples, Index width) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != width) {
      throw Error(ErrorCode::InvalidShape, "sample " + std::to_string(i) + " has width " +
                                               std::to_string(samples[i].features.size()) + ", encoder expects " +
                                               std::to_string(width));
    }
  }
}

}  // namespace

void ContrastiveConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be positive");
  if (!(temperature > 0.0)) throw Error(ErrorCode::Config, "temperature must be positive");
  augment::masked_count(masking.ratio, 1);
  if (!(optimizer.learning_rate > 0.0) || !(schedule.base_lr > 0.0)) {
    throw Error(ErrorCode::Config, "learning rate must be positive");
  }
  if (!(schedule.gamma > 0.0 && schedule.gamma <= 1.0)) throw Error(ErrorCode::Config, "lr gamma must be in (0, 1]");
}

std::vector<EpochRecord> pretrain(model::ContrastiveModel& model, const dataio::Dataset& samples,
                                  const ContrastiveConfig& config, const dataio::Dataset* held_out,
                                  const EpochCallback& on_epoch) {
  config.validate();
  if (samples.size() < config.batch_size) {
    throw Error(ErrorCode::InsufficientData, std::to_string(samples.size()) + " samples cannot fill one batch of " +
                                                 std::to_string(config.batch_size));
  }
  check_width(samples, model.encoder.config().input_width);
  if (held_out) check_width(*held_out, model.encoder.config().input_width);

  auto params = model.parameters();
  auto state = numgrad::make_optim_state(params, config.optimizer);
  std::vector<std::size_t> order(samples.size());
  const std::size_t batches = samples.size() / config.batch_size;
  std::vector<EpochRecord> history;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.options.learning_rate = numgrad::lr_at(config.schedule, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, "shuffle", epoch));
    shuffle(order, shuffle_rng);

    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::span<const std::size_t> idx(order.data() + b * config.batch_size, config.batch_size);
      Tape tape;
      const Var x = tape.constant(model::to_tensor(view_batch(samples, idx, config.masking, config.masking.seed, epoch)));
      const Var z = model.projection.forward(tape, model.encoder.forward_train(tape, x));
      const Var loss = nt_xent(tape, z, config.temperature);
      for (auto* p : params) p->zero_grad();
      tape.backward(loss);
      numgrad::adamw_step(params, state);
      total += tape.value(loss).item();
    }

    EpochRecord rec{epoch + 1, total / static_cast<double>(batches), state.options.learning_rate, std::nullopt};
    if (held_out) rec.held_out_loss = evaluate_contrastive_loss(model, *held_out, config, derive_seed(config.masking.seed, "held-out"));
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

std::optional<double> evaluate_contrastive_loss(const model::ContrastiveModel& model, const dataio::Dataset& samples,
                                                const ContrastiveConfig& config, std::uint64_t seed) {
  const std::size_t batches = samples.size() / config.batch_size;
  if (batches == 0) return std::nullopt;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::span<const std::size_t> part(idx.data() + b * config.batch_size, config.batch_size);
    const RowMatrix x = view_batch(samples, part, config.masking, seed, 0);
    total += batch_loss(model.projection.apply(model.encoder.encode(x)), config.temperature);
  }
  return total / static_cast<double>(batches);
}

std::string to_string(Representation r) { return r == Representation::Hidden ? "hidden" : "context"; }

Representation parse_representation(const std::string& text) {
  if (text == "hidden") return Representation::Hidden;
  if (text == "context") return Representation::Context;
  throw Error(ErrorCode::Config, "representation must be 'hidden' or 'context', got '" + text + "'");
}

void HeadConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be positive");
  if (!(optimizer.learning_rate > 0.0) || !(schedule.base_lr > 0.0)) {
    throw Error(ErrorCode::Config, "learning rate must be positive");
  }
}

RowMatrix represent(const model::ContrastiveModel& model, const dataio::Dataset& samples, Representation r) {
  const Index width = model.encoder.config().input_width;
  check_width(samples, width);
  const Index dim = r == Representation::Hidden ? model.encoder.hidden_dim() : model.projection.out_dim();
  RowMatrix out(static_cast<Index>(samples.size()), dim);
  for (std::size_t start = 0; start < samples.size(); start += kRepresentBatch) {
    const std::size_t n = std::min(kRepresentBatch, samples.size() - start);
    RowMatrix x(static_cast<Index>(n), width);
    for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Index>(i)) = samples[start + i].features.transpose();
    RowMatrix h = model.encoder.encode(x);
    if (r == Representation::Context) h = model.projection.apply(h);
    out.middleRows(static_cast<Index>(start), static_cast<Index>(n)) = h;
  }
  return out;
}

HeadResult train_head_on_features(const RowMatrix& features, std::span<const int> labels, std::size_t num_classes,
                                  const HeadConfig& config) {
  config.validate();
  if (features.rows() == 0) throw Error(ErrorCode::EmptyDataset, "no samples to train the head on");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::InvalidShape, "feature rows and labels differ in count");
  }
  for (const int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(y) + " outside [0, " +
                                               std::to_string(num_classes) + ")");
    }
  }
  HeadResult result{model::Linear(features.cols(), static_cast<Index>(num_classes), derive_seed(config.seed, "init-head")),
                    {}};
  auto params = result.head.parameters();
  auto state = numgrad::make_optim_state(params, config.optimizer);
  std::vector<std::size_t> order(labels.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.options.learning_rate = numgrad::lr_at(config.schedule, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "head-shuffle", epoch));
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      RowMatrix x(static_cast<Index>(n), features.cols());
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x.row(static_cast<Index>(i)) = features.row(static_cast<Index>(order[start + i]));
        y[i] = labels[order[start + i]];
      }
      Tape tape;
      const Var loss = numgrad::softmax_cross_entropy(
          tape, result.head.forward(tape, tape.constant(model::to_tensor(x))), y);
      for (auto* p : params) p->zero_grad();
      tape.backward(loss);
      numgrad::adamw_step(params, state);
      total += tape.value(loss).item() * static_cast<double>(n);
    }
    result.history.push_back(
        {epoch + 1, total / static_cast<double>(order.size()), state.options.learning_rate, std::nullopt});
  }
  return result;
}

std::vector<int> require_labels(const dataio::Dataset& samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].label) throw Error(ErrorCode::MissingLabel, "sample " + std::to_string(i) + " has no label");
    labels.push_back(*samples[i].label);
  }
  return labels;
}

HeadResult train_head(const model::ContrastiveModel& model, const dataio::Dataset& samples, std::size_t num_classes,
                      const HeadConfig& config) {
  const auto labels = require_labels(samples);
  return train_head_on_features(represent(model, samples, config.representation), labels, num_classes, config);
}

std::vector<int> predict(const model::ClassificationHead& head, const RowMatrix& features) {
  const RowMatrix logits = head.apply(features);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const model::ContrastiveModel& model, const model::ClassificationHead& head,
                         Representation r, const dataio::Dataset& samples) {
  return predict(head, represent(model, samples, r));
}

}  // namespace sscl::contrastive
