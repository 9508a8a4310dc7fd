#pragma once

#include "sscl/model/config.hpp"
#include "sscl/numgrad/checkpoint.hpp"
#include "sscl/numgrad/ops.hpp"

#include <string>
#include <vector>

namespace sscl::model {

using numgrad::Matrix;
using numgrad::Parameter;
using numgrad::RowMatrix;
using numgrad::Tape;
using numgrad::Var;

// Conv(k=2) + BatchNorm + ReLU.
struct ConvUnit {
  Parameter kernel;  // [out, in, 2]
  Parameter bias;    // [out]
  Parameter gamma;   // [out]
  Parameter beta;    // [out]
  numgrad::RunningStats stats;
};

class Encoder {
 public:
  Encoder() = default;
  // Kaiming-uniform (fan-in) conv kernels, zero biases, gamma 1, beta 0; seeded
  // from config.seed. Validates the shape algebra.
  explicit Encoder(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }
  Index hidden_dim() const { return config_.hidden_dim(); }

  // [batch, width] -> [batch, hidden]. Train mode records parameters and
  // updates the batch-norm running statistics.
  Var forward_train(Tape& tape, Var input);
  // Parameters enter the tape as constants and running statistics are only
  // read, so nothing is trained and the encoder is not modified.
  Var forward_eval(Tape& tape, Var input) const;

  // Eval-mode forward of a plain matrix; rows are samples.
  RowMatrix encode(const RowMatrix& x) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<ConvUnit>& units() { return units_; }
  const std::vector<ConvUnit>& units() const { return units_; }

  void write(numgrad::Checkpoint& ckpt, const std::string& prefix) const;
  static Encoder read(const numgrad::Checkpoint& ckpt, const std::string& prefix, EncoderConfig config);

 private:
  Var reshape_input(Tape& tape, Var input) const;
  Var forward(Tape& tape, Var input, bool train, std::vector<numgrad::RunningStats>& stats,
              const std::vector<Var>& params) const;

  EncoderConfig config_;
  std::vector<ConvUnit> units_;
};

// Affine map used for the projection head g and the classification heads.
class Linear {
 public:
  Linear() = default;
  // Kaiming-uniform weights, zero bias.
  Linear(Index in, Index out, std::uint64_t seed);

  Index in_dim() const { return weight_.value.dim(1); }
  Index out_dim() const { return weight_.value.dim(0); }

  Var forward(Tape& tape, Var input);                // trainable
  Var forward_const(Tape& tape, Var input) const;    // frozen
  RowMatrix apply(const RowMatrix& x) const;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const { return {&weight_, &bias_}; }

  void write(numgrad::Checkpoint& ckpt, const std::string& prefix) const;
  static Linear read(const numgrad::Checkpoint& ckpt, const std::string& prefix);

 private:
  Parameter weight_;  // [out, in]
  Parameter bias_;    // [out]
};

using ProjectionHead = Linear;
using ClassificationHead = Linear;

// Encoder e and projection head g as produced by pretraining.
struct ContrastiveModel {
  Encoder encoder;
  ProjectionHead projection;

  static ContrastiveModel build(const EncoderConfig& config);

  std::vector<Parameter*> parameters();

  numgrad::Checkpoint to_checkpoint(const std::string& extra_metadata = "{}") const;
  static ContrastiveModel from_checkpoint(const numgrad::Checkpoint& ckpt);
};

std::size_t count_parameters(const std::vector<const Parameter*>& params);
std::size_t count_parameters(const Encoder& encoder);
std::size_t count_parameters(const Linear& head);
std::size_t count_parameters(const ContrastiveModel& model);

// Row-major [batch, width] matrix as a rank-2 tensor.
numgrad::Tensor to_tensor(const RowMatrix& x);

}  // namespace sscl::model
