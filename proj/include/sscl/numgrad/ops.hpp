#pragma once

#include "sscl/numgrad/tape.hpp"

#include <span>

namespace sscl::numgrad {

// Layer primitives. Every function records one node on the tape and checks
// shapes up front, throwing Error{InvalidShape} on disagreement.

// [batch, in_ch, width] * [out_ch, in_ch, 2] + [out_ch] -> [batch, out_ch, width - 1].
// Stride 1, no padding.
Var conv1d(Tape& tape, Var input, Var kernel, Var bias);

// Non-overlapping max over windows along the last axis; a trailing partial
// window is dropped. Ties resolve to the first maximum.
Var maxpool1d(Tape& tape, Var input, Index window);

// [batch, ch, width] -> [batch, ch], max over width.
Var global_maxpool1d(Tape& tape, Var input);

enum class BatchNormMode { Train, Eval };

struct RunningStats {
  Vector mean;
  Vector var;

  static RunningStats init(Index channels) {
    return {Vector::Zero(channels), Vector::Ones(channels)};
  }
};

struct BatchNormOptions {
  double epsilon = 1e-5;
  double momentum = 0.1;
};

// Per-channel normalization over (batch, width). In Train mode the batch
// statistics are used and `stats` is updated by an exponential moving average
// (unbiased variance); in Eval mode `stats` is read only.
Var batchnorm1d(Tape& tape, Var input, Var gamma, Var beta, BatchNormMode mode, RunningStats& stats,
                BatchNormOptions options = {});

Var relu(Tape& tape, Var input);

// [batch, in] * [out, in]^T + [out] -> [batch, out].
Var affine(Tape& tape, Var input, Var weight, Var bias);

// Mean over the batch of -log softmax(logits)[label]; log-sum-exp stabilized.
Var softmax_cross_entropy(Tape& tape, Var logits, std::span<const int> labels);

Var sum(Tape& tape, Var input);
Var dot(Tape& tape, Var a, Var b);

// Differentiable cosine similarity of two equal-length tensors.
Var cosine_similarity(Tape& tape, Var a, Var b);

// Plain cosine similarity; throws Error{DegenerateVector} on a zero-norm input.
double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

// Row-wise log-sum-exp helper shared by the loss primitives.
double log_sum_exp(const Eigen::Ref<const Vector>& values);

}  // namespace sscl::numgrad
