#include "sscl/contrastive/loss.hpp"

#include "sscl/error.hpp"
#include "sscl/numgrad/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sscl::contrastive {

using numgrad::Tensor;
using numgrad::Vector;

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::Config, "temperature must be positive, got " + std::to_string(tau));
  }
}

void check_batch(Index rows) {
  if (rows < 2 || rows % 2 != 0) {
    throw Error(ErrorCode::InvalidBatch, "contrastive batch needs an even, non-zero number of views, got " +
                                             std::to_string(rows));
  }
}

// Unit-normalized rows plus the original norms.
RowMatrix normalize_rows(const RowMatrix& z, Vector& norms) {
  norms = z.rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > 0.0)) {
      throw Error(ErrorCode::DegenerateVector, "latent vector " + std::to_string(i) + " has zero norm");
    }
  }
  return norms.cwiseInverse().asDiagonal() * z;
}

Index partner(Index i) { return i ^ 1; }

}  // namespace

RowMatrix similarity_matrix(const RowMatrix& z) {
  Vector norms;
  const RowMatrix u = normalize_rows(z, norms);
  RowMatrix s = u * u.transpose();
  return s.cwiseMax(-1.0).cwiseMin(1.0);
}

double pair_loss(Index i, Index j, const RowMatrix& similarity, double tau) {
  check_tau(tau);
  const Index n = similarity.rows();
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw Error(ErrorCode::InvalidPair, "invalid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  Vector others(n - 1);
  for (Index k = 0, m = 0; k < n; ++k) {
    if (k != i) others[m++] = similarity(i, k) / tau;
  }
  return numgrad::log_sum_exp(others) - similarity(i, j) / tau;
}

double batch_loss(const RowMatrix& z, double tau) {
  check_tau(tau);
  check_batch(z.rows());
  const RowMatrix s = similarity_matrix(z);
  double total = 0.0;
  for (Index k = 0; k < z.rows(); k += 2) total += pair_loss(k, k + 1, s, tau) + pair_loss(k + 1, k, s, tau);
  return total / static_cast<double>(z.rows());
}

numgrad::Var nt_xent(numgrad::Tape& tape, numgrad::Var z, double tau) {
  check_tau(tau);
  const Tensor& zt = tape.value(z);
  if (zt.rank() != 2) throw Error(ErrorCode::InvalidShape, "nt_xent expects [2N, d], got " + numgrad::to_string(zt.shape()));
  const Index rows = zt.dim(0);
  check_batch(rows);

  Vector norms;
  const RowMatrix u = normalize_rows(zt.matrix(), norms);
  RowMatrix logits = (u * u.transpose()) / tau;
  // Row-wise softmax over k != i; the diagonal gets probability 0.
  RowMatrix prob(rows, rows);
  double total = 0.0;
  for (Index i = 0; i < rows; ++i) {
    logits(i, i) = -std::numeric_limits<double>::infinity();
    const double m = logits.row(i).maxCoeff();
    prob.row(i) = (logits.row(i).array() - m).exp();
    const double denom = prob.row(i).sum();
    prob.row(i) /= denom;
    total += m + std::log(denom) - logits(i, partner(i));
  }
  const double loss = total / static_cast<double>(rows);

  return tape.record(Tensor::scalar(loss), {z}, [z, u, prob, norms, tau, rows](numgrad::Tape& t, std::size_t self) {
    const double upstream = t.grad(self)[0];
    // dLoss/dS for S = U U^T.
    RowMatrix g = prob;
    for (Index i = 0; i < rows; ++i) g(i, partner(i)) -= 1.0;
    g *= upstream / (tau * static_cast<double>(rows));
    const RowMatrix du = (g + g.transpose()) * u;
    // Back through row normalization: (I - u u^T) du / |z|.
    RowMatrix dz(rows, u.cols());
    for (Index i = 0; i < rows; ++i) {
      dz.row(i) = (du.row(i) - du.row(i).dot(u.row(i)) * u.row(i)) / norms[i];
    }
    t.accumulate(z, Eigen::Map<const Vector>(dz.data(), dz.size()));
  });
}

}  // namespace sscl::contrastive
