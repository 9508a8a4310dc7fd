#include "sscl/numgrad/ops.hpp"

#include "sscl/error.hpp"

#include <cmath>
#include <string>

namespace sscl::numgrad {

namespace {

[[noreturn]] void shape_error(const std::string& op, const std::string& what) {
  throw Error(ErrorCode::InvalidShape, op + ": " + what);
}

void require_rank(const std::string& op, const Tensor& t, Index rank) {
  if (t.rank() != rank) {
    shape_error(op, "expected rank " + std::to_string(rank) + ", got " + to_string(t.shape()));
  }
}

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Splits a [out, in, 2] kernel into its left and right taps.
std::pair<Matrix, Matrix> kernel_taps(const Tensor& k) {
  const Index out = k.dim(0);
  const Index in = k.dim(1);
  Matrix left(out, in);
  Matrix right(out, in);
  for (Index o = 0; o < out; ++o) {
    for (Index i = 0; i < in; ++i) {
      left(o, i) = k.data()[(o * in + i) * 2];
      right(o, i) = k.data()[(o * in + i) * 2 + 1];
    }
  }
  return {std::move(left), std::move(right)};
}

}  // namespace

Var conv1d(Tape& tape, Var input, Var kernel, Var bias) {
  const Tensor& x = tape.value(input);
  const Tensor& k = tape.value(kernel);
  const Tensor& b = tape.value(bias);
  require_rank("conv1d", x, 3);
  require_rank("conv1d", k, 3);
  require_rank("conv1d", b, 1);
  const Index batch = x.dim(0), in_ch = x.dim(1), width = x.dim(2);
  const Index out_ch = k.dim(0);
  if (width < 2) shape_error("conv1d", "width must be >= 2, got " + std::to_string(width));
  if (k.dim(2) != 2) shape_error("conv1d", "kernel width must be 2, got " + std::to_string(k.dim(2)));
  if (k.dim(1) != in_ch) {
    shape_error("conv1d", "kernel expects " + std::to_string(k.dim(1)) + " input channels, got " +
                              std::to_string(in_ch));
  }
  if (b.dim(0) != out_ch) shape_error("conv1d", "bias length does not match output channels");

  const Index out_w = width - 1;
  const auto [left, right] = kernel_taps(k);
  Tensor y({batch, out_ch, out_w});
  for (Index n = 0; n < batch; ++n) {
    const auto xs = x.slab(n);
    auto ys = y.slab(n);
    ys.noalias() = left * xs.leftCols(out_w);
    ys.noalias() += right * xs.rightCols(out_w);
    ys.colwise() += b.data();
  }

  return tape.record(std::move(y), {input, kernel, bias}, [input, kernel, bias](Tape& t, std::size_t self) {
    const Tensor& xv = t.value(input);
    const Tensor& kv = t.value(kernel);
    const Index n_batch = xv.dim(0), n_in = xv.dim(1), w = xv.dim(2);
    const Index n_out = kv.dim(0), ow = w - 1;
    const Vector& g = t.grad(self);
    const auto [kl, kr] = kernel_taps(kv);

    if (t.needs_grad(input)) {
      Vector dx = Vector::Zero(xv.size());
      for (Index n = 0; n < n_batch; ++n) {
        ConstRowMap gs(g.data() + n * n_out * ow, n_out, ow);
        RowMap dxs(dx.data() + n * n_in * w, n_in, w);
        dxs.leftCols(ow).noalias() += kl.transpose() * gs;
        dxs.rightCols(ow).noalias() += kr.transpose() * gs;
      }
      t.accumulate(input, dx);
    }
    if (t.needs_grad(kernel) || t.needs_grad(bias)) {
      Matrix dl = Matrix::Zero(n_out, n_in);
      Matrix dr = Matrix::Zero(n_out, n_in);
      Vector db = Vector::Zero(n_out);
      for (Index n = 0; n < n_batch; ++n) {
        ConstRowMap gs(g.data() + n * n_out * ow, n_out, ow);
        const auto xs = xv.slab(n);
        dl.noalias() += gs * xs.leftCols(ow).transpose();
        dr.noalias() += gs * xs.rightCols(ow).transpose();
        db += gs.rowwise().sum();
      }
      Vector dk(kv.size());
      for (Index o = 0; o < n_out; ++o) {
        for (Index i = 0; i < n_in; ++i) {
          dk[(o * n_in + i) * 2] = dl(o, i);
          dk[(o * n_in + i) * 2 + 1] = dr(o, i);
        }
      }
      t.accumulate(kernel, dk);
      t.accumulate(bias, db);
    }
  });
}

Var maxpool1d(Tape& tape, Var input, Index window) {
  const Tensor& x = tape.value(input);
  require_rank("maxpool1d", x, 3);
  if (window < 1) shape_error("maxpool1d", "window must be >= 1");
  const Index batch = x.dim(0), ch = x.dim(1), width = x.dim(2);
  if (window > width) {
    shape_error("maxpool1d", "window " + std::to_string(window) + " exceeds width " + std::to_string(width));
  }
  const Index out_w = width / window;
  Tensor y({batch, ch, out_w});
  std::vector<Index> argmax(static_cast<std::size_t>(y.size()));
  const double* xd = x.data().data();
  for (Index row = 0; row < batch * ch; ++row) {
    for (Index t = 0; t < out_w; ++t) {
      Index best = row * width + t * window;
      for (Index p = best + 1; p < row * width + (t + 1) * window; ++p) {
        if (xd[p] > xd[best]) best = p;
      }
      y.data()[row * out_w + t] = xd[best];
      argmax[static_cast<std::size_t>(row * out_w + t)] = best;
    }
  }
  return tape.record(std::move(y), {input}, [input, argmax = std::move(argmax)](Tape& t, std::size_t self) {
    const Vector& g = t.grad(self);
    Vector dx = Vector::Zero(t.value(input).size());
    for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += g[static_cast<Index>(i)];
    t.accumulate(input, dx);
  });
}

Var global_maxpool1d(Tape& tape, Var input) {
  const Tensor& x = tape.value(input);
  require_rank("global_maxpool1d", x, 3);
  const Index batch = x.dim(0), ch = x.dim(1), width = x.dim(2);
  Tensor y({batch, ch});
  std::vector<Index> argmax(static_cast<std::size_t>(batch * ch));
  const double* xd = x.data().data();
  for (Index row = 0; row < batch * ch; ++row) {
    Index best = row * width;
    for (Index p = best + 1; p < (row + 1) * width; ++p) {
      if (xd[p] > xd[best]) best = p;
    }
    y.data()[row] = xd[best];
    argmax[static_cast<std::size_t>(row)] = best;
  }
  return tape.record(std::move(y), {input}, [input, argmax = std::move(argmax)](Tape& t, std::size_t self) {
    const Vector& g = t.grad(self);
    Vector dx = Vector::Zero(t.value(input).size());
    for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += g[static_cast<Index>(i)];
    t.accumulate(input, dx);
  });
}

Var batchnorm1d(Tape& tape, Var input, Var gamma, Var beta, BatchNormMode mode, RunningStats& stats,
                BatchNormOptions options) {
  const Tensor& x = tape.value(input);
  const Tensor& gm = tape.value(gamma);
  const Tensor& bt = tape.value(beta);
  require_rank("batchnorm1d", x, 3);
  const Index batch = x.dim(0), ch = x.dim(1), width = x.dim(2);
  if (gm.size() != ch || bt.size() != ch) shape_error("batchnorm1d", "gamma/beta length must equal channel count");
  if (stats.mean.size() != ch || stats.var.size() != ch) {
    shape_error("batchnorm1d", "running statistics length must equal channel count");
  }
  const Index count = batch * width;
  if (count == 0) shape_error("batchnorm1d", "no elements per channel");
  if (mode == BatchNormMode::Train && count < 2) {
    shape_error("batchnorm1d", "train mode needs at least 2 elements per channel");
  }

  Vector mean(ch), var(ch);
  if (mode == BatchNormMode::Train) {
    for (Index c = 0; c < ch; ++c) {
      double s = 0.0;
      for (Index n = 0; n < batch; ++n) s += x.slab(n).row(c).sum();
      mean[c] = s / static_cast<double>(count);
      double ss = 0.0;
      for (Index n = 0; n < batch; ++n) ss += (x.slab(n).row(c).array() - mean[c]).square().sum();
      var[c] = ss / static_cast<double>(count);
    }
    const double unbias = static_cast<double>(count) / static_cast<double>(count - 1);
    stats.mean = (1.0 - options.momentum) * stats.mean + options.momentum * mean;
    stats.var = (1.0 - options.momentum) * stats.var + options.momentum * unbias * var;
  } else {
    mean = stats.mean;
    var = stats.var;
  }

  const Vector inv_std = (var.array() + options.epsilon).rsqrt();
  Tensor xhat(x.shape());
  Tensor y(x.shape());
  for (Index n = 0; n < batch; ++n) {
    auto xh = xhat.slab(n);
    xh = (x.slab(n).colwise() - mean).array().colwise() * inv_std.array();
    y.slab(n) = (xh.array().colwise() * gm.data().array()).colwise() + bt.data().array();
  }

  const bool train = mode == BatchNormMode::Train;
  return tape.record(
      std::move(y), {input, gamma, beta},
      [input, gamma, beta, train, inv_std, xhat = std::move(xhat)](Tape& t, std::size_t self) {
        const Tensor& xv = t.value(input);
        const Vector& gmv = t.value(gamma).data();
        const Index n_batch = xv.dim(0), n_ch = xv.dim(1), w = xv.dim(2);
        const double m = static_cast<double>(n_batch * w);
        const Vector& g = t.grad(self);

        Vector dgamma = Vector::Zero(n_ch);
        Vector dbeta = Vector::Zero(n_ch);
        for (Index n = 0; n < n_batch; ++n) {
          ConstRowMap gs(g.data() + n * n_ch * w, n_ch, w);
          dbeta += gs.rowwise().sum();
          dgamma += gs.cwiseProduct(xhat.slab(n)).rowwise().sum();
        }
        t.accumulate(gamma, dgamma);
        t.accumulate(beta, dbeta);

        if (!t.needs_grad(input)) return;
        Vector dx(xv.size());
        for (Index n = 0; n < n_batch; ++n) {
          ConstRowMap gs(g.data() + n * n_ch * w, n_ch, w);
          RowMap dxs(dx.data() + n * n_ch * w, n_ch, w);
          if (train) {
            // dx = gamma * inv_std / m * (m * dy - sum(dy) - xhat * sum(dy * xhat))
            dxs = ((gs * m).colwise() - dbeta).array() - xhat.slab(n).array().colwise() * dgamma.array();
            dxs = dxs.array().colwise() * (gmv.array() * inv_std.array() / m);
          } else {
            dxs = gs.array().colwise() * (gmv.array() * inv_std.array());
          }
        }
        t.accumulate(input, dx);
      });
}

Var relu(Tape& tape, Var input) {
  const Tensor& x = tape.value(input);
  Tensor y(x.shape(), x.data().cwiseMax(0.0));
  return tape.record(std::move(y), {input}, [input](Tape& t, std::size_t self) {
    const Vector& xv = t.value(input).data();
    t.accumulate(input, (xv.array() > 0.0).select(t.grad(self), 0.0));
  });
}

Var affine(Tape& tape, Var input, Var weight, Var bias) {
  const Tensor& x = tape.value(input);
  const Tensor& w = tape.value(weight);
  const Tensor& b = tape.value(bias);
  require_rank("affine", x, 2);
  require_rank("affine", w, 2);
  require_rank("affine", b, 1);
  if (w.dim(1) != x.dim(1)) {
    shape_error("affine", "weight expects " + std::to_string(w.dim(1)) + " inputs, got " + std::to_string(x.dim(1)));
  }
  if (b.dim(0) != w.dim(0)) shape_error("affine", "bias length does not match output dimension");

  Tensor y({x.dim(0), w.dim(0)});
  y.matrix().noalias() = x.matrix() * w.matrix().transpose();
  y.matrix().rowwise() += b.data().transpose();

  return tape.record(std::move(y), {input, weight, bias}, [input, weight, bias](Tape& t, std::size_t self) {
    const Tensor& xv = t.value(input);
    const Tensor& wv = t.value(weight);
    ConstRowMap g(t.grad(self).data(), xv.dim(0), wv.dim(0));
    if (t.needs_grad(input)) {
      RowMatrix dx = g * wv.matrix();
      t.accumulate(input, Eigen::Map<const Vector>(dx.data(), dx.size()));
    }
    if (t.needs_grad(weight)) {
      RowMatrix dw = g.transpose() * xv.matrix();
      t.accumulate(weight, Eigen::Map<const Vector>(dw.data(), dw.size()));
    }
    t.accumulate(bias, g.colwise().sum().transpose());
  });
}

double log_sum_exp(const Eigen::Ref<const Vector>& values) {
  const double m = values.maxCoeff();
  return m + std::log((values.array() - m).exp().sum());
}

Var softmax_cross_entropy(Tape& tape, Var logits, std::span<const int> labels) {
  const Tensor& z = tape.value(logits);
  require_rank("softmax_cross_entropy", z, 2);
  const Index batch = z.dim(0), classes = z.dim(1);
  if (static_cast<Index>(labels.size()) != batch) {
    shape_error("softmax_cross_entropy", "label count does not match batch size");
  }
  if (batch == 0) shape_error("softmax_cross_entropy", "empty batch");

  RowMatrix probs(batch, classes);
  double total = 0.0;
  const auto zm = z.matrix();
  for (Index n = 0; n < batch; ++n) {
    const int label = labels[static_cast<std::size_t>(n)];
    if (label < 0 || label >= classes) {
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(label) + " outside [0, " +
                                               std::to_string(classes) + ")");
    }
    const Vector row = zm.row(n).transpose();
    const double lse = log_sum_exp(row);
    total += lse - row[label];
    probs.row(n) = (row.array() - lse).exp().transpose();
  }

  std::vector<int> owned(labels.begin(), labels.end());
  return tape.record(Tensor::scalar(total / static_cast<double>(batch)), {logits},
                     [logits, probs = std::move(probs), owned = std::move(owned)](Tape& t, std::size_t self) {
                       RowMatrix d = probs;
                       for (std::size_t n = 0; n < owned.size(); ++n) d(static_cast<Index>(n), owned[n]) -= 1.0;
                       d *= t.grad(self)[0] / static_cast<double>(owned.size());
                       t.accumulate(logits, Eigen::Map<const Vector>(d.data(), d.size()));
                     });
}

Var sum(Tape& tape, Var input) {
  const Tensor& x = tape.value(input);
  return tape.record(Tensor::scalar(x.data().sum()), {input}, [input](Tape& t, std::size_t self) {
    t.accumulate(input, Vector::Constant(t.value(input).size(), t.grad(self)[0]));
  });
}

Var dot(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  if (av.size() != bv.size()) shape_error("dot", "length mismatch");
  return tape.record(Tensor::scalar(av.data().dot(bv.data())), {a, b}, [a, b](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Vector ga = g * t.value(b).data();
    const Vector gb = g * t.value(a).data();
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

double cosine_similarity(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) shape_error("cosine_similarity", "length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::DegenerateVector, "cosine similarity of a zero-norm vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Var cosine_similarity(Tape& tape, Var a, Var b) {
  const Vector& av = tape.value(a).data();
  const Vector& bv = tape.value(b).data();
  const double s = cosine_similarity(av, bv);
  return tape.record(Tensor::scalar(s), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Vector& x = t.value(a).data();
    const Vector& y = t.value(b).data();
    const double g = t.grad(self)[0];
    const double nx = x.norm(), ny = y.norm();
    const double c = x.dot(y) / (nx * ny);
    // d cos / dx = y / (|x||y|) - cos * x / |x|^2
    const Vector gx = g * (y / (nx * ny) - c * x / (nx * nx));
    const Vector gy = g * (x / (nx * ny) - c * y / (ny * ny));
    t.accumulate(a, gx);
    t.accumulate(b, gy);
  });
}

}  // namespace sscl::numgrad
