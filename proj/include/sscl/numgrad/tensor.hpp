#pragma once

#include <Eigen/Core>

#include <initializer_list>
#include <string>
#include <vector>

namespace sscl::numgrad {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<Index>;

Index element_count(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major array of doubles tagged with a shape. An empty shape is a
// scalar holding one element.
class Tensor {
 public:
  Tensor() : data_(Vector::Zero(1)) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, Vector data);
  Tensor(Shape shape, std::initializer_list<double> values);

  static Tensor scalar(double value);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const noexcept { return data_.size(); }

  const Vector& data() const noexcept { return data_; }
  Vector& data() noexcept { return data_; }

  double item() const;  // throws InvalidShape unless size() == 1

  bool all_finite() const { return data_.allFinite(); }

  // Row-major view of a rank-2 tensor, or of the [ch, width] slab of sample
  // `b` in a rank-3 tensor.
  Eigen::Map<const RowMatrix> matrix() const;
  Eigen::Map<RowMatrix> matrix();
  Eigen::Map<const RowMatrix> slab(Index b) const;
  Eigen::Map<RowMatrix> slab(Index b);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Vector data_;
};

// Trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Vector grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Vector::Zero(value.size())) {}

  void zero_grad() { grad.setZero(value.size()); }
  Index size() const { return value.size(); }
};

}  // namespace sscl::numgrad
