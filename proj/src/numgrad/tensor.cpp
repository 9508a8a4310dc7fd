#include "sscl/numgrad/tensor.hpp"

#include "sscl/error.hpp"

#include <sstream>

namespace sscl::numgrad {

Index element_count(const Shape& shape) {
  Index n = 1;
  for (const Index d : shape) {
    if (d <= 0) throw Error(ErrorCode::InvalidShape, "non-positive dimension in " + to_string(shape));
    n *= d;
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(Vector::Zero(element_count(shape_))) {}

Tensor::Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw Error(ErrorCode::InvalidShape, "shape " + to_string(shape_) + " does not match " +
                                             std::to_string(data_.size()) + " elements");
  }
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape), Eigen::Map<const Vector>(values.begin(), static_cast<Index>(values.size()))) {}

Tensor Tensor::scalar(double value) {
  Vector v(1);
  v[0] = value;
  return Tensor({}, std::move(v));
}

Tensor Tensor::filled(Shape shape, double value) {
  const Index n = element_count(shape);
  return Tensor(std::move(shape), Vector::Constant(n, value));
}

double Tensor::item() const {
  if (size() != 1) throw Error(ErrorCode::InvalidShape, "item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

Eigen::Map<const RowMatrix> Tensor::matrix() const {
  if (rank() != 2) throw Error(ErrorCode::InvalidShape, "matrix() needs rank 2, got " + to_string(shape_));
  return {data_.data(), shape_[0], shape_[1]};
}

Eigen::Map<RowMatrix> Tensor::matrix() {
  if (rank() != 2) throw Error(ErrorCode::InvalidShape, "matrix() needs rank 2, got " + to_string(shape_));
  return {data_.data(), shape_[0], shape_[1]};
}

Eigen::Map<const RowMatrix> Tensor::slab(Index b) const {
  if (rank() != 3) throw Error(ErrorCode::InvalidShape, "slab() needs rank 3, got " + to_string(shape_));
  return {data_.data() + b * shape_[1] * shape_[2], shape_[1], shape_[2]};
}

Eigen::Map<RowMatrix> Tensor::slab(Index b) {
  if (rank() != 3) throw Error(ErrorCode::InvalidShape, "slab() needs rank 3, got " + to_string(shape_));
  return {data_.data() + b * shape_[1] * shape_[2], shape_[1], shape_[2]};
}

}  // namespace sscl::numgrad
