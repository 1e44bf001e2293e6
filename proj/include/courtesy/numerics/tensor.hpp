#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "courtesy/errors.hpp"

namespace courtesy::numerics {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// A rank-2 value with an optional gradient buffer. Model parameters are
// Tensors; so are inputs whose gradient is wanted (saliency).
template <typename Scalar = float>
struct Tensor {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool requires_grad = true;

  Tensor() = default;
  explicit Tensor(Matrix<Scalar> v, bool needs_grad = true)
      : value(std::move(v)), requires_grad(needs_grad) {}

  Index rows() const { return value.rows(); }
  Index cols() const { return value.cols(); }
  std::array<Index, 2> shape() const { return {value.rows(), value.cols()}; }
  Index size() const { return value.size(); }

  bool has_grad() const { return grad.rows() == value.rows() && grad.cols() == value.cols(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
void require_same_shape(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ") vs (" + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

// Converts between scalar types; used to build a 64-bit twin of a float model.
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t) {
  return Tensor<To>(t.value.template cast<To>(), t.requires_grad);
}

}  // namespace courtesy::numerics
