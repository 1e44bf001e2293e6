#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "courtesy/numerics/rng.hpp"
#include "courtesy/numerics/tensor.hpp"

namespace courtesy::numerics {

template <typename Scalar>
using ParamList = std::vector<Tensor<Scalar>*>;

template <typename Scalar>
using NamedParams = std::vector<std::pair<std::string, Tensor<Scalar>*>>;

template <typename Scalar>
ParamList<Scalar> unnamed(const NamedParams<Scalar>& named) {
  ParamList<Scalar> out;
  out.reserve(named.size());
  for (const auto& [_, p] : named) out.push_back(p);
  return out;
}

template <typename Scalar>
void zero_grads(const ParamList<Scalar>& params) {
  for (auto* p : params) p->zero_grad();
}

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamOptions options;
  std::vector<Matrix<Scalar>> first_moment;
  std::vector<Matrix<Scalar>> second_moment;
  long step = 0;
};

template <typename Scalar>
AdamState<Scalar> make_adam(const ParamList<Scalar>& params, AdamOptions options = {}) {
  AdamState<Scalar> state;
  state.options = options;
  for (const auto* p : params) {
    state.first_moment.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
    state.second_moment.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
  }
  return state;
}

// One bias-corrected Adam update over every parameter.
template <typename Scalar>
void adam_step(const ParamList<Scalar>& params, AdamState<Scalar>& state) {
  if (params.size() != state.first_moment.size()) throw UsageError("adam_step: state built for another parameter set");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto* p = params[k];
    if (!p->has_grad()) throw UsageError("adam_step: parameter " + std::to_string(k) + " has no gradient");
    if (state.first_moment[k].rows() != p->rows() || state.first_moment[k].cols() != p->cols()) {
      throw DimensionError("adam_step: moment shape mismatch for parameter " + std::to_string(k));
    }
  }
  ++state.step;
  const auto& o = state.options;
  const Scalar b1 = static_cast<Scalar>(o.beta1);
  const Scalar b2 = static_cast<Scalar>(o.beta2);
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(o.beta1, static_cast<double>(state.step)));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(o.beta2, static_cast<double>(state.step)));
  const Scalar lr = static_cast<Scalar>(o.lr);
  const Scalar eps = static_cast<Scalar>(o.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    m = b1 * m + (Scalar(1) - b1) * p->grad;
    v = b2 * v + (Scalar(1) - b2) * p->grad.cwiseAbs2();
    p->value.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  }
}

template <typename Scalar>
double global_grad_norm(const ParamList<Scalar>& params) {
  double total = 0;
  for (const auto* p : params) {
    if (p->has_grad()) total += p->grad.template cast<double>().squaredNorm();
  }
  return std::sqrt(total);
}

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename Scalar>
double clip_grad_norm(const ParamList<Scalar>& params, double max_norm) {
  if (!(max_norm > 0)) throw UsageError("clip_grad_norm: max_norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const Scalar factor = static_cast<Scalar>(max_norm / norm);
    for (auto* p : params) {
      if (p->has_grad()) p->grad *= factor;
    }
  }
  return norm;
}

template <typename Scalar>
Matrix<Scalar> zeros(Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) throw DimensionError("zeros: dims must be positive");
  return Matrix<Scalar>::Zero(rows, cols);
}

inline double xavier_bound(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Glorot-uniform sample with fan_out = rows and fan_in = cols.
template <typename Scalar>
Matrix<Scalar> xavier(Index rows, Index cols, Rng& rng) {
  if (rows <= 0 || cols <= 0) throw DimensionError("xavier: dims must be positive");
  const double bound = xavier_bound(cols, rows);
  Matrix<Scalar> out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
  }
  return out;
}

// Copy of a pretrained block; shape must match.
template <typename Scalar, typename Derived>
Matrix<Scalar> pretrained_copy(const Eigen::MatrixBase<Derived>& source, Index rows, Index cols) {
  if (source.rows() != rows || source.cols() != cols) throw DimensionError("pretrained_copy: shape mismatch");
  return source.template cast<Scalar>();
}

}  // namespace courtesy::numerics
