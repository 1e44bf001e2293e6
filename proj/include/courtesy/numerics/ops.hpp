#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "courtesy/numerics/rng.hpp"
#include "courtesy/numerics/tape.hpp"

// Differentiable operations over Var. Every op computes its forward value with
// Eigen, records a backward rule on the tape, and rejects non-finite results.
// Column-wise ops (softmax, log_softmax, pick) treat each column as one
// example of a batch.
namespace courtesy::numerics {

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.tape() != b.tape()) throw UsageError("operands recorded on different tapes");
  return *a.tape();
}

template <typename Scalar>
Tape<Scalar>& same_tape(std::span<const Var<Scalar>> xs) {
  if (xs.empty()) throw UsageError("empty operand list");
  for (const auto& x : xs) {
    if (x.tape() != xs.front().tape()) throw UsageError("operands recorded on different tapes");
  }
  return *xs.front().tape();
}

template <typename Scalar>
bool any_needs_grad(std::span<const Var<Scalar>> xs) {
  for (const auto& x : xs) {
    if (x.needs_grad()) return true;
  }
  return false;
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = detail::same_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  const int ia = a.id(), ib = b.id();
  return tape.record(
      a.value() + b.value(), a.needs_grad() || b.needs_grad(),
      [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, g);
      },
      "add");
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = detail::same_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id(), ib = b.id();
  return tape.record(
      a.value() - b.value(), a.needs_grad() || b.needs_grad(),
      [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, -g);
      },
      "sub");
}

// a (r x c) + bias (r x 1) broadcast over columns.
template <typename Scalar>
Var<Scalar> add_bias(const Var<Scalar>& a, const Var<Scalar>& bias) {
  auto& tape = detail::same_tape(a, bias);
  if (bias.cols() != 1 || bias.rows() != a.rows()) {
    throw DimensionError("add_bias: bias must be " + std::to_string(a.rows()) + "x1");
  }
  const int ia = a.id(), ib = bias.id();
  Matrix<Scalar> out = a.value().colwise() + bias.value().col(0);
  return tape.record(
      std::move(out), a.needs_grad() || bias.needs_grad(),
      [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, g.rowwise().sum());
      },
      "add_bias");
}

// Elementwise product.
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = detail::same_tape(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id(), ib = b.id();
  return tape.record(
      a.value().cwiseProduct(b.value()), a.needs_grad() || b.needs_grad(),
      [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
        if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
      },
      "mul");
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar k) {
  const int ia = a.id();
  return a.tape()->record(
      a.value() * k, a.needs_grad(),
      [ia, k](Tape<Scalar>& t, const Matrix<Scalar>& g) { t.accumulate(ia, g * k); }, "scale");
}

// Adds a constant matrix (masks, offsets); no gradient flows to it.
template <typename Scalar>
Var<Scalar> add_constant(const Var<Scalar>& a, const Matrix<Scalar>& c) {
  require_same_shape(a.value(), c, "add_constant");
  const int ia = a.id();
  return a.tape()->record(
      a.value() + c, a.needs_grad(),
      [ia](Tape<Scalar>& t, const Matrix<Scalar>& g) { t.accumulate(ia, g); }, "add_constant");
}

// Elementwise product with a constant matrix.
template <typename Scalar>
Var<Scalar> mul_constant(const Var<Scalar>& a, Matrix<Scalar> c) {
  require_same_shape(a.value(), c, "mul_constant");
  const int ia = a.id();
  Matrix<Scalar> out = a.value().cwiseProduct(c);
  return a.tape()->record(
      std::move(out), a.needs_grad(),
      [ia, c = std::move(c)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, g.cwiseProduct(c));
      },
      "mul_constant");
}

// Scales column j of m (d x n) by w(0, j) where w is 1 x n.
template <typename Scalar>
Var<Scalar> scale_columns(const Var<Scalar>& m, const Var<Scalar>& w) {
  auto& tape = detail::same_tape(m, w);
  if (w.rows() != 1 || w.cols() != m.cols()) throw DimensionError("scale_columns: weights must be 1xcols");
  const int im = m.id(), iw = w.id();
  Matrix<Scalar> out = m.value() * w.value().row(0).asDiagonal();
  return tape.record(
      std::move(out), m.needs_grad() || w.needs_grad(),
      [im, iw](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        if (t.needs_grad(im)) t.accumulate(im, g * t.value(iw).row(0).asDiagonal());
        if (t.needs_grad(iw)) t.accumulate(iw, g.cwiseProduct(t.value(im)).colwise().sum());
      },
      "scale_columns");
}

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  auto& tape = detail::same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ") * (" + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
  const int ia = a.id(), ib = b.id();
  Matrix<Scalar> out = a.value() * b.value();
  return tape.record(
      std::move(out), a.needs_grad() || b.needs_grad(),
      [ia, ib](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
        if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
      },
      "matmul");
}

// Vertical stack.
template <typename Scalar>
Var<Scalar> concat_rows(std::span<const Var<Scalar>> parts) {
  auto& tape = detail::same_tape(parts);
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, cols);
  std::vector<int> ids;
  std::vector<Index> offsets;
  Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(r);
    r += p.rows();
  }
  return tape.record(
      std::move(out), detail::any_needs_grad(parts),
      [ids = std::move(ids), offsets = std::move(offsets)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleRows(offsets[k], t.value(ids[k]).rows()));
        }
      },
      "concat_rows");
}

template <typename Scalar>
Var<Scalar> concat_rows(std::initializer_list<Var<Scalar>> parts) {
  return concat_rows(std::span<const Var<Scalar>>(parts.begin(), parts.size()));
}

// Horizontal stack.
template <typename Scalar>
Var<Scalar> concat_cols(std::span<const Var<Scalar>> parts) {
  auto& tape = detail::same_tape(parts);
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  std::vector<int> ids;
  std::vector<Index> offsets;
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(c);
    c += p.cols();
  }
  return tape.record(
      std::move(out), detail::any_needs_grad(parts),
      [ids = std::move(ids), offsets = std::move(offsets)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (t.needs_grad(ids[k])) t.accumulate(ids[k], g.middleCols(offsets[k], t.value(ids[k]).cols()));
        }
      },
      "concat_cols");
}

template <typename Scalar>
Var<Scalar> slice_rows(const Var<Scalar>& a, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > a.rows()) throw DimensionError("slice_rows: out of range");
  const int ia = a.id();
  const Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(
      a.value().middleRows(start, count), a.needs_grad(),
      [ia, start, count, rows, cols](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> full = Matrix<Scalar>::Zero(rows, cols);
        full.middleRows(start, count) = g;
        t.accumulate(ia, full);
      },
      "slice_rows");
}

template <typename Scalar>
Var<Scalar> slice_cols(const Var<Scalar>& a, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > a.cols()) throw DimensionError("slice_cols: out of range");
  const int ia = a.id();
  const Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(
      a.value().middleCols(start, count), a.needs_grad(),
      [ia, start, count, rows, cols](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> full = Matrix<Scalar>::Zero(rows, cols);
        full.middleCols(start, count) = g;
        t.accumulate(ia, full);
      },
      "slice_cols");
}

// Gathers rows of `table` (V x d) as columns: out.col(k) = scales[k] * table.row(ids[k]).
// `scales` may be empty (all ones).
template <typename Scalar>
Var<Scalar> embedding(const Var<Scalar>& table, std::span<const int> ids, std::span<const Scalar> scales = {}) {
  if (!scales.empty() && scales.size() != ids.size()) throw DimensionError("embedding: scales/ids length");
  const Index vocab = table.rows();
  Matrix<Scalar> out(table.cols(), static_cast<Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= vocab) throw DimensionError("embedding: id " + std::to_string(ids[k]) + " out of range");
    const Scalar s = scales.empty() ? Scalar(1) : scales[k];
    out.col(static_cast<Index>(k)) = s * table.value().row(ids[k]).transpose();
  }
  const int it = table.id();
  return table.tape()->record(
      std::move(out), table.needs_grad(),
      [it, idv = std::vector<int>(ids.begin(), ids.end()),
       sv = std::vector<Scalar>(scales.begin(), scales.end())](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar>* slot = t.grad_slot(it);
        if (slot == nullptr) return;
        for (std::size_t k = 0; k < idv.size(); ++k) {
          const Scalar s = sv.empty() ? Scalar(1) : sv[k];
          slot->row(idv[k]) += s * g.col(static_cast<Index>(k)).transpose();
        }
      },
      "embedding");
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  const int ia = a.id();
  Matrix<Scalar> out = a.value().array().tanh().matrix();
  return a.tape()->record(
      out, a.needs_grad(),
      [ia, out](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, (g.array() * (Scalar(1) - out.array().square())).matrix());
      },
      "tanh");
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  const int ia = a.id();
  Matrix<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return a.tape()->record(
      out, a.needs_grad(),
      [ia, out](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, (g.array() * out.array() * (Scalar(1) - out.array())).matrix());
      },
      "sigmoid");
}

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  const int ia = a.id();
  return a.tape()->record(
      a.value().cwiseMax(Scalar(0)), a.needs_grad(),
      [ia](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, (t.value(ia).array() > Scalar(0)).select(g, Scalar(0)));
      },
      "relu");
}

template <typename Scalar>
Var<Scalar> log(const Var<Scalar>& a) {
  if ((a.value().array() <= Scalar(0)).any()) throw NumericError("log: non-positive input");
  const int ia = a.id();
  return a.tape()->record(
      a.value().array().log().matrix(), a.needs_grad(),
      [ia](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, g.cwiseQuotient(t.value(ia)));
      },
      "log");
}

// Column-wise softmax with max subtraction.
template <typename Scalar>
Matrix<Scalar> softmax_columns(const Matrix<Scalar>& z) {
  Matrix<Scalar> out(z.rows(), z.cols());
  for (Index c = 0; c < z.cols(); ++c) {
    const Scalar m = z.col(c).maxCoeff();
    out.col(c) = (z.col(c).array() - m).exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

// Column-wise log-softmax via log-sum-exp.
template <typename Scalar>
Matrix<Scalar> log_softmax_columns(const Matrix<Scalar>& z) {
  Matrix<Scalar> out(z.rows(), z.cols());
  for (Index c = 0; c < z.cols(); ++c) {
    const Scalar m = z.col(c).maxCoeff();
    const Scalar lse = m + std::log((z.col(c).array() - m).exp().sum());
    out.col(c) = (z.col(c).array() - lse).matrix();
  }
  return out;
}

template <typename Scalar>
Var<Scalar> softmax(const Var<Scalar>& z) {
  const int iz = z.id();
  Matrix<Scalar> p = softmax_columns(z.value());
  return z.tape()->record(
      p, z.needs_grad(),
      [iz, p](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        // dz = p * (g - <g, p>) per column
        Matrix<Scalar> dot = g.cwiseProduct(p).colwise().sum();
        t.accumulate(iz, p.cwiseProduct(g - Matrix<Scalar>::Ones(p.rows(), 1) * dot));
      },
      "softmax");
}

template <typename Scalar>
Var<Scalar> log_softmax(const Var<Scalar>& z) {
  const int iz = z.id();
  Matrix<Scalar> out = log_softmax_columns(z.value());
  return z.tape()->record(
      out, z.needs_grad(),
      [iz, out](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        // dz = g - softmax * sum(g) per column
        Matrix<Scalar> total = g.colwise().sum();
        Matrix<Scalar> p = out.array().exp().matrix();
        t.accumulate(iz, g - p * total.row(0).asDiagonal());
      },
      "log_softmax");
}

// Picks out(0, c) = a(rows[c], c).
template <typename Scalar>
Var<Scalar> pick(const Var<Scalar>& a, std::span<const int> rows) {
  if (static_cast<Index>(rows.size()) != a.cols()) throw DimensionError("pick: one row index per column");
  Matrix<Scalar> out(1, a.cols());
  for (Index c = 0; c < a.cols(); ++c) {
    if (rows[c] < 0 || rows[c] >= a.rows()) throw DimensionError("pick: row index out of range");
    out(0, c) = a.value()(rows[c], c);
  }
  const int ia = a.id();
  const Index nrows = a.rows();
  return a.tape()->record(
      std::move(out), a.needs_grad(),
      [ia, nrows, rv = std::vector<int>(rows.begin(), rows.end())](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> full = Matrix<Scalar>::Zero(nrows, static_cast<Index>(rv.size()));
        for (std::size_t c = 0; c < rv.size(); ++c) full(rv[c], static_cast<Index>(c)) = g(0, static_cast<Index>(c));
        t.accumulate(ia, full);
      },
      "pick");
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  const int ia = a.id();
  const Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(
      Matrix<Scalar>::Constant(1, 1, a.value().sum()), a.needs_grad(),
      [ia, rows, cols](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(ia, Matrix<Scalar>::Constant(rows, cols, g(0, 0)));
      },
      "sum");
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  return scale(sum(a), Scalar(1) / static_cast<Scalar>(a.value().size()));
}

// Elementwise maximum across same-shaped operands (pooling over a stacked
// axis). Gradient goes to the first operand holding the maximum.
template <typename Scalar>
Var<Scalar> max_over(std::span<const Var<Scalar>> parts) {
  auto& tape = detail::same_tape(parts);
  const Matrix<Scalar>& first = parts.front().value();
  Matrix<Scalar> out = first;
  Eigen::MatrixXi arg = Eigen::MatrixXi::Zero(first.rows(), first.cols());
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const Matrix<Scalar>& v = parts[k].value();
    require_same_shape(first, v, "max_over");
    for (Index j = 0; j < v.cols(); ++j) {
      for (Index i = 0; i < v.rows(); ++i) {
        if (v(i, j) > out(i, j)) {
          out(i, j) = v(i, j);
          arg(i, j) = static_cast<int>(k);
        }
      }
    }
  }
  std::vector<int> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  return tape.record(
      std::move(out), detail::any_needs_grad(parts),
      [ids = std::move(ids), arg = std::move(arg)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.needs_grad(ids[k])) continue;
          t.accumulate(ids[k], (arg.array() == static_cast<int>(k)).select(g, Scalar(0)));
        }
      },
      "max_over");
}

// Maximum along each row (over columns) -> r x 1, ties to the lowest column.
template <typename Scalar>
Var<Scalar> max_cols(const Var<Scalar>& a) {
  const Index rows = a.rows(), cols = a.cols();
  Matrix<Scalar> out(rows, 1);
  std::vector<Index> arg(static_cast<std::size_t>(rows));
  for (Index i = 0; i < rows; ++i) {
    Index best = 0;
    for (Index j = 1; j < cols; ++j) {
      if (a.value()(i, j) > a.value()(i, best)) best = j;
    }
    arg[static_cast<std::size_t>(i)] = best;
    out(i, 0) = a.value()(i, best);
  }
  const int ia = a.id();
  return a.tape()->record(
      std::move(out), a.needs_grad(),
      [ia, rows, cols, arg = std::move(arg)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> full = Matrix<Scalar>::Zero(rows, cols);
        for (Index i = 0; i < rows; ++i) full(i, arg[static_cast<std::size_t>(i)]) = g(i, 0);
        t.accumulate(ia, full);
      },
      "max_cols");
}

// Repeats a (r x c) `times` times horizontally -> r x (c*times).
template <typename Scalar>
Var<Scalar> tile_cols(const Var<Scalar>& a, Index times) {
  const Index c = a.cols();
  Matrix<Scalar> out = a.value().replicate(1, times);
  const int ia = a.id();
  return a.tape()->record(
      std::move(out), a.needs_grad(),
      [ia, c, times](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> acc = g.middleCols(0, c);
        for (Index k = 1; k < times; ++k) acc += g.middleCols(k * c, c);
        t.accumulate(ia, acc);
      },
      "tile_cols");
}

// 1 x (T*B) laid out time-major (column t*B + b) -> T x B.
template <typename Scalar>
Var<Scalar> fold_time(const Var<Scalar>& a, Index steps) {
  if (a.rows() != 1 || a.cols() % steps != 0) throw DimensionError("fold_time: expected 1 x (T*B)");
  const Index batch = a.cols() / steps;
  Matrix<Scalar> out(steps, batch);
  for (Index s = 0; s < steps; ++s) out.row(s) = a.value().middleCols(s * batch, batch);
  const int ia = a.id();
  return a.tape()->record(
      std::move(out), a.needs_grad(),
      [ia, steps, batch](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        Matrix<Scalar> flat(1, steps * batch);
        for (Index s = 0; s < steps; ++s) flat.middleCols(s * batch, batch) = g.row(s);
        t.accumulate(ia, flat);
      },
      "fold_time");
}

// Attention read-out: values is D x (T*B) time-major, weights is T x B.
// out.col(b) = sum_t weights(t, b) * values.col(t*B + b).
template <typename Scalar>
Var<Scalar> weighted_sum_over_time(const Var<Scalar>& values, const Var<Scalar>& weights) {
  auto& tape = detail::same_tape(values, weights);
  const Index steps = weights.rows(), batch = weights.cols();
  if (values.cols() != steps * batch) throw DimensionError("weighted_sum_over_time: values must be D x (T*B)");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(values.rows(), batch);
  for (Index s = 0; s < steps; ++s) {
    out += values.value().middleCols(s * batch, batch) * weights.value().row(s).asDiagonal();
  }
  const int iv = values.id(), iw = weights.id();
  return tape.record(
      std::move(out), values.needs_grad() || weights.needs_grad(),
      [iv, iw, steps, batch](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        if (t.needs_grad(iv)) {
          Matrix<Scalar> dv(g.rows(), steps * batch);
          for (Index s = 0; s < steps; ++s) dv.middleCols(s * batch, batch) = g * t.value(iw).row(s).asDiagonal();
          t.accumulate(iv, dv);
        }
        if (t.needs_grad(iw)) {
          Matrix<Scalar> dw(steps, batch);
          for (Index s = 0; s < steps; ++s) {
            dw.row(s) = t.value(iv).middleCols(s * batch, batch).cwiseProduct(g).colwise().sum();
          }
          t.accumulate(iw, dw);
        }
      },
      "weighted_sum_over_time");
}

// Inverted dropout. Identity when not training or rate == 0.
template <typename Scalar>
Var<Scalar> dropout(const Var<Scalar>& x, double rate, bool training, Rng& rng) {
  if (rate < 0 || rate >= 1) throw UsageError("dropout: rate must be in [0, 1)");
  if (!training || rate == 0) return x;
  Matrix<Scalar> mask(x.rows(), x.cols());
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  for (Index j = 0; j < mask.cols(); ++j) {
    for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = rng.bernoulli(rate) ? Scalar(0) : keep_scale;
  }
  return mul_constant(x, std::move(mask));
}

}  // namespace courtesy::numerics
