#pragma once

#include <span>
#include <string>
#include <vector>

#include "courtesy/numerics/ops.hpp"
#include "courtesy/numerics/optim.hpp"

namespace courtesy::numerics {

// y = W x + b
template <typename Scalar>
struct Linear {
  Tensor<Scalar> weight;
  Tensor<Scalar> bias;

  Linear() = default;
  Linear(Index in, Index out, Rng& rng) : weight(xavier<Scalar>(out, in, rng)), bias(zeros<Scalar>(out, 1)) {}

  Var<Scalar> operator()(Tape<Scalar>& tape, const Var<Scalar>& x) const {
    return add_bias(matmul(tape.leaf(weight), x), tape.leaf(bias));
  }

  void collect(NamedParams<Scalar>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
  }
};

template <typename Scalar>
struct LstmState {
  Var<Scalar> h;
  Var<Scalar> c;
};

// Single LSTM layer; gates packed as [input; forget; candidate; output] in a
// (4H) x (in + H) weight over the stacked [x; h] input.
template <typename Scalar>
struct Lstm {
  Tensor<Scalar> weight;
  Tensor<Scalar> bias;
  Index input_size = 0;
  Index hidden_size = 0;

  Lstm() = default;
  Lstm(Index in, Index hidden, Rng& rng)
      : weight(xavier<Scalar>(4 * hidden, in + hidden, rng)),
        bias(zeros<Scalar>(4 * hidden, 1)),
        input_size(in),
        hidden_size(hidden) {
    bias.value.middleRows(hidden, hidden).setOnes();  // forget gate
  }

  LstmState<Scalar> initial(Tape<Scalar>& tape, Index batch) const {
    return {tape.constant(Matrix<Scalar>::Zero(hidden_size, batch)),
            tape.constant(Matrix<Scalar>::Zero(hidden_size, batch))};
  }

  // `keep` (1 x B), when non-empty, marks live columns; a 0 entry carries the
  // previous state through unchanged (padding).
  LstmState<Scalar> step(Tape<Scalar>& tape, const Var<Scalar>& x, const LstmState<Scalar>& prev,
                         const Matrix<Scalar>& keep = {}) const {
    const Index h = hidden_size;
    Var<Scalar> gates = add_bias(matmul(tape.leaf(weight), concat_rows({x, prev.h})), tape.leaf(bias));
    Var<Scalar> in_gate = sigmoid(slice_rows(gates, 0, h));
    Var<Scalar> forget_gate = sigmoid(slice_rows(gates, h, h));
    Var<Scalar> candidate = tanh(slice_rows(gates, 2 * h, h));
    Var<Scalar> out_gate = sigmoid(slice_rows(gates, 3 * h, h));
    Var<Scalar> c = add(mul(forget_gate, prev.c), mul(in_gate, candidate));
    Var<Scalar> hidden = mul(out_gate, tanh(c));
    if (keep.size() == 0 || keep.minCoeff() > Scalar(0.5)) return {hidden, c};
    Var<Scalar> live = tape.constant(keep);
    Var<Scalar> dead = tape.constant((Scalar(1) - keep.array()).matrix());
    return {add(scale_columns(hidden, live), scale_columns(prev.h, dead)),
            add(scale_columns(c, live), scale_columns(prev.c, dead))};
  }

  void collect(NamedParams<Scalar>& out, const std::string& prefix) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
  }
};

// Runs a bidirectional layer over a sequence of D x B inputs. Output t is
// [forward_t; backward_t]. `keep[t]` marks live columns at step t (empty: all
// live); padded steps carry state, so the backward direction starts at each
// column's last live step.
template <typename Scalar>
struct BiLstmOutput {
  std::vector<Var<Scalar>> outputs;
  LstmState<Scalar> forward_final;
  LstmState<Scalar> backward_final;
};

template <typename Scalar>
BiLstmOutput<Scalar> run_bidirectional(Tape<Scalar>& tape, const Lstm<Scalar>& fwd, const Lstm<Scalar>& bwd,
                                       std::span<const Var<Scalar>> inputs,
                                       std::span<const Matrix<Scalar>> keep) {
  const std::size_t steps = inputs.size();
  const Index batch = inputs.front().cols();
  auto live = [&](std::size_t t) -> const Matrix<Scalar>& {
    static const Matrix<Scalar> none;
    return keep.empty() ? none : keep[t];
  };
  std::vector<Var<Scalar>> forward_h(steps), backward_h(steps);
  LstmState<Scalar> f = fwd.initial(tape, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    f = fwd.step(tape, inputs[t], f, live(t));
    forward_h[t] = f.h;
  }
  LstmState<Scalar> b = bwd.initial(tape, batch);
  for (std::size_t t = steps; t-- > 0;) {
    b = bwd.step(tape, inputs[t], b, live(t));
    backward_h[t] = b.h;
  }
  BiLstmOutput<Scalar> out;
  out.outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.outputs.push_back(concat_rows({forward_h[t], backward_h[t]}));
  out.forward_final = f;
  out.backward_final = b;
  return out;
}

}  // namespace courtesy::numerics
