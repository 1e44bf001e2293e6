#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "gradcheck.hpp"
#include "op_suite.hpp"

#include "courtesy/numerics/layers.hpp"
#include "courtesy/numerics/ops.hpp"
#include "courtesy/numerics/optim.hpp"
#include "courtesy/numerics/rng.hpp"

using namespace courtesy;
using namespace courtesy::numerics;

using courtesy::testing::random_matrix;

TEST_CASE("softmax of equal logits is uniform") {
  Tape<float> t;
  auto p = softmax(t.constant(Matrix<float>::Zero(2, 1)));
  CHECK(p.value()(0, 0) == doctest::Approx(0.5));
  CHECK(p.value()(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("matmul by identity returns the operand") {
  Rng rng(1);
  Tape<float> t;
  Matrix<float> a = random_matrix(3, 4, rng).cast<float>();
  auto out = matmul(t.constant(Matrix<float>::Identity(3, 3)), t.constant(a));
  CHECK(out.value() == a);
}

TEST_CASE("softmax stays finite for large logits") {
  Tape<float> t;
  Matrix<float> z(2, 1);
  z << 1000.f, 0.f;
  auto p = softmax(t.constant(z));
  // 64-bit max-subtracted oracle
  const double e0 = 1.0, e1 = std::exp(-1000.0);
  CHECK(p.value().allFinite());
  CHECK(p.value()(0, 0) == doctest::Approx(e0 / (e0 + e1)));
  CHECK(p.value()(1, 0) == doctest::Approx(e1 / (e0 + e1)));
}

TEST_CASE("softmax columns are probability vectors") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Tape<float> t;
    auto p = softmax(t.constant(random_matrix(7, 3, rng, -30, 30).cast<float>()));
    CHECK((p.value().array() >= 0).all());
    for (Index c = 0; c < 3; ++c) CHECK(std::abs(p.value().col(c).sum() - 1.f) < 1e-5);
  }
}

TEST_CASE("backward: product rule") {
  Tensor<float> x(Matrix<float>::Constant(1, 1, 2.f));
  Tensor<float> y(Matrix<float>::Constant(1, 1, 3.f));
  Tape<float> t;
  t.backward(mul(t.leaf(x), t.leaf(y)));
  CHECK(x.grad(0, 0) == doctest::Approx(3.0));
  CHECK(y.grad(0, 0) == doctest::Approx(2.0));
  CHECK(t.size() == 0);
}

TEST_CASE("backward: gradient of summed softmax vanishes") {
  Rng rng(3);
  Tensor<double> z(random_matrix(5, 1, rng));
  Tape<double> t;
  t.backward(sum(softmax(t.leaf(z))));
  CHECK(z.grad.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward rejects a non-scalar loss") {
  Tensor<float> x(Matrix<float>::Ones(2, 1));
  Tape<float> t;
  auto v = t.leaf(x);
  CHECK_THROWS_AS(t.backward(v), UsageError);
}

TEST_CASE("shape mismatch and non-finite inputs are typed errors") {
  Tape<float> t;
  auto a = t.constant(Matrix<float>::Ones(2, 3));
  auto b = t.constant(Matrix<float>::Ones(2, 2));
  CHECK_THROWS_AS(add(a, b), DimensionError);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
  Matrix<float> bad = Matrix<float>::Ones(1, 1);
  bad(0, 0) = std::nanf("");
  CHECK_THROWS_AS(t.constant(bad), NumericError);
  Matrix<float> zero = Matrix<float>::Zero(1, 1);
  CHECK_THROWS_AS(log(t.constant(zero)), NumericError);
}

TEST_CASE("gradients of every differentiable op match finite differences") {
  for (const auto& r : testing::op_suite()) {
    INFO(r.name << " f32 worst: " << r.f32.worst << " f64 worst: " << r.f64.worst);
    CHECK(r.f32.checked > 0);
    CHECK(r.f32.max_rel_error < 1e-2);
    CHECK(r.f64.max_rel_error < 1e-4);
  }
}

TEST_CASE("lstm unrolled over padded steps matches finite differences") {
  Rng rng(21);
  Lstm<float> cell32(3, 4, rng);
  Linear<float> head32(4, 3, rng);
  Lstm<double> cell64;
  Linear<double> head64;
  cell64.input_size = 3;
  cell64.hidden_size = 4;
  cell64.weight.value = cell32.weight.value.cast<double>();
  cell64.bias.value = cell32.bias.value.cast<double>();
  head64.weight.value = head32.weight.value.cast<double>();
  head64.bias.value = head32.bias.value.cast<double>();
  NamedParams<float> p32;
  NamedParams<double> p64;
  cell32.collect(p32, "cell");
  head32.collect(p32, "head");
  cell64.collect(p64, "cell");
  head64.collect(p64, "head");
  std::vector<Eigen::MatrixXd> xs;
  for (int s = 0; s < 4; ++s) xs.push_back(random_matrix(3, 2, rng));
  auto loss = [&xs]<typename S>(Tape<S>& t, Lstm<S>& cell, Linear<S>& head) {
    auto state = cell.initial(t, 2);
    for (int s = 0; s < 4; ++s) {
      Matrix<S> keep(1, 2);
      keep << S(1), S(s < 2 ? 1 : 0);
      state = cell.step(t, t.constant(xs[static_cast<std::size_t>(s)].cast<S>()), state, keep);
    }
    const std::vector<int> labels{2, 0};
    return scale(sum(pick(log_softmax(head(t, state.h)), std::span<const int>(labels))), S(-1));
  };
  auto r = testing::check_gradients(
      p32, [&](Tape<float>& t) { return loss(t, cell32, head32); }, p64,
      [&](Tape<double>& t) { return loss(t, cell64, head64); }, 1e-3);
  INFO(r.worst);
  CHECK(r.checked > 20);
  CHECK(r.max_rel_error < 1e-2);
}

TEST_CASE("max pooling routes gradient to the lowest tied index") {
  Tensor<float> a(Matrix<float>::Constant(1, 1, 2.f));
  Tensor<float> b(Matrix<float>::Constant(1, 1, 2.f));
  Tensor<float> c(Matrix<float>::Constant(1, 1, 1.f));
  Tape<float> t;
  std::vector<Var<float>> parts{t.leaf(a), t.leaf(b), t.leaf(c)};
  t.backward(sum(max_over(std::span<const Var<float>>(parts))));
  CHECK(a.grad(0, 0) == 1.f);
  CHECK(b.grad(0, 0) == 0.f);
  CHECK(c.grad(0, 0) == 0.f);

  Tensor<float> row(Matrix<float>(1, 4));
  row.value << 1.f, 3.f, 3.f, 0.f;
  Tape<float> t2;
  t2.backward(sum(max_cols(t2.leaf(row))));
  CHECK(row.grad(0, 1) == 1.f);
  CHECK(row.grad(0, 2) == 0.f);
}

TEST_CASE("adam: first step moves by about lr against the gradient sign") {
  for (float g : {0.37f, -4.0f}) {
    Tensor<float> w(Matrix<float>::Constant(1, 1, 1.f));
    ParamList<float> params{&w};
    auto state = make_adam(params);
    w.grad = Matrix<float>::Constant(1, 1, g);
    adam_step(params, state);
    CHECK(w.value(0, 0) == doctest::Approx(1.0 - 0.001 * (g > 0 ? 1 : -1)).epsilon(1e-4));
    CHECK(state.step == 1);
  }
}

TEST_CASE("adam: zero gradient leaves the parameter unchanged") {
  Tensor<float> w(Matrix<float>::Constant(2, 2, 0.25f));
  ParamList<float> params{&w};
  auto state = make_adam(params);
  w.zero_grad();
  adam_step(params, state);
  CHECK(w.value == Matrix<float>::Constant(2, 2, 0.25f));
}

TEST_CASE("adam: missing gradient is a usage error") {
  Tensor<float> w(Matrix<float>::Constant(1, 1, 0.f));
  ParamList<float> params{&w};
  auto state = make_adam(params);
  CHECK_THROWS_AS(adam_step(params, state), UsageError);
}

TEST_CASE("adam: descends a scalar quadratic") {
  Tensor<double> w(Matrix<double>::Zero(1, 1));
  ParamList<double> params{&w};
  auto state = make_adam(params, AdamOptions{.lr = 0.1});
  for (int step = 0; step < 200; ++step) {
    w.zero_grad();
    Tape<double> t;
    auto d = add_constant(t.leaf(w), Matrix<double>(Matrix<double>::Constant(1, 1, -3.0)));
    t.backward(mul(d, d));
    adam_step(params, state);
  }
  // Oracle: f(w) = (w - 3)^2 has its minimum at 3.
  CHECK(std::abs(w.value(0, 0) - 3.0) < 0.1);
}

TEST_CASE("init: zeros, xavier bound and determinism") {
  CHECK(zeros<float>(2, 2) == Matrix<float>::Zero(2, 2));
  Rng a(42), b(42);
  auto x = xavier<float>(100, 100, a);
  auto y = xavier<float>(100, 100, b);
  CHECK(x.cwiseAbs().maxCoeff() <= static_cast<float>(std::sqrt(6.0 / 200.0)));
  CHECK(std::memcmp(x.data(), y.data(), sizeof(float) * static_cast<std::size_t>(x.size())) == 0);
  CHECK_THROWS_AS(zeros<float>(0, 3), DimensionError);
}

TEST_CASE("dropout contract") {
  Rng rng(9);
  Tape<float> t;
  auto x = t.constant(Matrix<float>::Ones(1000, 100));
  CHECK(dropout(x, 0.2, false, rng).value() == x.value());
  CHECK(dropout(x, 0.0, true, rng).value() == x.value());
  auto y = dropout(x, 0.2, true, rng).value();
  const double zero_fraction = static_cast<double>((y.array() == 0.f).count()) / static_cast<double>(y.size());
  // Binomial(1e5, 0.2): sd ~ 0.0013, so [0.19, 0.21] is a > 7 sigma window.
  CHECK(zero_fraction >= 0.19);
  CHECK(zero_fraction <= 0.21);
  CHECK(((y.array() == 0.f) || ((y.array() - 1.25f).abs() < 1e-6f)).all());
  CHECK_THROWS_AS(dropout(x, 1.0, true, rng), UsageError);
}

TEST_CASE("clip_grad_norm") {
  Tensor<float> a(Matrix<float>::Zero(2, 1));
  ParamList<float> params{&a};
  a.grad = Matrix<float>(2, 1);
  a.grad << 0.6f, 0.8f;
  clip_grad_norm(params, 5.0);
  CHECK(a.grad(0, 0) == doctest::Approx(0.6));
  a.grad << 3.f, 4.f;
  clip_grad_norm(params, 1.0);
  CHECK(a.grad(0, 0) == doctest::Approx(0.6));
  CHECK(a.grad(1, 0) == doctest::Approx(0.8));

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<float> p(Matrix<float>::Zero(5, 3)), q(Matrix<float>::Zero(2, 2));
    p.grad = random_matrix(5, 3, rng, -10, 10).cast<float>();
    q.grad = random_matrix(2, 2, rng, -10, 10).cast<float>();
    ParamList<float> both{&p, &q};
    const double max_norm = rng.uniform(0.5, 20.0);
    clip_grad_norm(both, max_norm);
    const double recomputed = std::sqrt(static_cast<double>(p.grad.squaredNorm() + q.grad.squaredNorm()));
    CHECK(recomputed <= max_norm * (1 + 1e-6));
  }
}

TEST_CASE("rng streams are reproducible and forks are independent") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng base(7);
  auto f1 = base.fork(1), f1b = base.fork(1), f2 = base.fork(2);
  CHECK(f1.next_u64() == f1b.next_u64());
  CHECK(f1.next_u64() != f2.next_u64());
  // The first mt19937_64 output for the default seed is fixed by the standard.
  Rng standard(5489);
  CHECK(standard.next_u64() == 14514284786278117030ULL);
}

TEST_CASE("training steps are bitwise reproducible for a fixed seed") {
  auto run = [] {
    Rng rng(77);
    Lstm<float> cell(3, 4, rng);
    Linear<float> head(4, 2, rng);
    NamedParams<float> named;
    cell.collect(named, "cell");
    head.collect(named, "head");
    auto params = unnamed(named);
    auto adam = make_adam(params);
    Rng data(3);
    for (int step = 0; step < 10; ++step) {
      zero_grads(params);
      Tape<float> t;
      auto state = cell.initial(t, 2);
      for (int s = 0; s < 3; ++s) {
        auto x = dropout(t.constant(random_matrix(3, 2, data).cast<float>()), 0.2, true, data);
        state = cell.step(t, x, state);
      }
      const std::vector<int> labels{0, 1};
      t.backward(scale(sum(pick(log_softmax(head(t, state.h)), std::span<const int>(labels))), -1.f));
      clip_grad_norm(params, 5.0);
      adam_step(params, adam);
    }
    std::vector<float> flat;
    for (auto* p : params) flat.insert(flat.end(), p->value.data(), p->value.data() + p->value.size());
    return flat;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}
