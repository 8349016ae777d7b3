// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "gradcheck.hpp"
#include "trelab/error.hpp"
#include "trelab/numerics/ops.hpp"

namespace {

using namespace trelab::numerics;
using trelab::testing::check_gradients;

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

TEST(Tensor, MatmulMatchesHandComputation) {
  const Tensor a = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor b = Tensor::matrix({{7, 8}, {9, 10}, {11, 12}});
  EXPECT_EQ(matmul(a, b), Tensor::matrix({{58, 64}, {139, 154}}));
  EXPECT_EQ(transpose(a), Tensor::matrix({{1, 4}, {2, 5}, {3, 6}}));
}

TEST(Tensor, MatmulRejectsMismatchedShapes) {
  EXPECT_THROW(matmul(Tensor({2, 3}), Tensor({2, 3})), trelab::DimensionError);
}

TEST(Softmax, RowsSumToOneAndIgnoreShifts) {
  Rng rng(3);
  const Tensor x = random_tensor({4, 7}, rng, 5.0);
  Tensor shifted = x;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 7; ++c) shifted(r, c) += 100.0 * static_cast<double>(r + 1);
  const Tensor p = softmax(x);
  const Tensor q = softmax(shifted);
  for (std::size_t r = 0; r < 4; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      total += p(r, c);
      EXPECT_NEAR(p(r, c), q(r, c), 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Softmax, LargeLogitsStayFinite) {
  const Tensor p = softmax(Tensor::matrix({{1000.0, 0.0, -1000.0}}));
  EXPECT_TRUE(p.all_finite());
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
}

TEST(CausalMask, BlocksFutureColumns) {
  Tape tape;
  const Var s = causal_mask(tape.constant(Tensor({3, 3}, 1.0)));
  const Tensor p = softmax(s.value());
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(1, 2), 0.0);
  EXPECT_NEAR(p(2, 1), 1.0 / 3.0, 1e-15);
}

TEST(LayerNorm, NormalizesEachRow) {
  Rng rng(5);
  Tape tape;
  const Var x = tape.constant(random_tensor({3, 8}, rng, 4.0));
  const Var y = layer_norm(x, tape.constant(Tensor({8}, 1.0)), tape.constant(Tensor({8}, 0.0)), 0.0);
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t c = 0; c < 8; ++c) mean += y.value()(r, c) / 8.0;
    for (std::size_t c = 0; c < 8; ++c) sq += std::pow(y.value()(r, c) - mean, 2) / 8.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq, 1.0, 1e-10);
  }
}

TEST(Gelu, KnownValues) {
  EXPECT_DOUBLE_EQ(gelu_value(0.0), 0.0);
  const double c = std::sqrt(2.0 / M_PI);
  for (double x : {-3.0, -0.5, 0.7, 2.0}) {
    const double expected = 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
    EXPECT_NEAR(gelu_value(x), expected, 1e-15);
  }
  EXPECT_NEAR(gelu_value(1.0), 0.8411919906082768, 1e-12);
}

TEST(CrossEntropy, MatchesLogSumExpOracle) {
  Rng rng(9);
  Tape tape;
  const Tensor logits = random_tensor({4, 5}, rng, 2.0);
  const std::vector<int> targets = {1, -1, 4, 0};
  const Var loss = cross_entropy(tape.constant(logits), targets);
  double expected = 0.0;
  int counted = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    if (targets[r] < 0) continue;
    double z = 0.0;
    for (std::size_t c = 0; c < 5; ++c) z += std::exp(logits(r, c));
    expected += std::log(z) - logits(r, static_cast<std::size_t>(targets[r]));
    ++counted;
  }
  EXPECT_NEAR(loss.value().item(), expected / counted, 1e-12);
}

TEST(CrossEntropy, AllIgnoredIsZero) {
  Tape tape;
  const std::vector<int> targets = {-1, -1};
  EXPECT_EQ(cross_entropy(tape.constant(Tensor({2, 3}, 0.5)), targets).value().item(), 0.0);
}

TEST(CrossEntropy, RejectsOutOfRangeTarget) {
  Tape tape;
  const std::vector<int> targets = {3};
  EXPECT_THROW(cross_entropy(tape.constant(Tensor({1, 3})), targets), trelab::IndexError);
}

TEST(Dropout, EvalModeIsIdentity) {
  Rng rng(1);
  Tape tape;
  const Var x = tape.constant(random_tensor({5, 5}, rng));
  EXPECT_EQ(dropout(x, 0.5, rng, false).value(), x.value());
}

TEST(Dropout, KeepsExpectedFractionAndMean) {
  Rng rng(2);
  Tape tape;
  const std::size_t n = 200000;
  const Var y = dropout(tape.constant(Tensor({n}, 1.0)), 0.25, rng, true);
  std::size_t zeros = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zeros += y.value()[i] == 0.0;
    total += y.value()[i];
  }
  // Binomial standard deviation of the zero fraction is about 0.001.
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.25, 0.005);
  EXPECT_NEAR(total / n, 1.0, 0.01);
}

TEST(Dropout, RejectsInvalidRate) {
  Rng rng(1);
  Tape tape;
  EXPECT_THROW(dropout(tape.constant(Tensor({2})), 1.0, rng, true), trelab::ConfigError);
}

TEST(Gradients, ElementwiseAndMatrixOps) {
  Rng rng(11);
  Parameter a("a", random_tensor({3, 4}, rng));
  Parameter b("b", random_tensor({4, 2}, rng));
  Parameter bias("bias", random_tensor({2}, rng));
  Parameter c("c", random_tensor({3, 2}, rng));
  auto loss = [&](Tape& t) {
    Var h = add_bias(matmul(t.parameter(a), t.parameter(b)), t.parameter(bias));
    h = mul(gelu(h), t.parameter(c));
    h = add(h, scale(transpose(transpose(t.parameter(c))), 0.3));
    return sum(mul(h, h));
  };
  EXPECT_LT(check_gradients(loss, {&a, &b, &bias, &c}).relative, 1e-6);
}

TEST(Gradients, SoftmaxLayerNormCrossEntropy) {
  Rng rng(12);
  Parameter x("x", random_tensor({4, 6}, rng));
  Parameter gain("gain", random_tensor({6}, rng));
  Parameter shift("shift", random_tensor({6}, rng));
  const std::vector<int> targets = {2, 0, -1, 5};
  auto loss = [&](Tape& t) {
    Var h = layer_norm(t.parameter(x), t.parameter(gain), t.parameter(shift));
    Var attn = softmax(causal_mask(matmul(slice_cols(h, 0, 4), transpose(slice_cols(h, 2, 6)))));
    Var mixed = concat_cols({matmul(attn, slice_cols(h, 0, 3)), slice_cols(h, 3, 6)});
    return cross_entropy(mixed, targets);
  };
  EXPECT_LT(check_gradients(loss, {&x, &gain, &shift}).relative, 1e-6);
}

TEST(Gradients, EmbeddingAndRowSlices) {
  Rng rng(13);
  Parameter table("table", random_tensor({6, 3}, rng));
  const std::vector<int> ids = {4, 1, 4, 0};
  auto loss = [&](Tape& t) {
    Var e = embedding(t.parameter(table), ids);
    return sum(mul(slice_rows(e, 1, 4), slice_rows(e, 0, 3)));
  };
  EXPECT_LT(check_gradients(loss, {&table}).relative, 1e-6);
}

TEST(Tape, ParameterReadTwiceAccumulatesBothPaths) {
  Rng rng(14);
  Parameter w("w", random_tensor({3, 3}, rng));
  Parameter twin_a("a", w.value), twin_b("b", w.value);
  const Tensor x = random_tensor({2, 3}, rng);
  auto run = [&](Parameter& first, Parameter& second) {
    Tape tape;
    const Var h = matmul(tape.constant(x), tape.parameter(first));
    tape.backward(sum(mul(matmul(h, transpose(tape.parameter(second))), h)));
  };
  w.grad = Tensor(w.value.shape());
  twin_a.grad = Tensor(w.value.shape());
  twin_b.grad = Tensor(w.value.shape());
  run(w, w);
  run(twin_a, twin_b);
  for (std::size_t i = 0; i < w.value.size(); ++i) EXPECT_NEAR(w.grad[i], twin_a.grad[i] + twin_b.grad[i], 1e-12);
}

TEST(Tape, BackwardAccumulatesAcrossCalls) {
  Parameter w("w", Tensor::vector({1.0, 2.0}));
  w.grad = Tensor({2});
  for (int k = 0; k < 3; ++k) {
    Tape tape;
    tape.backward(sum(mul(tape.parameter(w), tape.parameter(w))));
  }
  EXPECT_DOUBLE_EQ(w.grad[0], 6.0);
  EXPECT_DOUBLE_EQ(w.grad[1], 12.0);
}

TEST(Rng, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = Rng::derive(7, 1, 2), b = Rng::derive(7, 1, 2), c = Rng::derive(7, 1, 3);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Rng, StateRoundTrip) {
  Rng a(42);
  a.normal();
  Rng b;
  b.set_state(a.state());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(99);
  const int n = 100000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.015);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

}  // namespace
