// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "gilt/errors.hpp"
#include "gilt/grad_check.hpp"

namespace gilt::ad {
namespace {

using gilt::testing::random_matrix;

// Contracts the output with a fixed random weight so every output entry
// contributes to the scalar.
Var weighted_sum(Var y, std::uint64_t seed) {
  Tape& t = y.tape();
  return sum_all(mul(y, t.constant(random_matrix(y.rows(), y.cols(), seed))));
}

void expect_grad_ok(const ScalarFn& f, std::vector<Matrix> params, const char* what) {
  GradCheckOptions o;
  o.tolerance = 1e-6;
  const GradCheckReport r = grad_check(f, params, o);
  EXPECT_TRUE(r.passed) << what << ": max rel error " << r.max_rel_error;
  EXPECT_GT(r.coords_checked, 0u) << what;
}

TEST(AutodiffTest, LinearFunctionGradientIsExact) {
  const Matrix a = random_matrix(1, 6, 1);
  auto f = [&](Tape& t, std::span<const Var> p) { return sum_all(mul(p[0], t.constant(a))); };
  std::vector<Matrix> params{random_matrix(1, 6, 2)};
  std::vector<Matrix> grads;
  value_and_grad(f, params, grads);
  EXPECT_EQ(grads[0], a);
  const GradCheckReport r = grad_check(f, params);
  EXPECT_LT(r.max_abs_error, 1e-9);
}

TEST(AutodiffTest, CorruptedGradientFailsTheCheck) {
  auto f = [](Tape& t, std::span<const Var> p) { return weighted_sum(layer_norm_rows(p[0], 1e-5), 3); };
  std::vector<Matrix> params{random_matrix(3, 5, 4)};
  std::vector<Matrix> grads;
  value_and_grad(f, params, grads);
  grads[0](1, 2) *= 1.01;
  const GradCheckReport r = check_gradients(f, params, grads);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_index, 1u * 5u + 2u);
}

TEST(AutodiffTest, SoftmaxOfZerosIsUniform) {
  Tape t;
  const Var y = softmax_rows(t.constant(Matrix(1, 3, 0.0)));
  for (double v : y.value().data()) EXPECT_EQ(v, 1.0 / 3.0);
}

TEST(AutodiffTest, NormGradientAtThreeFour) {
  Tape t;
  const Var x = t.parameter(Matrix::from_rows({{3.0, 4.0}}));
  t.backward(sum_all(l2_norm_rows(x)));
  EXPECT_NEAR(x.grad()(0, 0), 0.6, 1e-10);
  EXPECT_NEAR(x.grad()(0, 1), 0.8, 1e-10);
}

TEST(AutodiffTest, LayerNormGradientMatchesFiniteDifferences) {
  auto f = [](Tape&, std::span<const Var> p) { return weighted_sum(layer_norm_rows(p[0], 1e-5), 11); };
  std::vector<Matrix> params{random_matrix(4, 8, 12)};
  const GradCheckReport r = grad_check(f, params);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(AutodiffTest, EveryOpPassesGradCheckOnRandomShapes) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::size_t n = 2 + s % 3;
    const std::size_t m = 3 + s % 4;
    const std::size_t k = 2 + (s * 7) % 5;
    const Matrix A = random_matrix(n, m, 100 + s);
    const Matrix B = random_matrix(m, k, 200 + s);
    const Matrix C = random_matrix(n, m, 300 + s);
    const Matrix R = random_matrix(1, m, 400 + s);

    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(matmul(p[0], p[1]), s); }, {A, B},
                   "matmul");
    expect_grad_ok(
        [&](Tape&, std::span<const Var> p) { return weighted_sum(matmul(p[0], p[1], true, false), s); },
        {A, C}, "matmul aT");
    expect_grad_ok(
        [&](Tape&, std::span<const Var> p) { return weighted_sum(matmul(p[0], p[1], false, true), s); },
        {A, C}, "matmul bT");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(add(p[0], p[1]), s); }, {A, C}, "add");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(sub(p[0], p[1]), s); }, {A, C}, "sub");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(mul(p[0], p[1]), s); }, {A, C}, "mul");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(scale(p[0], -2.5), s); }, {A},
                   "scale");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(add_row(p[0], p[1]), s); }, {A, R},
                   "add_row");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(mul_row(p[0], p[1]), s); }, {A, R},
                   "mul_row");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(gelu(p[0]), s); }, {A}, "gelu");
    // Keep relu inputs away from the kink.
    Matrix away = A;
    for (double& v : away.data()) v += v >= 0 ? 0.1 : -0.1;
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(relu(p[0]), s); }, {away}, "relu");
    Matrix pos = random_matrix(n, m, 500 + s, 0.2, 2.0);
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(log_clamped(p[0], 1e-12), s); },
                   {pos}, "log");
    Matrix mask(n, m, 0.0);
    for (std::size_t i = 0; i < mask.size(); i += 2) mask.data()[i] = 1.0 / 0.9;
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(apply_mask(p[0], mask), s); }, {A},
                   "dropout");
    expect_grad_ok(
        [&](Tape&, std::span<const Var> p) {
          const Var parts[] = {p[0], p[1]};
          return weighted_sum(concat_cols(parts), s);
        },
        {A, C}, "concat_cols");
    expect_grad_ok(
        [&](Tape&, std::span<const Var> p) {
          const Var parts[] = {p[0], p[1]};
          return weighted_sum(concat_rows(parts), s);
        },
        {A, C}, "concat_rows");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(slice_cols(p[0], 1, m - 2), s); }, {A},
                   "slice_cols");
    const std::vector<std::uint32_t> rows{1, 0, 1, static_cast<std::uint32_t>(n - 1)};
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(gather_rows(p[0], rows), s); }, {A},
                   "gather_rows");
    std::vector<std::uint32_t> cols(n);
    for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<std::uint32_t>(i % m);
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(pick(p[0], cols), s); }, {A}, "pick");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return mean_all(mul(p[0], p[0])); }, {A}, "mean_all");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(mean_rows(p[0]), s); }, {A},
                   "mean_rows");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(l2_norm_rows(p[0]), s); }, {A},
                   "l2_norm_rows");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(l2_normalize_rows(p[0]), s); }, {A},
                   "l2_normalize_rows");
    expect_grad_ok(
        [&](Tape&, std::span<const Var> p) { return weighted_sum(smooth_normalize_rows(p[0], 1e-3), s); }, {A},
        "smooth_normalize_rows");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(softmax_rows(scale(p[0], 3.0)), s); },
                   {A}, "softmax");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(layer_norm_rows(p[0], 1e-5), s); },
                   {A}, "layer_norm");
    const Matrix tall = random_matrix(n + 3, m, 600 + s, -2, 2);
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(standardize_cols(p[0]), s); }, {tall},
                   "standardize_cols");
    expect_grad_ok([&](Tape&, std::span<const Var> p) { return weighted_sum(cosine_rows(p[0], p[1]), s); },
                   {A, C}, "cosine_rows");
  }
}

TEST(AutodiffTest, SpmmGradientMatchesDenseTranspose) {
  auto s = std::make_shared<SparseMatrix>();
  s->rows = 3;
  s->cols = 3;
  s->row_ptr = {0, 2, 3, 5};
  s->col_idx = {0, 2, 1, 0, 2};
  s->values = {0.5, -1.0, 2.0, 0.25, 1.5};
  auto f = [&](Tape&, std::span<const Var> p) { return weighted_sum(spmm(s, p[0]), 7); };
  expect_grad_ok(f, {random_matrix(3, 4, 8)}, "spmm");
}

TEST(AutodiffTest, CosineWithZeroRowIsZeroAndStillDifferentiable) {
  Tape t;
  const Var q = t.parameter(Matrix(1, 3, 0.0));
  const Var p = t.constant(Matrix::from_rows({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}));
  const Var c = cosine_rows(q, p);
  EXPECT_EQ(c.value()(0, 0), 0.0);
  EXPECT_EQ(c.value()(0, 1), 0.0);
  t.backward(pick(c, std::vector<std::uint32_t>{0}));
  EXPECT_GT(q.grad()(0, 0), 0.0);
  EXPECT_EQ(q.grad()(0, 1), 0.0);
}

TEST(AutodiffTest, ShapeMismatchThrows) {
  Tape t;
  const Var a = t.constant(Matrix(2, 3));
  const Var b = t.constant(Matrix(2, 4));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(matmul(a, b), ShapeError);
  EXPECT_THROW(cosine_rows(a, b), ShapeError);
}

TEST(AutodiffTest, RepeatedRunsGiveBitIdenticalGradients) {
  auto f = [](Tape&, std::span<const Var> p) {
    return weighted_sum(softmax_rows(matmul(layer_norm_rows(p[0], 1e-5), p[1])), 5);
  };
  const std::vector<Matrix> params{random_matrix(6, 8, 1), random_matrix(8, 4, 2)};
  std::vector<Matrix> g1;
  std::vector<Matrix> g2;
  const double v1 = value_and_grad(f, params, g1);
  const double v2 = value_and_grad(f, params, g2);
  EXPECT_EQ(v1, v2);
  EXPECT_EQ(g1, g2);
}

}  // namespace
}  // namespace gilt::ad
