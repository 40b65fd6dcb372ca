// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/feature_align.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "gilt/errors.hpp"

namespace gilt {
namespace {

using gilt::testing::random_matrix;
using gilt::testing::random_normal;

double column_mean(const Matrix& x, std::size_t c) {
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, c);
  return s / static_cast<double>(x.rows());
}

double column_sd(const Matrix& x, std::size_t c) {
  const double m = column_mean(x, c);
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += (x(i, c) - m) * (x(i, c) - m);
  return std::sqrt(s / static_cast<double>(x.rows()));
}

double row_distance(const Matrix& x, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t c = 0; c < x.cols(); ++c) s += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
  return std::sqrt(s);
}

TEST(FeatureAlignTest, RankOneDataHasFullExplainedVarianceRatio) {
  Matrix x(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    const double t = static_cast<double>(i) - 7.3;
    x(i, 0) = 2.0 * t + 1.0;
    x(i, 1) = -0.5 * t + 3.0;
  }
  const PcaModel p = fit_pca(x, 1);
  EXPECT_NEAR(p.explained_variance_ratio()[0], 1.0, 1e-9);
}

TEST(FeatureAlignTest, OrthogonalColumnsGiveTheirVariances) {
  // Centred columns, orthogonal, with sample variances 4 and 1.
  const Matrix x = Matrix::from_rows({{2, 1}, {-2, 1}, {2, -1}, {-2, -1}});
  const double scale4 = std::sqrt(4.0 * 3.0 / 16.0);
  const double scale1 = std::sqrt(1.0 * 3.0 / 4.0);
  Matrix y = x;
  for (std::size_t i = 0; i < 4; ++i) {
    y(i, 0) *= scale4;
    y(i, 1) *= scale1;
  }
  const PcaModel p = fit_pca(y, 2);
  ASSERT_EQ(p.explained_variance.size(), 2u);
  EXPECT_NEAR(p.explained_variance[0], 4.0, 1e-9);
  EXPECT_NEAR(p.explained_variance[1], 1.0, 1e-9);
}

TEST(FeatureAlignTest, IncrementalMatchesExactProjectedGram) {
  const Matrix x = random_normal(500, 50, 21);
  IncrementalPcaOptions o;
  o.batch_rows = 64;
  const PcaModel exact = fit_pca(x, 8, PcaMethod::exact);
  const PcaModel inc = fit_pca(x, 8, PcaMethod::incremental, o);
  const Matrix ge = [&] {
    const Matrix z = exact.transform(x);
    Matrix g(8, 8, 0.0);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) g(a, b) += z(i, a) * z(i, b);
    return g;
  }();
  const Matrix z = inc.transform(x);
  Matrix gi(8, 8, 0.0);
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t b = 0; b < 8; ++b) gi(a, b) += z(i, a) * z(i, b);
  double diff = 0;
  double norm = 0;
  for (std::size_t k = 0; k < ge.size(); ++k) {
    diff += (ge.data()[k] - gi.data()[k]) * (ge.data()[k] - gi.data()[k]);
    norm += ge.data()[k] * ge.data()[k];
  }
  EXPECT_LT(std::sqrt(diff / norm), 1e-2);
}

TEST(FeatureAlignTest, BasisIsOrthonormalAndOrdered) {
  const Matrix x = random_normal(100, 12, 5);
  const PcaModel p = fit_pca(x, 6);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      double dot = 0;
      for (std::size_t r = 0; r < 12; ++r) dot += p.basis(r, a) * p.basis(r, b);
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
    }
  }
  for (std::size_t a = 1; a < 6; ++a) EXPECT_GE(p.explained_variance[a - 1], p.explained_variance[a]);
}

TEST(FeatureAlignTest, SignConventionMakesLargestEntryPositive) {
  const Matrix x = random_normal(60, 7, 9);
  const PcaModel p = fit_pca(x, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < 7; ++r)
      if (std::abs(p.basis(r, c)) > std::abs(p.basis(best, c))) best = r;
    EXPECT_GT(p.basis(best, c), 0.0);
  }
  Matrix neg = x;
  for (double& v : neg.data()) v = -v;
  const PcaModel q = fit_pca(neg, 4);
  EXPECT_LT(max_abs_diff(p.basis, q.basis), 1e-10);
}

TEST(FeatureAlignTest, TooManyComponentsIsAConfigError) {
  EXPECT_THROW(fit_pca(random_matrix(5, 3, 1), 4), ConfigError);
}

TEST(FeatureAlignTest, ConstantInputIsFlagged) {
  const PcaModel p = fit_pca(Matrix(10, 3, 2.5), 2);
  EXPECT_TRUE(p.all_constant);
  for (double v : p.explained_variance) EXPECT_EQ(v, 0.0);
  const Matrix z = p.transform(Matrix(10, 3, 2.5));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(FeatureAlignTest, ScaledColumnsHaveZeroMeanUnitSd) {
  Matrix x(40, 4, 0.0);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = 3.0 * std::sin(i * 1.1);
    x(i, 1) = (i % 2 == 0) ? 1.0 : -1.0;
    x(i, 2) = static_cast<double>(i) * 0.01;
    x(i, 3) = std::cos(i * 0.7) + 5.0;
  }
  AlignSpec s;
  s.unified_dim = 4;
  const AlignedFeatures a = align(x, s);
  ASSERT_EQ(a.values.cols(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_LT(std::abs(column_mean(a.values, c)), 1e-6);
    EXPECT_LT(std::abs(column_sd(a.values, c) - 1.0), 1e-6);
  }
}

TEST(FeatureAlignTest, NarrowInputIsZeroPadded) {
  Matrix x(30, 1);
  for (std::size_t i = 0; i < 30; ++i) x(i, 0) = std::sin(static_cast<double>(i));
  AlignSpec s;
  s.unified_dim = 4;
  const AlignedFeatures a = align(x, s);
  ASSERT_EQ(a.values.cols(), 4u);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t c = 1; c < 4; ++c) EXPECT_EQ(a.values(i, c), 0.0);
  EXPECT_EQ(a.degenerate_columns, (std::vector<bool>{false, true, true, true}));
}

TEST(FeatureAlignTest, RankDeficientInputFlagsDegenerateColumn) {
  const Matrix u = random_normal(50, 2, 3);
  const Matrix w = random_normal(2, 10, 4);
  Matrix x(50, 10, 0.0);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t c = 0; c < 10; ++c) x(i, c) = u(i, 0) * w(0, c) + u(i, 1) * w(1, c);
  AlignSpec s;
  s.unified_dim = 3;
  const AlignedFeatures a = align(x, s);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(a.values(i, 2), 0.0);
  EXPECT_TRUE(a.degenerate_columns[2]);
  EXPECT_FALSE(a.degenerate_columns[0]);
}

TEST(FeatureAlignTest, PcaAndPadPreserveDistances) {
  const Matrix x = random_normal(25, 5, 12, 2.0);
  const PcaModel p = fit_pca(x, 5);
  const Matrix z = p.transform(x);
  for (std::size_t a = 0; a < 25; ++a)
    for (std::size_t b = a + 1; b < 25; ++b) EXPECT_NEAR(row_distance(z, a, b), row_distance(x, a, b), 1e-8);
}

TEST(FeatureAlignTest, AlignIsDeterministic) {
  const Matrix x = random_normal(40, 20, 6);
  AlignSpec s;
  s.unified_dim = 8;
  const AlignedFeatures a = align(x, s);
  const AlignedFeatures b = align(x, s);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.pca, b.pca);
}

TEST(FeatureAlignTest, LearnableProjectionKeepsIntermediateScores) {
  const Matrix x = random_normal(40, 20, 6);
  AlignSpec s;
  s.unified_dim = 8;
  s.intermediate_dim = 4;
  s.mode = AlignMode::learnable_projection;
  const AlignedFeatures a = align(x, s);
  EXPECT_EQ(a.values.cols(), 4u);
  s.intermediate_dim = 9;
  EXPECT_THROW(align(x, s), ConfigError);
}

TEST(FeatureAlignTest, NonFiniteInputIsRejected) {
  Matrix x = random_matrix(5, 3, 1);
  x(2, 1) = std::nan("");
  EXPECT_THROW(align(x, AlignSpec{}), NonFiniteError);
}

TEST(FeatureAlignTest, ConstantColumnScalesToZero) {
  Matrix x = random_matrix(10, 3, 2);
  for (std::size_t i = 0; i < 10; ++i) x(i, 1) = 7.0;
  const ColumnScaling s = fit_column_scaling(x);
  EXPECT_TRUE(s.constant[1]);
  const Matrix y = apply_column_scaling(x, s);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(y(i, 1), 0.0);
}

}  // namespace
}  // namespace gilt
