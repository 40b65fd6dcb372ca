// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "common.hpp"

namespace gilt {
namespace {

using kernels::Trans;
using testing::random_matrix;

// Runs the parallel kernels with several threads even on a one-core host.
class KernelsTest : public ::testing::Test {
 protected:
  void SetUp() override { kernels::set_max_threads(4); }
  void TearDown() override { kernels::set_max_threads(0); }
};

Matrix naive_gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb) {
  const Matrix A = ta == Trans::yes ? transpose(a) : a;
  const Matrix B = tb == Trans::yes ? transpose(b) : b;
  Matrix c(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < B.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < A.cols(); ++k) s += static_cast<long double>(A(i, k)) * B(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution keep(density);
  SparseMatrix s;
  s.rows = rows;
  s.cols = cols;
  s.row_ptr.push_back(0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep(rng)) {
        s.col_idx.push_back(static_cast<std::uint32_t>(c));
        s.values.push_back(u(rng));
      }
    }
    s.row_ptr.push_back(s.values.size());
  }
  return s;
}

TEST_F(KernelsTest, GemmSerialAndParallelAreBitIdentical) {
  std::uint64_t seed = 1;
  for (Trans ta : {Trans::no, Trans::yes}) {
    for (Trans tb : {Trans::no, Trans::yes}) {
      for (auto [m, k, n] : {std::array<std::size_t, 3>{1, 1, 1}, {7, 13, 5}, {64, 33, 17}, {130, 70, 9}}) {
        const Matrix a = ta == Trans::yes ? random_matrix(k, m, seed++) : random_matrix(m, k, seed++);
        const Matrix b = tb == Trans::yes ? random_matrix(n, k, seed++) : random_matrix(k, n, seed++);
        Matrix cs;
        Matrix cp;
        kernels::serial::gemm(a, ta, b, tb, cs);
        kernels::parallel::gemm(a, ta, b, tb, cp);
        EXPECT_EQ(cs, cp);
        EXPECT_LT(max_abs_diff(cs, naive_gemm(a, ta, b, tb)), 1e-12);

        Matrix acc_s = random_matrix(m, n, seed);
        Matrix acc_p = acc_s;
        kernels::serial::gemm(a, ta, b, tb, acc_s, true);
        kernels::parallel::gemm(a, ta, b, tb, acc_p, true);
        EXPECT_EQ(acc_s, acc_p);
      }
    }
  }
}

TEST_F(KernelsTest, SpmmSerialAndParallelAreBitIdenticalAndMatchDense) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseMatrix s = random_sparse(40 + seed, 30 + seed, 0.1, seed);
    const Matrix x = random_matrix(s.cols, 6, seed + 100);
    Matrix ys;
    Matrix yp;
    kernels::serial::spmm(s, x, ys);
    kernels::parallel::spmm(s, x, yp);
    EXPECT_EQ(ys, yp);
    EXPECT_LT(max_abs_diff(ys, naive_gemm(s.to_dense(), Trans::no, x, Trans::no)), 1e-12);
  }
}

TEST_F(KernelsTest, SoftmaxSerialAndParallelAreBitIdentical) {
  const Matrix x = random_matrix(57, 23, 5, -30, 30);
  Matrix ys;
  Matrix yp;
  kernels::serial::softmax_rows(x, ys);
  kernels::parallel::softmax_rows(x, yp);
  EXPECT_EQ(ys, yp);
  for (std::size_t i = 0; i < ys.rows(); ++i) {
    double s = 0;
    for (double v : ys.row(i)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST_F(KernelsTest, SoftmaxIsStableForHugeLogits) {
  const Matrix x = Matrix::from_rows({{1000.0, 1000.0}, {-1000.0, 0.0}});
  Matrix y;
  kernels::softmax_rows(x, y);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_TRUE(all_finite(y));
  EXPECT_NEAR(y(1, 1), 1.0, 1e-15);
}

TEST_F(KernelsTest, LayerNormSerialAndParallelAreBitIdentical) {
  const Matrix x = random_matrix(91, 32, 9, -3, 3);
  Matrix ys;
  Matrix yp;
  std::vector<double> is(x.rows());
  std::vector<double> ip(x.rows());
  kernels::serial::layer_norm_rows(x, 1e-5, ys, is);
  kernels::parallel::layer_norm_rows(x, 1e-5, yp, ip);
  EXPECT_EQ(ys, yp);
  EXPECT_EQ(is, ip);
  for (std::size_t i = 0; i < ys.rows(); ++i) {
    double mean = 0;
    for (double v : ys.row(i)) mean += v;
    EXPECT_NEAR(mean / 32.0, 0.0, 1e-12);
  }
}

TEST_F(KernelsTest, PairwiseSumMatchesExactSum) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(kernels::pairwise_sum(v), 500500.0);
  EXPECT_EQ(kernels::pairwise_sum(std::span<const double>{}), 0.0);
}

TEST_F(KernelsTest, ResultsDoNotDependOnThreadCount) {
  const Matrix a = random_matrix(77, 41, 3);
  const Matrix b = random_matrix(41, 29, 4);
  Matrix ref;
  kernels::set_max_threads(1);
  kernels::parallel::gemm(a, Trans::no, b, Trans::no, ref);
  for (int t : {2, 3, 8}) {
    kernels::set_max_threads(t);
    Matrix c;
    kernels::parallel::gemm(a, Trans::no, b, Trans::no, c);
    EXPECT_EQ(ref, c) << t << " threads";
  }
}

}  // namespace
}  // namespace gilt
