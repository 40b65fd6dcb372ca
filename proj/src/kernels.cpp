// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "gilt/errors.hpp"

namespace gilt::kernels {
namespace {

struct GemmShape {
  std::size_t m, k, n;
};

GemmShape gemm_shape(const Matrix& a, Trans ta, const Matrix& b, Trans tb) {
  const std::size_t m = ta == Trans::no ? a.rows() : a.cols();
  const std::size_t ka = ta == Trans::no ? a.cols() : a.rows();
  const std::size_t kb = tb == Trans::no ? b.rows() : b.cols();
  const std::size_t n = tb == Trans::no ? b.cols() : b.rows();
  if (ka != kb) {
    throw ShapeError("gemm: inner dimensions differ (" + std::to_string(ka) + " vs " +
                     std::to_string(kb) + ")");
  }
  return {m, ka, n};
}

void prepare_output(const GemmShape& s, Matrix& c, bool accumulate) {
  if (accumulate) {
    if (c.rows() != s.m || c.cols() != s.n) throw ShapeError("gemm: accumulator shape mismatch");
  } else {
    c = Matrix(s.m, s.n);
  }
}

void prepare_spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate) {
  if (s.cols != x.rows()) throw ShapeError("spmm: sparse cols != dense rows");
  if (accumulate) {
    if (out.rows() != s.rows || out.cols() != x.cols()) {
      throw ShapeError("spmm: accumulator shape mismatch");
    }
  } else {
    out = Matrix(s.rows, x.cols());
  }
}

void softmax_row(std::span<const double> x, std::span<double> y) {
  if (x.empty()) return;
  const double mx = *std::max_element(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = std::exp(x[j] - mx);
  const double z = pairwise_sum(y);
  for (double& v : y) v /= z;
}

void layer_norm_row(std::span<const double> x, double eps, std::span<double> y, double& inv_std,
                    std::vector<double>& scratch) {
  const auto n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  scratch.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) scratch[j] = (x[j] - mean) * (x[j] - mean);
  const double var = pairwise_sum(scratch) / n;
  inv_std = 1.0 / std::sqrt(var + eps);
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = (x[j] - mean) * inv_std;
}

constexpr std::size_t kParallelWork = 1 << 15;

bool use_parallel(std::size_t work) {
  return work >= kParallelWork && !omp_in_parallel() && omp_get_max_threads() > 1;
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 8;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace serial {

void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate) {
  const auto s = gemm_shape(a, ta, b, tb);
  prepare_output(s, c, accumulate);
  if (ta == Trans::no && tb == Trans::no) {
    for (std::size_t i = 0; i < s.m; ++i) {
      auto ci = c.row(i);
      for (std::size_t k = 0; k < s.k; ++k) {
        const double aik = a(i, k);
        auto bk = b.row(k);
        for (std::size_t j = 0; j < s.n; ++j) ci[j] += aik * bk[j];
      }
    }
  } else if (ta == Trans::no && tb == Trans::yes) {
    for (std::size_t i = 0; i < s.m; ++i) {
      auto ai = a.row(i);
      for (std::size_t j = 0; j < s.n; ++j) {
        auto bj = b.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < s.k; ++k) acc += ai[k] * bj[k];
        c(i, j) += acc;
      }
    }
  } else if (ta == Trans::yes && tb == Trans::no) {
    // k outermost streams rows of both operands; each c(i, j) still sees k in
    // increasing order.
    for (std::size_t k = 0; k < s.k; ++k) {
      auto ak = a.row(k);
      auto bk = b.row(k);
      for (std::size_t i = 0; i < s.m; ++i) {
        const double aki = ak[i];
        auto ci = c.row(i);
        for (std::size_t j = 0; j < s.n; ++j) ci[j] += aki * bk[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.k; ++k) acc += a(k, i) * b(j, k);
        c(i, j) += acc;
      }
    }
  }
}

void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate) {
  prepare_spmm(s, x, out, accumulate);
  for (std::size_t r = 0; r < s.rows; ++r) {
    auto orow = out.row(r);
    for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p) {
      const double w = s.values[p];
      auto xr = x.row(s.col_idx[p]);
      for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += w * xr[j];
    }
  }
}

void softmax_rows(const Matrix& x, Matrix& out) {
  out = Matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) softmax_row(x.row(i), out.row(i));
}

void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std) {
  out = Matrix(x.rows(), x.cols());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    layer_norm_row(x.row(i), eps, out.row(i), inv_std[i], scratch);
  }
}

}  // namespace serial

namespace parallel {

void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate) {
  const auto s = gemm_shape(a, ta, b, tb);
  prepare_output(s, c, accumulate);
  const auto m = static_cast<std::ptrdiff_t>(s.m);
  if (ta == Trans::no && tb == Trans::no) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      auto ci = c.row(i);
      for (std::size_t k = 0; k < s.k; ++k) {
        const double aik = a(i, k);
        auto bk = b.row(k);
        for (std::size_t j = 0; j < s.n; ++j) ci[j] += aik * bk[j];
      }
    }
  } else if (ta == Trans::no && tb == Trans::yes) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      auto ai = a.row(i);
      for (std::size_t j = 0; j < s.n; ++j) {
        auto bj = b.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < s.k; ++k) acc += ai[k] * bj[k];
        c(i, j) += acc;
      }
    }
  } else if (ta == Trans::yes && tb == Trans::no) {
    // Row-partitioned: each thread owns rows of c and walks k in order.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      auto ci = c.row(i);
      for (std::size_t k = 0; k < s.k; ++k) {
        const double aki = a(k, i);
        auto bk = b.row(k);
        for (std::size_t j = 0; j < s.n; ++j) ci[j] += aki * bk[j];
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.k; ++k) acc += a(k, i) * b(j, k);
        c(i, j) += acc;
      }
    }
  }
}

void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate) {
  prepare_spmm(s, x, out, accumulate);
  const auto rows = static_cast<std::ptrdiff_t>(s.rows);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    auto orow = out.row(r);
    for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p) {
      const double w = s.values[p];
      auto xr = x.row(s.col_idx[p]);
      for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += w * xr[j];
    }
  }
}

void softmax_rows(const Matrix& x, Matrix& out) {
  out = Matrix(x.rows(), x.cols());
  const auto rows = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) softmax_row(x.row(i), out.row(i));
}

void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std) {
  out = Matrix(x.rows(), x.cols());
  const auto rows = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      layer_norm_row(x.row(i), eps, out.row(i), inv_std[i], scratch);
    }
  }
}

}  // namespace parallel

void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate) {
  const auto s = gemm_shape(a, ta, b, tb);
  if (use_parallel(s.m * s.k * s.n)) {
    parallel::gemm(a, ta, b, tb, c, accumulate);
  } else {
    serial::gemm(a, ta, b, tb, c, accumulate);
  }
}

void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate) {
  if (use_parallel(s.nnz() * x.cols())) {
    parallel::spmm(s, x, out, accumulate);
  } else {
    serial::spmm(s, x, out, accumulate);
  }
}

void softmax_rows(const Matrix& x, Matrix& out) {
  if (use_parallel(x.size() * 8)) {
    parallel::softmax_rows(x, out);
  } else {
    serial::softmax_rows(x, out);
  }
}

void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std) {
  if (inv_std.size() != x.rows()) throw ShapeError("layer_norm_rows: inv_std size mismatch");
  if (use_parallel(x.size() * 8)) {
    parallel::layer_norm_rows(x, eps, out, inv_std);
  } else {
    serial::layer_norm_rows(x, eps, out, inv_std);
  }
}

void set_max_threads(int n) {
  static const int runtime_default = omp_get_max_threads();
  omp_set_num_threads(n >= 1 ? n : runtime_default);
}

int max_threads() { return omp_get_max_threads(); }

int apply_thread_env() {
  if (const char* env = std::getenv("GILT_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) {
      set_max_threads(static_cast<int>(std::min(n, static_cast<long>(max_threads()))));
    }
  }
  return max_threads();
}

}  // namespace gilt::kernels
