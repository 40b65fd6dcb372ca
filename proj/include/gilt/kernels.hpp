// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "gilt/matrix.hpp"

// Dense and sparse compute kernels.
//
// Two implementations live side by side: `serial` is the reference and
// `parallel` splits the outer (row) loop across OpenMP threads. Both visit the
// reduction index of every output element in the same increasing order, so
// their results are bit-identical; tests assert this and bench/ compares the
// two. The unqualified entry points pick one based on problem size.
namespace gilt::kernels {

enum class Trans { no, yes };

namespace serial {

// c = op(a)·op(b), or c += op(a)·op(b) when accumulate is set. c is resized
// when not accumulating.
void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate = false);

// out = s·x, or out += s·x.
void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate = false);

void softmax_rows(const Matrix& x, Matrix& out);

// Per-row standardization x̂ = (x − mean)/sqrt(var + eps); writes the row
// inverse standard deviations to inv_std (one per row).
void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std);

}  // namespace serial

namespace parallel {

void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate = false);
void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate = false);
void softmax_rows(const Matrix& x, Matrix& out);
void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std);

}  // namespace parallel

void gemm(const Matrix& a, Trans ta, const Matrix& b, Trans tb, Matrix& c, bool accumulate = false);
void spmm(const SparseMatrix& s, const Matrix& x, Matrix& out, bool accumulate = false);
void softmax_rows(const Matrix& x, Matrix& out);
void layer_norm_rows(const Matrix& x, double eps, Matrix& out, std::span<double> inv_std);

// Pairwise (cascade) summation. The split points depend only on the length,
// so the result is reproducible.
double pairwise_sum(std::span<const double> v);

// Caps the OpenMP team size; values < 1 restore the runtime default.
void set_max_threads(int n);
int max_threads();

// Reads GILT_THREADS and applies it. Returns the cap in effect.
int apply_thread_env();

}  // namespace gilt::kernels
