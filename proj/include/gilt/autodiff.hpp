// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gilt/matrix.hpp"

// Tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every operation of one forward pass. Tapes are not
// thread-safe; run one tape per episode and merge parameter gradients
// afterwards.
namespace gilt::ad {

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  const Matrix& value() const;
  // Gradient of the last backward() root with respect to this value. Returns
  // an all-zero matrix if no gradient reached it.
  Matrix grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  int id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Invoked during backward with the node's own id; reads grad(self) and adds
  // into the parents' gradients.
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf that receives a gradient.
  Var parameter(Matrix value);

  // Records an op result. requires_grad is inferred from the parents.
  Var record(Matrix value, std::span<const Var> parents, BackwardFn backward);

  // Seeds d(root)/d(root) = 1 for a 1×1 root and propagates to every node.
  void backward(Var root);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool has_grad(int id) const { return !nodes_[static_cast<std::size_t>(id)].grad.empty(); }
  // Gradient buffer of a node, zero-initialized on first access.
  Matrix& grad(int id);
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

// ---- linear algebra -------------------------------------------------------
Var matmul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
// s·x for a constant sparse s. The shared_ptr keeps s alive for backward.
Var spmm(std::shared_ptr<const SparseMatrix> s, Var x);

// ---- elementwise ----------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
// a (n×m) combined with a 1×m row broadcast over every row of a.
Var add_row(Var a, Var row);
Var mul_row(Var a, Var row);
Var relu(Var a);
Var gelu(Var a);
// log(max(a, floor)); gradient is zero where the clamp is active.
Var log_clamped(Var a, double floor);
// Inverted dropout with an explicit mask (entries 0 or 1/(1−p)).
Var apply_mask(Var a, Matrix mask);

// ---- shape ----------------------------------------------------------------
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::span<const std::uint32_t> rows);
// out(i) = a(i, cols[i]) as an n×1 column.
Var pick(Var a, std::span<const std::uint32_t> cols);

// ---- reductions -----------------------------------------------------------
Var sum_all(Var a);
Var mean_all(Var a);
// Column-wise mean over rows: n×m → 1×m.
Var mean_rows(Var a);

// ---- normalization --------------------------------------------------------
// Row Euclidean norms as n×1. d‖x‖/dx = x/‖x‖, zero at x = 0.
Var l2_norm_rows(Var a);
// Rows scaled to unit norm; rows with norm < zero_tol become exactly zero.
Var l2_normalize_rows(Var a, double zero_tol = 1e-12);
Var softmax_rows(Var a);
// Affine-free LayerNorm over each row.
Var layer_norm_rows(Var a, double eps);
// Column standardization to mean 0 / population sd 1. Columns whose sd is
// below zero_tol map to exactly zero.
Var standardize_cols(Var a, double zero_tol = 1e-12);
// Rows divided by the smoothed norm sqrt(‖x‖² + s²), s > 0. A zero row maps
// to zero with the finite Jacobian I/s.
Var smooth_normalize_rows(Var a, double s);
// Cosine similarity of every row of a against every row of b, with each row
// normalized by its smoothed norm (s = 1e-12). Rows that are zero score 0
// against everything and still receive gradient.
Var cosine_rows(Var a, Var b);

}  // namespace gilt::ad
