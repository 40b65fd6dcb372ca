// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gilt/errors.hpp"
#include "gilt/kernels.hpp"

namespace gilt::ad {

using kernels::Trans;

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw Error("use of an unbound Var");
  return tape_->value(id_);
}

Matrix Var::grad() const {
  const Matrix& v = value();
  if (!tape_->has_grad(id_)) return Matrix(v.rows(), v.cols());
  return tape_->grad(id_);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix{}, false, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix{}, true, nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, std::span<const Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (&p.tape() != this) throw Error("Var from a different tape");
    needs = needs || requires_grad(p.id());
  }
  nodes_.push_back(Node{std::move(value), Matrix{}, needs, needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw Error("backward root from a different tape");
  const Matrix& v = value(root.id());
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("backward root must be 1x1");
  if (!requires_grad(root.id())) return;
  grad(root.id())(0, 0) += 1.0;
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.backward && !n.grad.empty()) n.backward(*this, id);
  }
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

void require_row(const Matrix& a, const Matrix& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError(std::string(op) + ": broadcast row must be 1x" + std::to_string(a.cols()));
  }
}

// Adds src into the gradient of var if it takes one.
void accumulate(Tape& t, int id, const Matrix& src) {
  if (!t.requires_grad(id)) return;
  Matrix& g = t.grad(id);
  for (std::size_t i = 0; i < src.size(); ++i) g.data()[i] += src.data()[i];
}

template <class F>
Var unary_map(Var a, F&& f, Tape::BackwardFn bw) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = f(x.data()[i]);
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, std::move(bw));
}

}  // namespace

Var matmul(Var a, Var b, bool transpose_a, bool transpose_b) {
  const Trans ta = transpose_a ? Trans::yes : Trans::no;
  const Trans tb = transpose_b ? Trans::yes : Trans::no;
  Matrix c;
  kernels::gemm(a.value(), ta, b.value(), tb, c);
  const int ia = a.id();
  const int ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(c), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(ia);
    const Matrix& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Matrix& ga = t.grad(ia);
      if (ta == Trans::no && tb == Trans::no) {
        kernels::gemm(g, Trans::no, bv, Trans::yes, ga, true);
      } else if (ta == Trans::no) {
        kernels::gemm(g, Trans::no, bv, Trans::no, ga, true);
      } else if (tb == Trans::no) {
        kernels::gemm(bv, Trans::no, g, Trans::yes, ga, true);
      } else {
        kernels::gemm(bv, Trans::yes, g, Trans::yes, ga, true);
      }
    }
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      if (ta == Trans::no && tb == Trans::no) {
        kernels::gemm(av, Trans::yes, g, Trans::no, gb, true);
      } else if (ta == Trans::no) {
        kernels::gemm(g, Trans::yes, av, Trans::no, gb, true);
      } else if (tb == Trans::no) {
        kernels::gemm(av, Trans::no, g, Trans::no, gb, true);
      } else {
        kernels::gemm(g, Trans::yes, av, Trans::yes, gb, true);
      }
    }
  });
}

Var spmm(std::shared_ptr<const SparseMatrix> s, Var x) {
  Matrix out;
  kernels::spmm(*s, x.value(), out);
  const int ix = x.id();
  const Var parents[] = {x};
  return x.tape().record(std::move(out), parents, [s, ix](Tape& t, int self) {
    if (!t.requires_grad(ix)) return;
    const SparseMatrix st = s->transposed();
    kernels::spmm(st, t.grad(self), t.grad(ix), true);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += b.value().data()[i];
  const int ia = a.id();
  const int ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix g = t.grad(self);
    accumulate(t, ia, g);
    accumulate(t, ib, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] -= b.value().data()[i];
  const int ia = a.id();
  const int ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    accumulate(t, ia, g);
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] -= g.data()[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.value().data()[i];
  const int ia = a.id();
  const int ib = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) {
      Matrix& ga = t.grad(ia);
      const Matrix& bv = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * bv.data()[i];
    }
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      const Matrix& av = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * av.data()[i];
    }
  });
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return unary_map(
      a, [s](double x) { return s * x; },
      [=](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        Matrix& ga = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += s * g.data()[i];
      });
}

Var add_row(Var a, Var row) {
  require_row(a.value(), row.value(), "add_row");
  Matrix y = a.value();
  const auto& r = row.value();
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += r(0, j);
  const int ia = a.id();
  const int ir = row.id();
  const Var parents[] = {a, row};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    accumulate(t, ia, g);
    if (t.requires_grad(ir)) {
      Matrix& gr = t.grad(ir);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
    }
  });
}

Var mul_row(Var a, Var row) {
  require_row(a.value(), row.value(), "mul_row");
  Matrix y = a.value();
  const auto& r = row.value();
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) *= r(0, j);
  const int ia = a.id();
  const int ir = row.id();
  const Var parents[] = {a, row};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(ia);
    const Matrix& rv = t.value(ir);
    if (t.requires_grad(ia)) {
      Matrix& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) * rv(0, j);
    }
    if (t.requires_grad(ir)) {
      Matrix& gr = t.grad(ir);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j) * av(i, j);
    }
  });
}

Var relu(Var a) {
  const int ia = a.id();
  return unary_map(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [=](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& x = t.value(ia);
        Matrix& ga = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x.data()[i] > 0.0) ga.data()[i] += g.data()[i];
        }
      });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Var a) {
  const int ia = a.id();
  return unary_map(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); },
      [=](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& xv = t.value(ia);
        Matrix& ga = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = xv.data()[i];
          const double th = std::tanh(kGeluC * (x + kGeluA * x * x * x));
          const double d = 0.5 * (1.0 + th) +
                           0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
          ga.data()[i] += g.data()[i] * d;
        }
      });
}

Var log_clamped(Var a, double floor) {
  const int ia = a.id();
  return unary_map(
      a, [floor](double x) { return std::log(std::max(x, floor)); },
      [=](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& x = t.value(ia);
        Matrix& ga = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x.data()[i] > floor) ga.data()[i] += g.data()[i] / x.data()[i];
        }
      });
}

Var apply_mask(Var a, Matrix mask) {
  require_same_shape(a.value(), mask, "apply_mask");
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= mask.data()[i];
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [ia, mask = std::move(mask)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * mask.data()[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < rows; ++i) std::copy(v.row(i).begin(), v.row(i).end(), y.row(i).begin() + off);
    ids.push_back(p.id());
    offsets.push_back(off);
    off += v.cols();
  }
  return parts[0].tape().record(std::move(y), parts, [ids, offsets](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!t.requires_grad(ids[p])) continue;
      Matrix& gp = t.grad(ids[p]);
      for (std::size_t i = 0; i < gp.rows(); ++i)
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(i, offsets[p] + j);
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix y(rows, cols);
  std::vector<int> ids;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    std::copy(v.data().begin(), v.data().end(), y.data().begin() + static_cast<std::ptrdiff_t>(off * cols));
    ids.push_back(p.id());
    offsets.push_back(off);
    off += v.rows();
  }
  return parts[0].tape().record(std::move(y), parts, [ids, offsets](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!t.requires_grad(ids[p])) continue;
      Matrix& gp = t.grad(ids[p]);
      for (std::size_t i = 0; i < gp.rows(); ++i)
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += g(offsets[p] + i, j);
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = a.value();
  if (begin + count > x.cols()) throw ShapeError("slice_cols: range out of bounds");
  Matrix y(x.rows(), count);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) y(i, j) = x(i, begin + j);
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < count; ++j) ga(i, begin + j) += g(i, j);
  });
}

Var gather_rows(Var a, std::span<const std::uint32_t> rows) {
  const Matrix& x = a.value();
  Matrix y(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), y.row(i).begin());
  }
  const int ia = a.id();
  const Var parents[] = {a};
  std::vector<std::uint32_t> idx(rows.begin(), rows.end());
  return a.tape().record(std::move(y), parents, [ia, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = ga.row(idx[i]);
      auto src = g.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

Var pick(Var a, std::span<const std::uint32_t> cols) {
  const Matrix& x = a.value();
  if (cols.size() != x.rows()) throw ShapeError("pick: need one column index per row");
  Matrix y(x.rows(), 1);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] >= x.cols()) throw ShapeError("pick: column index out of range");
    y(i, 0) = x(i, cols[i]);
  }
  const int ia = a.id();
  const Var parents[] = {a};
  std::vector<std::uint32_t> idx(cols.begin(), cols.end());
  return a.tape().record(std::move(y), parents, [ia, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga(i, idx[i]) += g(i, 0);
  });
}

Var sum_all(Var a) {
  Matrix y(1, 1, kernels::pairwise_sum(a.value().data()));
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    Matrix& ga = t.grad(ia);
    for (double& v : ga.data()) v += g;
  });
}

Var mean_all(Var a) {
  const auto n = a.value().size();
  if (n == 0) throw ShapeError("mean_all: empty input");
  return scale(sum_all(a), 1.0 / static_cast<double>(n));
}

Var mean_rows(Var a) {
  const Matrix& x = a.value();
  if (x.rows() == 0) throw ShapeError("mean_rows: no rows");
  const auto n = static_cast<double>(x.rows());
  Matrix y(1, x.cols());
  std::vector<double> column(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t i = 0; i < x.rows(); ++i) column[i] = x(i, j);
    y(0, j) = kernels::pairwise_sum(column) / n;
  }
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < ga.rows(); ++i)
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) / n;
  });
}

namespace {

double row_norm(std::span<const double> r, std::vector<double>& scratch) {
  scratch.resize(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) scratch[j] = r[j] * r[j];
  return std::sqrt(kernels::pairwise_sum(scratch));
}

}  // namespace

Var l2_norm_rows(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), 1);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) y(i, 0) = row_norm(x.row(i), scratch);
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& xv = t.value(ia);
    const Matrix& nv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      if (nv(i, 0) == 0.0) continue;
      const double s = g(i, 0) / nv(i, 0);
      for (std::size_t j = 0; j < xv.cols(); ++j) ga(i, j) += s * xv(i, j);
    }
  });
}

Var l2_normalize_rows(Var a, double zero_tol) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  std::vector<double> norms(x.rows());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    norms[i] = row_norm(x.row(i), scratch);
    if (norms[i] < zero_tol) {
      norms[i] = 0.0;
      continue;
    }
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = x(i, j) / norms[i];
  }
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [ia, norms = std::move(norms)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& yv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      if (norms[i] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += yv(i, j) * g(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += (g(i, j) - yv(i, j) * dot) / norms[i];
    }
  });
}

Var softmax_rows(Var a) {
  Matrix y;
  kernels::softmax_rows(a.value(), y);
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [=](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& yv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * yv(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += yv(i, j) * (g(i, j) - dot);
    }
  });
}

Var layer_norm_rows(Var a, double eps) {
  const Matrix& x = a.value();
  Matrix y;
  std::vector<double> inv_std(x.rows());
  kernels::layer_norm_rows(x, eps, y, inv_std);
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [ia, inv_std = std::move(inv_std)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& xh = t.value(self);
    Matrix& ga = t.grad(ia);
    const auto n = static_cast<double>(g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double mean_g = 0.0;
      double mean_gx = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) {
        mean_g += g(i, j);
        mean_gx += g(i, j) * xh(i, j);
      }
      mean_g /= n;
      mean_gx /= n;
      for (std::size_t j = 0; j < g.cols(); ++j) {
        ga(i, j) += inv_std[i] * (g(i, j) - mean_g - xh(i, j) * mean_gx);
      }
    }
  });
}

Var standardize_cols(Var a, double zero_tol) {
  const Matrix& x = a.value();
  if (x.rows() == 0) throw ShapeError("standardize_cols: no rows");
  const auto n = static_cast<double>(x.rows());
  Matrix y(x.rows(), x.cols());
  std::vector<double> inv_sd(x.cols(), 0.0);
  std::vector<double> column(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t i = 0; i < x.rows(); ++i) column[i] = x(i, j);
    const double mean = kernels::pairwise_sum(column) / n;
    for (std::size_t i = 0; i < x.rows(); ++i) column[i] = (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(kernels::pairwise_sum(column) / n);
    if (sd <= zero_tol * std::max(1.0, std::abs(mean))) continue;
    inv_sd[j] = 1.0 / sd;
    for (std::size_t i = 0; i < x.rows(); ++i) y(i, j) = (x(i, j) - mean) * inv_sd[j];
  }
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [ia, inv_sd = std::move(inv_sd), n](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& xh = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      if (inv_sd[j] == 0.0) continue;
      double mean_g = 0.0;
      double mean_gx = 0.0;
      for (std::size_t i = 0; i < g.rows(); ++i) {
        mean_g += g(i, j);
        mean_gx += g(i, j) * xh(i, j);
      }
      mean_g /= n;
      mean_gx /= n;
      for (std::size_t i = 0; i < g.rows(); ++i) {
        ga(i, j) += inv_sd[j] * (g(i, j) - mean_g - xh(i, j) * mean_gx);
      }
    }
  });
}

Var smooth_normalize_rows(Var a, double s) {
  if (!(s > 0.0)) throw ShapeError("smooth_normalize_rows: smoothing must be > 0");
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  std::vector<double> norms(x.rows());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = row_norm(x.row(i), scratch);
    norms[i] = std::sqrt(r * r + s * s);
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = x(i, j) / norms[i];
  }
  const int ia = a.id();
  const Var parents[] = {a};
  return a.tape().record(std::move(y), parents, [ia, norms = std::move(norms)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& yv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += yv(i, j) * g(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += (g(i, j) - yv(i, j) * dot) / norms[i];
    }
  });
}

Var cosine_rows(Var a, Var b) {
  if (a.cols() != b.cols()) throw ShapeError("cosine_rows: widths differ");
  constexpr double kSmoothing = 1e-12;
  return matmul(smooth_normalize_rows(a, kSmoothing), smooth_normalize_rows(b, kSmoothing), false, true);
}

}  // namespace gilt::ad
