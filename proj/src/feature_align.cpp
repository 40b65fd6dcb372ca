// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/feature_align.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "gilt/errors.hpp"
#include "gilt/kernels.hpp"

namespace gilt {
namespace {

using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Relative eigenvalue floor below which a component counts as degenerate.
constexpr double kDegenerateRel = 1e-10;

Matrix column_means(const Matrix& x) {
  Matrix mean(1, x.cols());
  std::vector<double> col(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x(r, c);
    mean(0, c) = kernels::pairwise_sum(col) / static_cast<double>(x.rows());
  }
  return mean;
}

void fix_signs(Matrix& basis) {
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < basis.rows(); ++r) {
      if (std::abs(basis(r, c)) > std::abs(basis(best, c))) best = r;
    }
    if (basis(best, c) < 0) {
      for (std::size_t r = 0; r < basis.rows(); ++r) basis(r, c) = -basis(r, c);
    }
  }
}

void mark_degenerate(PcaModel& m) {
  const double lead = m.explained_variance.empty() ? 0.0 : m.explained_variance.front();
  m.all_constant = !(lead > 0.0);
  m.degenerate.assign(m.explained_variance.size(), false);
  for (std::size_t i = 0; i < m.explained_variance.size(); ++i) {
    m.degenerate[i] = m.all_constant || m.explained_variance[i] <= kDegenerateRel * lead;
    if (m.degenerate[i]) m.explained_variance[i] = std::max(m.explained_variance[i], 0.0);
  }
}

void check_input(const Matrix& x, std::size_t target_dim, bool exact) {
  if (x.rows() == 0 || x.cols() == 0) throw ConfigError("PCA input is empty");
  if (!all_finite(x)) throw NonFiniteError("PCA input contains NaN or Inf");
  if (target_dim == 0) throw ConfigError("PCA target dimension must be >= 1");
  const std::size_t cap = exact ? std::min(x.rows(), x.cols()) : x.cols();
  if (target_dim > cap) {
    throw ConfigError("PCA target dimension " + std::to_string(target_dim) + " exceeds " +
                      std::to_string(cap));
  }
}

// Takes the top-k eigenpairs (ascending from Eigen) into model fields.
void take_top(const Eigen::VectorXd& evals, const Eigen::MatrixXd& evecs, std::size_t k,
              PcaModel& m) {
  const auto p = static_cast<std::size_t>(evecs.rows());
  const auto total = static_cast<std::size_t>(evals.size());
  m.basis = Matrix(p, k);
  m.explained_variance.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto src = static_cast<Eigen::Index>(total - 1 - j);
    m.explained_variance[j] = evals(src);
    for (std::size_t r = 0; r < p; ++r) m.basis(r, j) = evecs(static_cast<Eigen::Index>(r), src);
  }
}

double trace_variance(const Matrix& x, const Matrix& mean) {
  std::vector<double> terms;
  terms.reserve(x.size());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c) - mean(0, c);
      terms.push_back(v * v);
    }
  return x.rows() > 1 ? kernels::pairwise_sum(terms) / static_cast<double>(x.rows() - 1) : 0.0;
}

}  // namespace

std::vector<double> PcaModel::explained_variance_ratio() const {
  std::vector<double> r(explained_variance.size(), 0.0);
  if (total_variance > 0.0) {
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = explained_variance[i] / total_variance;
  }
  return r;
}

Matrix PcaModel::transform(const Matrix& x) const {
  if (x.cols() != input_dim) throw ShapeError("PCA transform: input width mismatch");
  Matrix centered = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) centered(r, c) -= mean(0, c);
  Matrix out;
  kernels::gemm(centered, kernels::Trans::no, basis, kernels::Trans::no, out);
  for (std::size_t j = 0; j < components(); ++j) {
    if (!degenerate[j]) continue;
    for (std::size_t r = 0; r < out.rows(); ++r) out(r, j) = 0.0;
  }
  return out;
}

PcaModel fit_pca(const Matrix& x, std::size_t target_dim, PcaMethod method,
                 const IncrementalPcaOptions& incremental) {
  if (method == PcaMethod::incremental) return fit_pca_incremental(x, target_dim, incremental);
  check_input(x, target_dim, true);
  PcaModel m;
  m.input_dim = x.cols();
  m.mean = column_means(x);
  m.total_variance = trace_variance(x, m.mean);

  Matrix centered = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) centered(r, c) -= m.mean(0, c);
  Matrix cov;
  kernels::gemm(centered, kernels::Trans::yes, centered, kernels::Trans::no, cov);
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  for (double& v : cov.data()) v /= denom;

  Eigen::Map<const EMatrix> cmap(cov.data().data(), static_cast<Eigen::Index>(cov.rows()),
                                 static_cast<Eigen::Index>(cov.cols()));
  const Eigen::MatrixXd dense = cmap;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
  take_top(eig.eigenvalues(), eig.eigenvectors(), target_dim, m);
  fix_signs(m.basis);
  mark_degenerate(m);
  return m;
}

PcaModel fit_pca_incremental(const Matrix& x, std::size_t target_dim, const IncrementalPcaOptions& opts) {
  check_input(x, target_dim, false);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const std::size_t r = std::min(p, target_dim + opts.oversample);
  const std::size_t batch =
      opts.batch_rows != 0 ? opts.batch_rows : std::max<std::size_t>(1, (std::size_t{1} << 20) / p);

  PcaModel m;
  m.input_dim = p;
  m.mean = column_means(x);
  m.total_variance = trace_variance(x, m.mean);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd q(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) q(i, j) = normal(rng);
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));

  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target_dim));
  Eigen::VectorXd ritz_vals;
  Eigen::MatrixXd ritz_vecs;
  for (std::size_t pass = 0; pass < std::max<std::size_t>(1, opts.max_passes); ++pass) {
    // y = C·q accumulated batch by batch: Σ Xbᵀ (Xb q).
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t rows = std::min(batch, n - start);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < p; ++c)
          xb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = x(start + i, c) - m.mean(0, c);
      y.noalias() += xb.transpose() * (xb * q);
    }
    y /= denom;
    Eigen::MatrixXd b = q.transpose() * y;
    b = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
    if (eig.info() != Eigen::Success) throw NumericalError("incremental PCA: Ritz step failed");
    ritz_vals = eig.eigenvalues();
    ritz_vecs = q * eig.eigenvectors();
    Eigen::VectorXd top = ritz_vals.tail(static_cast<Eigen::Index>(target_dim)).reverse();
    const double scale = std::max(std::abs(top(0)), 1e-300);
    const bool converged = pass > 0 && (top - prev).cwiseAbs().maxCoeff() <= opts.tolerance * scale;
    prev = top;
    if (converged) break;
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() *
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
  }
  take_top(ritz_vals, ritz_vecs, target_dim, m);
  // Ritz vectors are orthonormal up to rounding; re-orthonormalize so the
  // basis contract holds exactly as for the exact solver.
  for (std::size_t j = 0; j < target_dim; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < p; ++i) norm += m.basis(i, j) * m.basis(i, j);
    norm = std::sqrt(norm);
    if (norm > 0)
      for (std::size_t i = 0; i < p; ++i) m.basis(i, j) /= norm;
  }
  fix_signs(m.basis);
  mark_degenerate(m);
  return m;
}

ColumnScaling fit_column_scaling(const Matrix& x, double zero_tol) {
  ColumnScaling s;
  s.mean = column_means(x);
  s.sd = Matrix(1, x.cols());
  s.constant.assign(x.cols(), false);
  std::vector<double> sq(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double v = x(r, c) - s.mean(0, c);
      sq[r] = v * v;
    }
    const double sd = std::sqrt(kernels::pairwise_sum(sq) / static_cast<double>(x.rows()));
    s.sd(0, c) = sd;
    s.constant[c] = sd <= zero_tol * std::max(1.0, std::abs(s.mean(0, c)));
  }
  return s;
}

Matrix apply_column_scaling(const Matrix& x, const ColumnScaling& s) {
  if (x.cols() != s.mean.cols()) throw ShapeError("column scaling: width mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out(r, c) = s.constant[c] ? 0.0 : (x(r, c) - s.mean(0, c)) / s.sd(0, c);
  return out;
}

AlignedFeatures align(const Matrix& x, const AlignSpec& spec) {
  if (x.rows() == 0) throw ConfigError("align: at least one node is required");
  if (x.cols() == 0) throw ConfigError("align: features have zero width");
  if (spec.unified_dim == 0) throw ConfigError("align: unified_dim must be >= 1");
  if (!all_finite(x)) throw NonFiniteError("align: features contain NaN or Inf");
  const bool learnable = spec.mode == AlignMode::learnable_projection;
  if (learnable && (spec.intermediate_dim == 0 || spec.intermediate_dim > spec.unified_dim)) {
    throw ConfigError("align: intermediate_dim must lie in [1, unified_dim]");
  }
  const std::size_t width = learnable ? spec.intermediate_dim : spec.unified_dim;
  const std::size_t k = std::min({width, x.cols(), x.rows()});
  const bool big = x.rows() * x.cols() > spec.incremental_threshold;

  AlignedFeatures out;
  out.mode = spec.mode;
  out.pca = fit_pca(x, k, big ? PcaMethod::incremental : PcaMethod::exact);
  const Matrix scores = out.pca.transform(x);

  Matrix padded(x.rows(), width, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) padded(r, c) = scores(r, c);

  out.degenerate_columns.assign(width, true);
  for (std::size_t c = 0; c < k; ++c) out.degenerate_columns[c] = out.pca.degenerate[c];

  if (learnable) {
    out.values = std::move(padded);
    return out;
  }
  out.scaling = fit_column_scaling(padded);
  out.values = apply_column_scaling(padded, out.scaling);
  for (std::size_t c = 0; c < width; ++c) {
    if (out.scaling.constant[c]) out.degenerate_columns[c] = true;
  }
  return out;
}

}  // namespace gilt
