// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gilt/matrix.hpp"

// Maps node features of any width into the shared d-wide space: PCA, zero
// padding and column standardization.
namespace gilt {

enum class PcaMethod { exact, incremental, automatic };

struct PcaModel {
  std::size_t input_dim = 0;
  Matrix mean;   // 1 × input_dim
  Matrix basis;  // input_dim × k, one unit component per column
  // Sample variance (divisor n − 1) along each component, non-increasing.
  std::vector<double> explained_variance;
  double total_variance = 0.0;
  // Components whose variance is negligible next to the leading one; their
  // projections are forced to exact zero.
  std::vector<bool> degenerate;
  bool all_constant = false;

  std::size_t components() const noexcept { return basis.cols(); }
  std::vector<double> explained_variance_ratio() const;
  // (X − mean)·basis with degenerate columns zeroed.
  Matrix transform(const Matrix& x) const;

  bool operator==(const PcaModel&) const = default;
};

struct IncrementalPcaOptions {
  std::size_t batch_rows = 0;  // 0 picks a batch of about 2^20 entries
  std::size_t oversample = 10;
  std::size_t max_passes = 200;
  double tolerance = 1e-12;    // relative change of the leading Ritz values
  std::uint64_t seed = 0;
};

// Leading target_dim principal directions of the column-centred X. Each
// component is signed so that its largest-magnitude entry is positive
// (first such entry on ties).
PcaModel fit_pca(const Matrix& x, std::size_t target_dim, PcaMethod method = PcaMethod::exact,
                 const IncrementalPcaOptions& incremental = {});

// Streaming variant: makes one pass for the mean and then runs subspace
// iteration on the covariance, touching X only in row batches.
PcaModel fit_pca_incremental(const Matrix& x, std::size_t target_dim,
                             const IncrementalPcaOptions& opts = {});

enum class AlignMode { pad, learnable_projection };

struct AlignSpec {
  std::size_t unified_dim = 32;
  std::size_t intermediate_dim = 16;  // learnable_projection only
  AlignMode mode = AlignMode::pad;
  std::size_t incremental_threshold = 10'000'000;  // rows × cols
};

// Column statistics used by standard scaling. Constant columns (sd within
// tolerance of zero) are marked and map to zero.
struct ColumnScaling {
  Matrix mean;  // 1 × d
  Matrix sd;    // 1 × d, population
  std::vector<bool> constant;

  bool operator==(const ColumnScaling&) const = default;
};

struct AlignedFeatures {
  AlignMode mode = AlignMode::pad;
  // pad: n × unified_dim, standardized.
  // learnable_projection: n × intermediate_dim PCA scores; the model applies
  // its projection and then standardizes.
  Matrix values;
  PcaModel pca;
  ColumnScaling scaling;  // empty in learnable_projection mode
  // Output columns that carry no signal: padding or degenerate components.
  std::vector<bool> degenerate_columns;
};

// Throws ConfigError on inconsistent dims and NonFiniteError on bad input.
AlignedFeatures align(const Matrix& x, const AlignSpec& spec);

ColumnScaling fit_column_scaling(const Matrix& x, double zero_tol = 1e-12);
Matrix apply_column_scaling(const Matrix& x, const ColumnScaling& s);

}  // namespace gilt
