// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gilt/autodiff.hpp"

namespace gilt::ad {

// Builds a scalar (1×1) on the given tape from parameter leaves bound in the
// same order as the parameter list.
using ScalarFn = std::function<Var(Tape&, std::span<const Var> params)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |a − n| / max(|a|, |n|, abs_floor) so that coordinates
  // with near-zero gradient are judged on absolute error.
  double abs_floor = 1e-6;
  // 0 checks every coordinate; otherwise a seeded sample per parameter.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  bool passed = true;
};

// Evaluates f with fresh leaves for params and returns its value and the
// analytic gradient with respect to each parameter.
double value_and_grad(const ScalarFn& f, std::span<const Matrix> params, std::vector<Matrix>& grads);

// Compares supplied analytic gradients against central differences
// (f(θ+h) − f(θ−h)) / 2h. params is perturbed in place and restored.
GradCheckReport check_gradients(const ScalarFn& f, std::vector<Matrix>& params,
                                std::span<const Matrix> analytic, const GradCheckOptions& opts = {});

// value_and_grad followed by check_gradients.
GradCheckReport grad_check(const ScalarFn& f, std::vector<Matrix>& params,
                           const GradCheckOptions& opts = {});

}  // namespace gilt::ad
