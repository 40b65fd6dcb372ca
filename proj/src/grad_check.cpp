// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gilt/errors.hpp"

namespace gilt::ad {
namespace {

double evaluate(const ScalarFn& f, std::span<const Matrix> params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Matrix& p : params) leaves.push_back(tape.constant(p));
  const Var out = f(tape, leaves);
  const Matrix& v = out.value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("grad_check: function must return 1x1");
  if (!std::isfinite(v(0, 0))) throw NumericalError("grad_check: non-finite function value");
  return v(0, 0);
}

}  // namespace

double value_and_grad(const ScalarFn& f, std::span<const Matrix> params, std::vector<Matrix>& grads) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Matrix& p : params) leaves.push_back(tape.parameter(p));
  const Var out = f(tape, leaves);
  const Matrix& v = out.value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("grad_check: function must return 1x1");
  if (!std::isfinite(v(0, 0))) throw NumericalError("grad_check: non-finite function value");
  tape.backward(out);
  grads.clear();
  for (const Var& leaf : leaves) grads.push_back(leaf.grad());
  return v(0, 0);
}

GradCheckReport check_gradients(const ScalarFn& f, std::vector<Matrix>& params,
                                std::span<const Matrix> analytic, const GradCheckOptions& opts) {
  if (analytic.size() != params.size()) throw ShapeError("grad_check: gradient count mismatch");
  GradCheckReport report;
  std::mt19937_64 rng(opts.seed);
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::size_t n = params[p].size();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opts.max_coords_per_param != 0 && n > opts.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_param);
    }
    for (std::size_t idx : coords) {
      double& theta = params[p].data()[idx];
      const double saved = theta;
      theta = saved + opts.step;
      const double up = evaluate(f, params);
      theta = saved - opts.step;
      const double down = evaluate(f, params);
      theta = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[p].data()[idx];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p;
        report.worst_index = idx;
      }
      ++report.coords_checked;
    }
  }
  report.passed = report.max_rel_error < opts.tolerance;
  return report;
}

GradCheckReport grad_check(const ScalarFn& f, std::vector<Matrix>& params, const GradCheckOptions& opts) {
  std::vector<Matrix> grads;
  value_and_grad(f, params, grads);
  return check_gradients(f, params, grads, opts);
}

}  // namespace gilt::ad
