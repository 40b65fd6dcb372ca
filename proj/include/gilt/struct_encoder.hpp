// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>

#include "gilt/autodiff.hpp"
#include "gilt/graph.hpp"
#include "gilt/model.hpp"

namespace gilt {

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I. Isolated nodes
// keep a unit self-loop.
SparseMatrix normalize_adjacency(const Graph& g);
SparseMatrix normalize_adjacency(std::size_t node_count, std::span<const Edge> edges);

// Runs `layers` rounds of H ← LayerNorm(Ã·H) (or LayerNorm(ReLU(Ã·H·W)) for
// the nonlinear variant) starting from x. The layer count may be smaller than
// the configured one to evaluate a truncated encoder; 0 returns x itself.
ad::Var encode(ad::Var x, const std::shared_ptr<const SparseMatrix>& adjacency,
               const BoundParams& params, int layers);

// Tape-free convenience for inference and tests.
Matrix encode(const Matrix& x, const SparseMatrix& adjacency, const ModelParams& params,
              int layers);

}  // namespace gilt
