// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/struct_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "gilt/errors.hpp"

namespace gilt {

SparseMatrix normalize_adjacency(const Graph& g) { return normalize_adjacency(g.node_count, g.edges); }

SparseMatrix normalize_adjacency(std::size_t node_count, std::span<const Edge> edges) {
  std::vector<std::vector<std::uint32_t>> nbrs(node_count);
  for (std::size_t i = 0; i < node_count; ++i) nbrs[i].push_back(static_cast<std::uint32_t>(i));
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) throw ConsistencyError("edge endpoint out of range");
    nbrs[e.u].push_back(e.v);
    nbrs[e.v].push_back(e.u);
  }
  std::vector<double> inv_sqrt(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(nbrs[i].size()));
  }
  SparseMatrix s;
  s.rows = s.cols = node_count;
  s.row_ptr.assign(node_count + 1, 0);
  for (std::size_t i = 0; i < node_count; ++i) {
    for (std::uint32_t j : nbrs[i]) {
      s.col_idx.push_back(j);
      s.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    s.row_ptr[i + 1] = s.col_idx.size();
  }
  return s;
}

ad::Var encode(ad::Var x, const std::shared_ptr<const SparseMatrix>& adjacency,
               const BoundParams& params, int layers) {
  const ModelConfig& cfg = params.config();
  if (x.cols() != cfg.dim) {
    throw ShapeError("encoder input width " + std::to_string(x.cols()) + " != d " +
                     std::to_string(cfg.dim));
  }
  if (adjacency->rows != x.rows()) throw ShapeError("adjacency size != node count");
  if (layers < 0 || layers > cfg.encoder_layers) {
    throw ConfigError("encoder layer count " + std::to_string(layers) + " outside [0, " +
                      std::to_string(cfg.encoder_layers) + "]");
  }
  ad::Var h = x;
  for (int l = 0; l < layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    h = ad::spmm(adjacency, h);
    if (cfg.encoder_variant == EncoderVariant::nonlinear) h = ad::relu(ad::matmul(h, params[p + "weight"]));
    h = ad::layer_norm_rows(h, cfg.ln_eps);
    h = ad::add_row(ad::mul_row(h, params[p + "ln.gamma"]), params[p + "ln.beta"]);
  }
  return h;
}

Matrix encode(const Matrix& x, const SparseMatrix& adjacency, const ModelParams& params, int layers) {
  ad::Tape tape;
  BoundParams bound(tape, params, false);
  auto adj = std::make_shared<const SparseMatrix>(adjacency);
  return encode(tape.constant(x), adj, bound, layers).value();
}

}  // namespace gilt
