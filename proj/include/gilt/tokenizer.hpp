// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "gilt/autodiff.hpp"
#include "gilt/episode.hpp"

namespace gilt {

// Item representations from node embeddings h (n × d).
ad::Var node_reprs(ad::Var h, std::span<const ItemRef> items);
// h[u] ⊙ h[v] per pair.
ad::Var link_reprs(ad::Var h, std::span<const ItemRef> items);
// Mean of all rows: one 1 × d vector for a whole graph.
ad::Var pooled_repr(ad::Var h);

// N × |S| matrix whose row c averages the support rows of class c.
Matrix class_average_matrix(std::span<const int> labels, int n_way);
// |S| × N one-hot encoding of labels.
Matrix one_hot(std::span<const int> labels, int n_way);

struct TokenVars {
  ad::Var support;  // |S| × 2d rows [h ‖ p_y]
  ad::Var query;    // |Q| × 2d rows [h ‖ 0]
  ad::Var prototypes;  // N × d, unit norm or zero
  std::vector<bool> degenerate_prototypes;
};

// Prototypes are L2-normalized class means; a class mean with norm < 1e-12
// becomes the zero vector and is flagged. Throws SamplingError when a class
// has no support item.
TokenVars build_tokens(ad::Var support_reprs, ad::Var query_reprs, std::span<const int> support_labels,
                       int n_way);

struct TokenSet {
  int n_way = 0;
  std::size_t dim = 0;  // d; token rows are 2d wide
  Matrix support;
  Matrix query;
  std::vector<int> support_classes;
  std::vector<bool> degenerate_prototypes;

  bool operator==(const TokenSet&) const = default;
};

TokenSet build_tokens(const Matrix& support_reprs, const Matrix& query_reprs,
                      std::span<const int> support_labels, int n_way);

// Little-endian binary: u32 header {N, |S|/N, |Q|, d}, support rows then query
// rows as row-major f32, then one u32 class id per support row.
void write_token_set(const TokenSet& t, const std::filesystem::path& path);
TokenSet read_token_set(const std::filesystem::path& path);

}  // namespace gilt
