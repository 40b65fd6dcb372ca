// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "gilt/autodiff.hpp"
#include "gilt/episode.hpp"
#include "gilt/model.hpp"

namespace gilt {

// Source of inverted-dropout masks. A null source means inference mode.
class DropoutSource {
 public:
  DropoutSource(double p, std::uint64_t seed) : p_(p), rng_(seed) {}
  // Entries are 0 with probability p and 1/(1 − p) otherwise.
  Matrix mask(std::size_t rows, std::size_t cols);
  double rate() const noexcept { return p_; }

 private:
  double p_;
  Rng rng_;
};

struct Contextual {
  ad::Var support;
  ad::Var query;
};

// Multi-head attention of `queries` over `keys_values` with the projection
// set `<prefix>.{q,k,v,o}`. Scores are scaled by 1/√(m/heads).
ad::Var attention(ad::Var queries, ad::Var keys_values, const BoundParams& params,
                  const std::string& prefix, DropoutSource* dropout);

// One pre-LayerNorm layer:
//   S' = S + Attn(LN(S), LN(S))
//   Q' = Q + Attn(LN(Q), LN(S'))        same attention weights
//   X  = X + FFN(LN(X))                 same FFN, for both streams
// Queries only ever attend to support tokens.
Contextual icl_layer(ad::Var support, ad::Var query, const BoundParams& params, int layer,
                     DropoutSource* dropout);

// Applies `layers` layers (≤ the configured count); 0 passes tokens through.
Contextual icl_forward(ad::Var support, ad::Var query, const BoundParams& params, int layers,
                       DropoutSource* dropout);

}  // namespace gilt
