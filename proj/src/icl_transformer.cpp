// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/icl_transformer.hpp"

#include <cmath>
#include <vector>

#include "gilt/errors.hpp"

namespace gilt {

Matrix DropoutSource::mask(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols, 1.0);
  if (p_ <= 0.0) return m;
  std::bernoulli_distribution drop(p_);
  const double keep = 1.0 / (1.0 - p_);
  for (double& v : m.data()) v = drop(rng_) ? 0.0 : keep;
  return m;
}

namespace {

ad::Var maybe_dropout(ad::Var x, DropoutSource* dropout) {
  if (dropout == nullptr || dropout->rate() <= 0.0) return x;
  return ad::apply_mask(x, dropout->mask(x.rows(), x.cols()));
}

ad::Var layer_norm(ad::Var x, const BoundParams& params, const std::string& prefix) {
  ad::Var y = ad::layer_norm_rows(x, params.config().ln_eps);
  return ad::add_row(ad::mul_row(y, params[prefix + ".gamma"]), params[prefix + ".beta"]);
}

ad::Var ffn(ad::Var x, const BoundParams& params, const std::string& prefix, DropoutSource* dropout) {
  ad::Var h = ad::gelu(ad::add_row(ad::matmul(x, params[prefix + ".w1"]), params[prefix + ".b1"]));
  h = maybe_dropout(h, dropout);
  return ad::add_row(ad::matmul(h, params[prefix + ".w2"]), params[prefix + ".b2"]);
}

}  // namespace

ad::Var attention(ad::Var queries, ad::Var keys_values, const BoundParams& params, const std::string& prefix,
                  DropoutSource* dropout) {
  const ModelConfig& cfg = params.config();
  const std::size_t m = cfg.token_dim();
  if (queries.cols() != m || keys_values.cols() != m) {
    throw ShapeError("attention input width != 2d = " + std::to_string(m));
  }
  const auto heads = static_cast<std::size_t>(cfg.heads);
  const std::size_t dh = m / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  ad::Var q = ad::matmul(queries, params[prefix + ".q"]);
  ad::Var k = ad::matmul(keys_values, params[prefix + ".k"]);
  ad::Var v = ad::matmul(keys_values, params[prefix + ".v"]);
  std::vector<ad::Var> outs;
  outs.reserve(heads);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    ad::Var qh = ad::slice_cols(q, hd * dh, dh);
    ad::Var kh = ad::slice_cols(k, hd * dh, dh);
    ad::Var vh = ad::slice_cols(v, hd * dh, dh);
    ad::Var w = ad::softmax_rows(ad::scale(ad::matmul(qh, kh, false, true), scale));
    w = maybe_dropout(w, dropout);
    outs.push_back(ad::matmul(w, vh));
  }
  ad::Var joined = heads == 1 ? outs[0] : ad::concat_cols(outs);
  return ad::matmul(joined, params[prefix + ".o"]);
}

Contextual icl_layer(ad::Var support, ad::Var query, const BoundParams& params, int layer,
                     DropoutSource* dropout) {
  const std::string p = "icl." + std::to_string(layer) + ".";
  const std::string stage2 = params.config().unshared_attention ? p + "attn2" : p + "attn";

  ad::Var s_norm = layer_norm(support, params, p + "ln_attn");
  ad::Var s = ad::add(support, attention(s_norm, s_norm, params, p + "attn", dropout));
  ad::Var kv = layer_norm(s, params, p + "ln_attn");
  ad::Var q_norm = layer_norm(query, params, p + "ln_attn");
  ad::Var q = ad::add(query, attention(q_norm, kv, params, stage2, dropout));

  s = ad::add(s, ffn(layer_norm(s, params, p + "ln_ffn"), params, p + "ffn", dropout));
  q = ad::add(q, ffn(layer_norm(q, params, p + "ln_ffn"), params, p + "ffn", dropout));
  return {s, q};
}

Contextual icl_forward(ad::Var support, ad::Var query, const BoundParams& params, int layers,
                       DropoutSource* dropout) {
  if (layers < 0 || layers > params.config().icl_layers) {
    throw ConfigError("transformer layer count " + std::to_string(layers) + " outside [0, " +
                      std::to_string(params.config().icl_layers) + "]");
  }
  if (support.rows() == 0) throw ShapeError("transformer needs at least one support token");
  Contextual c{support, query};
  for (int l = 0; l < layers; ++l) c = icl_layer(c.support, c.query, params, l, dropout);
  return c;
}

}  // namespace gilt
