// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gilt/autodiff.hpp"
#include "gilt/feature_align.hpp"
#include "gilt/matrix.hpp"

namespace gilt {

enum class EncoderVariant { linear, nonlinear };

// Architecture. Everything that changes the set or shape of learnable arrays
// lives here and is stored in checkpoints.
struct ModelConfig {
  std::size_t dim = 32;  // unified feature width d; tokens are 2d wide
  int encoder_layers = 4;
  int icl_layers = 2;
  int heads = 4;
  std::size_t ffn_hidden = 128;
  double dropout = 0.1;  // attention weights and FFN hidden units
  double temperature = 10.0;
  double ln_eps = 1e-5;
  AlignMode align_mode = AlignMode::pad;
  std::size_t intermediate_dim = 16;
  bool unshared_attention = false;
  EncoderVariant encoder_variant = EncoderVariant::linear;
  // Multiplier on the initial range of the attention output and second FFN
  // projections. 1 is plain fan-in init.
  double residual_init_gain = 1.0;

  std::size_t token_dim() const noexcept { return 2 * dim; }
  // Throws ConfigError when inconsistent.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// All learnable arrays, keyed by dotted name:
//   align.projection                       learnable-projection mode only
//   encoder.<l>.ln.gamma / .ln.beta         1 × d
//   encoder.<l>.weight                      d × d, nonlinear encoder only
//   icl.<l>.attn.{q,k,v,o}                  m × m, no bias
//   icl.<l>.attn2.{q,k,v,o}                 unshared-attention variant only
//   icl.<l>.ffn.{w1,b1,w2,b2}
//   icl.<l>.ln_attn.{gamma,beta}, icl.<l>.ln_ffn.{gamma,beta}
struct ModelParams {
  ModelConfig config;
  std::map<std::string, Matrix> arrays;

  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  std::size_t scalar_count() const;
  bool operator==(const ModelParams&) const = default;
};

// Fan-in uniform weights U(±1/√fan_in), zero biases, LayerNorm (1, 0),
// identity-initialized encoder weight and alignment projection.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Parameter names owned by one transformer layer.
std::vector<std::string> icl_layer_names(const ModelConfig& config, int layer);

// FNV-1a over names, shapes and bit patterns. Any change to any value
// changes the fingerprint.
std::uint64_t fingerprint(const ModelParams& params);

// Parameters bound as leaves on one tape.
class BoundParams {
 public:
  BoundParams(ad::Tape& tape, const ModelParams& params, bool trainable = true);
  // Binds caller-made leaves; names[i] labels leaves[i].
  BoundParams(const ModelConfig& config, std::span<const std::string> names, std::span<const ad::Var> leaves);

  const ModelConfig& config() const noexcept { return *config_; }
  ad::Var operator[](const std::string& name) const;
  // Gradient of every array after tape.backward(), in name order.
  std::map<std::string, Matrix> gradients() const;

 private:
  const ModelConfig* config_;
  std::map<std::string, ad::Var> vars_;
};

}  // namespace gilt
