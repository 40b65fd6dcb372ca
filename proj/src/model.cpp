// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/model.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "gilt/errors.hpp"

namespace gilt {

void ModelConfig::validate() const {
  if (dim == 0) throw ConfigError("model.dim must be >= 1");
  if (encoder_layers < 0) throw ConfigError("model.encoder_layers must be >= 0");
  if (icl_layers < 0) throw ConfigError("model.icl_layers must be >= 0");
  if (heads < 1) throw ConfigError("model.heads must be >= 1");
  if (token_dim() % static_cast<std::size_t>(heads) != 0) {
    throw ConfigError("token width 2*dim=" + std::to_string(token_dim()) +
                      " is not divisible by heads=" + std::to_string(heads));
  }
  if (ffn_hidden == 0) throw ConfigError("model.ffn_hidden must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout must lie in [0,1)");
  if (!(temperature > 0.0)) throw ConfigError("model.temperature must be > 0");
  if (!(ln_eps > 0.0)) throw ConfigError("model.ln_eps must be > 0");
  if (align_mode == AlignMode::learnable_projection &&
      (intermediate_dim == 0 || intermediate_dim > dim)) {
    throw ConfigError("model.intermediate_dim must lie in [1, dim]");
  }
  if (!(residual_init_gain >= 0.0)) throw ConfigError("model.residual_init_gain must be >= 0");
}

const Matrix& ModelParams::at(const std::string& name) const {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

Matrix& ModelParams::at(const std::string& name) {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, m] : arrays) n += m.size();
  return n;
}

std::vector<std::string> icl_layer_names(const ModelConfig& config, int layer) {
  const std::string p = "icl." + std::to_string(layer) + ".";
  std::vector<std::string> names;
  for (const char* w : {"q", "k", "v", "o"}) names.push_back(p + "attn." + w);
  if (config.unshared_attention) {
    for (const char* w : {"q", "k", "v", "o"}) names.push_back(p + "attn2." + w);
  }
  for (const char* w : {"w1", "b1", "w2", "b2"}) names.push_back(p + "ffn." + w);
  for (const char* ln : {"ln_attn", "ln_ffn"}) {
    names.push_back(p + ln + ".gamma");
    names.push_back(p + ln + ".beta");
  }
  return names;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams params;
  params.config = config;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::size_t rows, std::size_t cols, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = u(rng);
    return m;
  };
  auto fan_in = [](std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };

  const std::size_t d = config.dim;
  const std::size_t m = config.token_dim();
  auto& a = params.arrays;
  if (config.align_mode == AlignMode::learnable_projection) {
    Matrix proj(config.intermediate_dim, d, 0.0);
    for (std::size_t i = 0; i < config.intermediate_dim; ++i) proj(i, i) = 1.0;
    a["align.projection"] = std::move(proj);
  }
  for (int l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    a[p + "ln.gamma"] = Matrix(1, d, 1.0);
    a[p + "ln.beta"] = Matrix(1, d, 0.0);
    if (config.encoder_variant == EncoderVariant::nonlinear) a[p + "weight"] = Matrix::identity(d);
  }
  for (int l = 0; l < config.icl_layers; ++l) {
    const std::string p = "icl." + std::to_string(l) + ".";
    for (const char* set : {"attn.", "attn2."}) {
      if (std::string(set) == "attn2." && !config.unshared_attention) continue;
      a[p + set + "q"] = uniform(m, m, fan_in(m));
      a[p + set + "k"] = uniform(m, m, fan_in(m));
      a[p + set + "v"] = uniform(m, m, fan_in(m));
      a[p + set + "o"] = uniform(m, m, fan_in(m) * config.residual_init_gain);
    }
    a[p + "ffn.w1"] = uniform(m, config.ffn_hidden, fan_in(m));
    a[p + "ffn.b1"] = Matrix(1, config.ffn_hidden, 0.0);
    a[p + "ffn.w2"] = uniform(config.ffn_hidden, m, fan_in(config.ffn_hidden) * config.residual_init_gain);
    a[p + "ffn.b2"] = Matrix(1, m, 0.0);
    for (const char* ln : {"ln_attn", "ln_ffn"}) {
      a[p + ln + ".gamma"] = Matrix(1, m, 1.0);
      a[p + ln + ".beta"] = Matrix(1, m, 0.0);
    }
  }
  return params;
}

std::uint64_t fingerprint(const ModelParams& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, m] : params.arrays) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix(m.rows());
    mix(m.cols());
    for (double v : m.data()) mix(std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

BoundParams::BoundParams(ad::Tape& tape, const ModelParams& params, bool trainable)
    : config_(&params.config) {
  for (const auto& [name, m] : params.arrays) {
    vars_.emplace(name, trainable ? tape.parameter(m) : tape.constant(m));
  }
}

BoundParams::BoundParams(const ModelConfig& config, std::span<const std::string> names,
                         std::span<const ad::Var> leaves)
    : config_(&config) {
  if (names.size() != leaves.size()) throw ShapeError("parameter name/leaf count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i) vars_.emplace(names[i], leaves[i]);
}

ad::Var BoundParams::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

std::map<std::string, Matrix> BoundParams::gradients() const {
  std::map<std::string, Matrix> g;
  for (const auto& [name, v] : vars_) g.emplace(name, v.grad());
  return g;
}

}  // namespace gilt
