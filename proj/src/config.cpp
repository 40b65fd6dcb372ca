// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "gilt/errors.hpp"
#include "json.hpp"

namespace gilt {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double as_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') bad(key, v, "a real number");
  return x;
}

long long as_int(const std::string& key, const std::string& v) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "an integer");
  return x;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "true or false");
}

std::string real_text(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Field {
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define GILT_REAL(expr)                                                                          \
  Field {                                                                                        \
    [](TrainConfig& c, const std::string& k, const std::string& v) { c.expr = as_real(k, v); }, \
        [](const TrainConfig& c) { return real_text(c.expr); }                                  \
  }
#define GILT_INT(expr, type)                                                                                 \
  Field {                                                                                                    \
    [](TrainConfig& c, const std::string& k, const std::string& v) { c.expr = static_cast<type>(as_int(k, v)); }, \
        [](const TrainConfig& c) { return std::to_string(c.expr); }                                         \
  }
#define GILT_BOOL(expr)                                                                          \
  Field {                                                                                        \
    [](TrainConfig& c, const std::string& k, const std::string& v) { c.expr = as_bool(k, v); }, \
        [](const TrainConfig& c) { return std::string(c.expr ? "true" : "false"); }             \
  }

std::string levels_text(const std::vector<TaskLevel>& levels) {
  std::string s;
  for (TaskLevel l : levels) s += (s.empty() ? "" : ",") + std::string(to_string(l));
  return s;
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"corpus", {[](TrainConfig& c, const std::string&, const std::string& v) { c.corpus = v; },
                  [](const TrainConfig& c) { return c.corpus; }}},
      {"levels",
       {[](TrainConfig& c, const std::string&, const std::string& v) {
          c.levels.clear();
          std::stringstream ss(v);
          std::string tok;
          while (std::getline(ss, tok, ',')) {
            if (!trim(tok).empty()) c.levels.push_back(parse_task_level(trim(tok)));
          }
        },
        [](const TrainConfig& c) { return levels_text(c.levels); }}},
      {"seed", GILT_INT(seed, std::uint64_t)},
      {"epochs", GILT_INT(epochs, int)},
      {"episodes_per_epoch", GILT_INT(episodes_per_epoch, int)},
      {"batch_items.node", GILT_INT(batch_items[0], int)},
      {"batch_items.link", GILT_INT(batch_items[1], int)},
      {"batch_items.graph", GILT_INT(batch_items[2], int)},
      {"loss_weight.node", GILT_REAL(loss_weights[0])},
      {"loss_weight.link", GILT_REAL(loss_weights[1])},
      {"loss_weight.graph", GILT_REAL(loss_weights[2])},
      {"optimizer",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "adamw") c.optimizer.kind = OptimizerKind::adamw;
          else if (v == "adam") c.optimizer.kind = OptimizerKind::adam;
          else bad(k, v, "adamw or adam");
        },
        [](const TrainConfig& c) { return std::string(c.optimizer.kind == OptimizerKind::adamw ? "adamw" : "adam"); }}},
      {"lr", GILT_REAL(optimizer.lr)},
      {"weight_decay", GILT_REAL(optimizer.weight_decay)},
      {"beta1", GILT_REAL(optimizer.beta1)},
      {"beta2", GILT_REAL(optimizer.beta2)},
      {"adam_eps", GILT_REAL(optimizer.eps)},
      {"lr_schedule",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "linear-decay") c.lr_schedule = LrSchedule::linear_decay;
          else if (v == "cosine") c.lr_schedule = LrSchedule::cosine;
          else if (v == "warmup") c.lr_schedule = LrSchedule::warmup;
          else bad(k, v, "linear-decay, cosine or warmup");
        },
        [](const TrainConfig& c) {
          switch (c.lr_schedule) {
            case LrSchedule::linear_decay: return std::string("linear-decay");
            case LrSchedule::cosine: return std::string("cosine");
            case LrSchedule::warmup: return std::string("warmup");
          }
          return std::string();
        }}},
      {"warmup_fraction", GILT_REAL(warmup_fraction)},
      {"grad_clip", GILT_REAL(grad_clip)},
      {"shots.start", GILT_INT(shots_start, int)},
      {"shots.end", GILT_INT(shots_end, int)},
      {"n_way.min", GILT_INT(n_way_min, int)},
      {"n_way.max", GILT_INT(n_way_max, int)},
      {"query_size", GILT_INT(query_size, int)},
      {"neg_ratio", GILT_INT(neg_ratio, int)},
      {"feat_drop", GILT_REAL(feat_drop)},
      {"edge_drop", GILT_REAL(edge_drop)},
      {"preflight_grad_check", GILT_BOOL(preflight_grad_check)},
      {"checkpoint_every", GILT_INT(checkpoint_every, int)},
      {"model.dim", GILT_INT(model.dim, std::size_t)},
      {"model.encoder_layers", GILT_INT(model.encoder_layers, int)},
      {"model.icl_layers", GILT_INT(model.icl_layers, int)},
      {"model.heads", GILT_INT(model.heads, int)},
      {"model.ffn_hidden", GILT_INT(model.ffn_hidden, std::size_t)},
      {"model.dropout", GILT_REAL(model.dropout)},
      {"model.temperature", GILT_REAL(model.temperature)},
      {"model.ln_eps", GILT_REAL(model.ln_eps)},
      {"model.align_mode",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "pad") c.model.align_mode = AlignMode::pad;
          else if (v == "learnable-projection") c.model.align_mode = AlignMode::learnable_projection;
          else bad(k, v, "pad or learnable-projection");
        },
        [](const TrainConfig& c) {
          return std::string(c.model.align_mode == AlignMode::pad ? "pad" : "learnable-projection");
        }}},
      {"model.intermediate_dim", GILT_INT(model.intermediate_dim, std::size_t)},
      {"model.unshared_attention", GILT_BOOL(model.unshared_attention)},
      {"model.encoder_variant",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "linear") c.model.encoder_variant = EncoderVariant::linear;
          else if (v == "nonlinear") c.model.encoder_variant = EncoderVariant::nonlinear;
          else bad(k, v, "linear or nonlinear");
        },
        [](const TrainConfig& c) {
          return std::string(c.model.encoder_variant == EncoderVariant::linear ? "linear" : "nonlinear");
        }}},
      {"model.residual_init_gain", GILT_REAL(model.residual_init_gain)},
  };
  return table;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    kv.emplace_back(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

TrainConfig apply_key_values(const KeyValues& kv, TrainConfig base) {
  bool versioned = false;
  for (const auto& [k, v] : kv) {
    if (k == "schema_version") {
      if (as_int(k, v) != kConfigSchemaVersion) {
        throw ConfigError("config key 'schema_version': unsupported version " + v);
      }
      versioned = true;
      continue;
    }
    apply_setting(base, k, v);
  }
  if (!versioned) throw ConfigError("config key 'schema_version' is missing");
  return base;
}

std::string to_key_value_text(const TrainConfig& cfg) {
  std::string out = "schema_version = " + std::to_string(kConfigSchemaVersion) + "\n";
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

std::string to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  for (const auto& [name, field] : fields()) j[name] = field.get(cfg);
  return j.dump(2);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, _] : fields()) keys.push_back(name);
  return keys;
}

}  // namespace gilt
