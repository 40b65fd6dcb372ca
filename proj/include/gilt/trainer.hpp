// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gilt/episode.hpp"
#include "gilt/graph.hpp"
#include "gilt/model.hpp"

namespace gilt {

enum class OptimizerKind { adamw, adam };
enum class LrSchedule { linear_decay, cosine, warmup };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adamw;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 4e-4;
  bool operator==(const OptimizerConfig&) const = default;
};

struct AdamState {
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
  std::uint64_t t = 0;
  bool operator==(const AdamState&) const = default;
};

// One update at learning rate `lr` (the scheduled rate, which overrides
// cfg.lr). adamw: θ ← θ(1 − lr·wd) − lr·m̂/(√v̂ + eps). adam: wd·θ is added to
// the gradient instead.
void adam_step(ModelParams& params, const std::map<std::string, Matrix>& grads, AdamState& state,
               const OptimizerConfig& cfg, double lr);

// Scales grads in place so their global L2 norm is at most max_norm and
// returns the norm before clipping. max_norm ≤ 0 disables clipping.
double clip_global_norm(std::map<std::string, Matrix>& grads, double max_norm);

// Multiplier on the base rate at training progress in [0, 1].
double lr_factor(LrSchedule schedule, double progress, double warmup_fraction = 0.1);

struct TrainConfig {
  std::string corpus;  // registry path
  std::vector<TaskLevel> levels;  // empty: every level the corpus supports
  ModelConfig model;
  OptimizerConfig optimizer;
  LrSchedule lr_schedule = LrSchedule::linear_decay;
  double warmup_fraction = 0.1;
  double grad_clip = 1.0;
  int epochs = 50;
  int episodes_per_epoch = 200;  // per task level
  // Items (support + query) per episode-batch, per level; one optimizer step
  // consumes one batch of every level.
  std::array<int, 3> batch_items{8192, 16384, 1024};
  std::array<double, 3> loss_weights{0.53, 2.74, 0.42};
  int shots_start = 20;
  int shots_end = 5;
  int n_way_min = 2;
  int n_way_max = 0;  // 0: as many classes as the source offers
  int query_size = 64;
  int neg_ratio = 3;
  double feat_drop = 0.1;
  double edge_drop = 0.1;
  std::uint64_t seed = 0;
  bool preflight_grad_check = true;
  int checkpoint_every = 0;  // epochs; 0 writes only the final checkpoint

  ShotSchedule shot_schedule() const { return {shots_start, shots_end, epochs}; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

inline std::size_t level_index(TaskLevel l) { return static_cast<std::size_t>(l); }

// Named hyperparameter sets: "paper-table6" and "desk".
TrainConfig preset(const std::string& name);

struct EpochTelemetry {
  int epoch = 0;
  std::array<double, 3> level_loss{0.0, 0.0, 0.0};  // node, link, graph; 0 if untrained
  double total_loss = 0.0;
  double lr = 0.0;
  int shots = 0;
  bool operator==(const EpochTelemetry&) const = default;
};

std::string telemetry_csv_header();
std::string telemetry_csv_row(const EpochTelemetry& t);

// Everything needed to continue training bit-identically.
struct TrainState {
  ModelParams params;
  AdamState optimizer;
  int epoch = 0;  // completed epochs
  std::uint64_t step = 0;
  std::string rng_state;
  bool operator==(const TrainState&) const = default;
};

TrainState initial_state(const TrainConfig& cfg);

using EpochCallback = std::function<void(const TrainState&, const EpochTelemetry&)>;

struct TrainResult {
  TrainState state;
  std::vector<EpochTelemetry> telemetry;
};

// Episodic multi-task training from `start` (fresh or resumed) until
// cfg.epochs. Throws NumericalError on a non-finite loss; `on_diverge`, when
// set, receives the state from before the failing step.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg, TrainState start,
                  const EpochCallback& on_epoch = {},
                  const std::function<void(const TrainState&)>& on_diverge = {});

// Finite-difference check of the full episode loss on a tiny synthetic
// configuration (d = 8, two encoder layers, one transformer layer, 2-way
// 2-shot, three queries). Returns the worst relative error.
double preflight_gradient_check(std::uint64_t seed = 0);

}  // namespace gilt
