// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gilt/episode.hpp"
#include "gilt/model.hpp"
#include "gilt/pipeline.hpp"

namespace gilt {

// ---- metrics ---------------------------------------------------------------

// Fraction of exact matches. Throws ConfigError on empty or unequal input.
double accuracy(std::span<const int> preds, std::span<const int> labels);

// Probability that a random positive outscores a random negative, ties
// counted one half. Throws ConfigError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> binary_labels);

// Fraction of positives scoring strictly above the k-th largest negative.
// Throws ConfigError when there are fewer than k negatives.
double hits_at_k(std::span<const double> pos_scores, std::span<const double> neg_scores, std::size_t k);

// ---- evaluation --------------------------------------------------------------

enum class Metric { accuracy, roc_auc, hits_at_k };
Metric parse_metric(std::string_view s);
std::string metric_name(Metric m, std::size_t hits_k);

// Inference-time variants. unshared_attention and nonlinear_gcn describe the
// architecture and must match the checkpoint; the rest rewire a trained model.
struct Ablations {
  bool no_transformer = false;
  bool no_encoder = false;
  bool two_layer_encoder = false;
  bool full_token = false;
  bool unshared_attention = false;
  bool nonlinear_gcn = false;

  bool operator==(const Ablations&) const = default;
};

// Accepts no-transformer, no-encoder, two-layer-encoder, full-token,
// unshared-attention and nonlinear-gcn.
void add_ablation(Ablations& a, std::string_view name);
std::vector<std::string> ablation_names(const Ablations& a);

// Resolves ablations against an architecture; throws ConfigError when an
// architecture flag does not match the checkpoint.
ForwardOptions ablation_options(const ModelConfig& config, const Ablations& a);

struct EvalProtocol {
  TaskLevel level = TaskLevel::node;
  int n_way = 2;
  int k_shot = 5;
  Metric metric = Metric::accuracy;
  std::size_t hits_k = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<int> sweep_k;  // empty: evaluate k_shot only
  std::size_t query_cap = 2048;  // link and graph queries; node tasks use the full test split
  int neg_ratio = 3;
  Ablations ablations;
};

struct RunValue {
  std::uint64_t seed = 0;
  int k_shot = 0;
  double value = 0.0;
};

struct ShotSummary {
  int k_shot = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample sd, only with ≥ 2 runs
};

struct EvalReport {
  std::string dataset;
  std::string checkpoint_id;
  EvalProtocol protocol;
  std::vector<RunValue> runs;
  std::vector<ShotSummary> summary;  // one row per evaluated K
};

// Runs the protocol: per seed and K, samples one evaluation episode (support
// from train, query from test), checks it for leakage, runs inference and
// scores it. SamplingError is reported as ProtocolError.
EvalReport evaluate(const ModelParams& params, const Dataset& dataset, const EvalProtocol& protocol,
                    const std::string& checkpoint_id = "");

// Samples the evaluation episode `evaluate` would use for one run.
Episode evaluation_episode(const Dataset& dataset, const EvalProtocol& protocol, int k_shot, std::uint64_t seed);

// Leakage check, inference and scoring of one episode. Aborts with
// ProtocolError on any leakage.
double score_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e,
                     const EvalProtocol& protocol);

std::string report_to_json(const EvalReport& r);
// Header plus one row per summary entry:
// dataset,level,n_way,k_shot,metric,mean,sd,runs,ablations,checkpoint
std::string report_to_csv(const EvalReport& r);
// K,mean,sd rows for shot sweeps.
std::string sweep_to_csv(const EvalReport& r);

}  // namespace gilt
