// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>

#include "gilt/errors.hpp"
#include "json.hpp"

namespace gilt {

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  if (preds.empty()) throw ConfigError("accuracy of an empty prediction set");
  if (preds.size() != labels.size()) throw ConfigError("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> binary_labels) {
  if (scores.size() != binary_labels.size()) throw ConfigError("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann–Whitney U from mid-ranks: ties share the average rank.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (binary_labels[order[t]] != 0) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ConfigError("roc_auc needs both positive and negative labels");
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double hits_at_k(std::span<const double> pos_scores, std::span<const double> neg_scores, std::size_t k) {
  if (k == 0) throw ConfigError("hits@K needs K >= 1");
  if (neg_scores.size() < k) {
    throw ConfigError("hits@" + std::to_string(k) + " needs at least " + std::to_string(k) + " negatives, got " +
                      std::to_string(neg_scores.size()));
  }
  if (pos_scores.empty()) throw ConfigError("hits@K of an empty positive set");
  std::vector<double> neg(neg_scores.begin(), neg_scores.end());
  std::nth_element(neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(k - 1), neg.end(), std::greater<>());
  const double threshold = neg[k - 1];
  std::size_t hits = 0;
  for (double s : pos_scores) hits += s > threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pos_scores.size());
}

Metric parse_metric(std::string_view s) {
  if (s == "accuracy") return Metric::accuracy;
  if (s == "roc-auc" || s == "roc_auc" || s == "auc") return Metric::roc_auc;
  if (s.rfind("hits", 0) == 0) return Metric::hits_at_k;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

std::string metric_name(Metric m, std::size_t hits_k) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::roc_auc: return "roc-auc";
    case Metric::hits_at_k: return "hits@" + std::to_string(hits_k);
  }
  return "?";
}

void add_ablation(Ablations& a, std::string_view name) {
  if (name == "no-transformer") a.no_transformer = true;
  else if (name == "no-encoder") a.no_encoder = true;
  else if (name == "two-layer-encoder") a.two_layer_encoder = true;
  else if (name == "full-token") a.full_token = true;
  else if (name == "unshared-attention") a.unshared_attention = true;
  else if (name == "nonlinear-gcn") a.nonlinear_gcn = true;
  else throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

std::vector<std::string> ablation_names(const Ablations& a) {
  std::vector<std::string> out;
  if (a.no_transformer) out.emplace_back("no-transformer");
  if (a.no_encoder) out.emplace_back("no-encoder");
  if (a.two_layer_encoder) out.emplace_back("two-layer-encoder");
  if (a.full_token) out.emplace_back("full-token");
  if (a.unshared_attention) out.emplace_back("unshared-attention");
  if (a.nonlinear_gcn) out.emplace_back("nonlinear-gcn");
  return out;
}

ForwardOptions ablation_options(const ModelConfig& config, const Ablations& a) {
  if (a.unshared_attention && !config.unshared_attention) {
    throw ConfigError("ablation unshared-attention needs a checkpoint trained with model.unshared_attention = true");
  }
  if (a.nonlinear_gcn && config.encoder_variant != EncoderVariant::nonlinear) {
    throw ConfigError("ablation nonlinear-gcn needs a checkpoint trained with model.encoder_variant = nonlinear");
  }
  if (a.no_encoder && a.two_layer_encoder) throw ConfigError("no-encoder and two-layer-encoder are exclusive");
  ForwardOptions o;
  if (a.no_transformer) o.icl_layers = 0;
  if (a.no_encoder) o.encoder_layers = 0;
  if (a.two_layer_encoder) o.encoder_layers = std::min(2, config.encoder_layers);
  if (a.full_token) o.space = PredictionSpace::full_token;
  return o;
}

Episode evaluation_episode(const Dataset& dataset, const EvalProtocol& p, int k_shot, std::uint64_t seed) {
  Rng rng(seed);
  try {
    switch (p.level) {
      case TaskLevel::node:
        return sample_node_episode(dataset.graphs.at(0), p.n_way, k_shot, kAllQueries, SplitPolicy::evaluation, rng);
      case TaskLevel::link:
        return sample_link_episode(dataset.graphs.at(0), k_shot, p.query_cap, SplitPolicy::evaluation, rng,
                                   {p.neg_ratio, 200});
      case TaskLevel::graph:
        return sample_graph_episode(dataset, p.n_way, k_shot, p.query_cap, SplitPolicy::evaluation, rng);
    }
  } catch (const SamplingError& e) {
    throw ProtocolError("cannot build a " + std::to_string(p.n_way) + "-way " + std::to_string(k_shot) +
                        "-shot evaluation episode on '" + dataset.name + "': " + e.what());
  }
  throw ProtocolError("unknown task level");
}

double score_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e,
                     const EvalProtocol& p) {
  check_leakage(e, *data.dataset);
  const ForwardOptions opts = ablation_options(params.config, p.ablations);
  const EpisodeResult r = run_episode(params, data, e, opts);
  switch (p.metric) {
    case Metric::accuracy: return accuracy(r.predicted, e.query_labels);
    case Metric::roc_auc: {
      if (e.n_way != 2) throw ProtocolError("roc-auc needs binary episodes");
      std::vector<double> s(r.probs.rows());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = r.probs(i, 1);
      return roc_auc(s, e.query_labels);
    }
    case Metric::hits_at_k: {
      if (e.level != TaskLevel::link) throw ProtocolError("hits@K applies to link tasks");
      std::vector<double> pos;
      std::vector<double> neg;
      for (std::size_t i = 0; i < e.query.size(); ++i) (e.query_labels[i] == 1 ? pos : neg).push_back(r.probs(i, 1));
      try {
        return hits_at_k(pos, neg, p.hits_k);
      } catch (const ConfigError& ex) {
        throw ProtocolError(ex.what());
      }
    }
  }
  throw ProtocolError("unknown metric");
}

EvalReport evaluate(const ModelParams& params, const Dataset& dataset, const EvalProtocol& protocol,
                    const std::string& checkpoint_id) {
  if (!dataset.supports(protocol.level)) {
    throw ProtocolError("dataset '" + dataset.name + "' is not annotated for " +
                        std::string(to_string(protocol.level)) + " tasks");
  }
  if (protocol.seeds.empty()) throw ConfigError("evaluation needs at least one seed");
  ablation_options(params.config, protocol.ablations);
  const PreparedDataset data = prepare_dataset(dataset, align_spec(params.config));
  const std::vector<int> ks = protocol.sweep_k.empty() ? std::vector<int>{protocol.k_shot} : protocol.sweep_k;

  EvalReport report;
  report.dataset = dataset.name;
  report.checkpoint_id = checkpoint_id;
  report.protocol = protocol;
  for (int k : ks)
    for (std::uint64_t seed : protocol.seeds) report.runs.push_back({seed, k, 0.0});

  std::vector<std::exception_ptr> errors(report.runs.size());
  const auto n = static_cast<std::ptrdiff_t>(report.runs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    RunValue& run = report.runs[static_cast<std::size_t>(i)];
    try {
      const Episode e = evaluation_episode(dataset, protocol, run.k_shot, run.seed);
      run.value = score_episode(params, data, e, protocol);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int k : ks) {
    std::vector<double> vals;
    for (const RunValue& r : report.runs)
      if (r.k_shot == k) vals.push_back(r.value);
    ShotSummary s;
    s.k_shot = k;
    s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    if (vals.size() >= 2) {
      double sq = 0.0;
      for (double v : vals) sq += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(sq / static_cast<double>(vals.size() - 1));
    }
    report.summary.push_back(s);
  }
  return report;
}

std::string report_to_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  const EvalProtocol& p = r.protocol;
  ordered_json runs = ordered_json::array();
  for (const RunValue& v : r.runs) runs.push_back({{"seed", v.seed}, {"k_shot", v.k_shot}, {"value", v.value}});
  ordered_json summary = ordered_json::array();
  for (const ShotSummary& s : r.summary) {
    ordered_json row = {{"k_shot", s.k_shot}, {"mean", s.mean}};
    if (s.sd) row["sd"] = *s.sd;
    summary.push_back(row);
  }
  ordered_json j;
  j["dataset"] = r.dataset;
  j["checkpoint"] = r.checkpoint_id;
  j["protocol"] = {{"level", std::string(to_string(p.level))},
                   {"n_way", p.n_way},
                   {"k_shot", p.k_shot},
                   {"metric", metric_name(p.metric, p.hits_k)},
                   {"seeds", p.seeds},
                   {"sweep_k", p.sweep_k},
                   {"query_cap", p.query_cap},
                   {"ablations", ablation_names(p.ablations)}};
  j["runs"] = runs;
  j["summary"] = summary;
  return j.dump(2);
}

std::string report_to_csv(const EvalReport& r) {
  std::string ablations;
  for (const auto& a : ablation_names(r.protocol.ablations)) ablations += (ablations.empty() ? "" : "+") + a;
  std::string out = "dataset,level,n_way,k_shot,metric,mean,sd,runs,ablations,checkpoint\n";
  for (const ShotSummary& s : r.summary) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g", s.mean);
    std::string sd;
    if (s.sd) {
      char b2[64];
      std::snprintf(b2, sizeof b2, "%.17g", *s.sd);
      sd = b2;
    }
    out += r.dataset + "," + std::string(to_string(r.protocol.level)) + "," + std::to_string(r.protocol.n_way) + "," +
           std::to_string(s.k_shot) + "," + metric_name(r.protocol.metric, r.protocol.hits_k) + "," + buf + "," + sd +
           "," + std::to_string(r.protocol.seeds.size()) + "," + ablations + "," + r.checkpoint_id + "\n";
  }
  return out;
}

std::string sweep_to_csv(const EvalReport& r) {
  std::string out = "K,mean,sd\n";
  for (const ShotSummary& s : r.summary) {
    char buf[160];
    if (s.sd) std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", s.k_shot, s.mean, *s.sd);
    else std::snprintf(buf, sizeof buf, "%d,%.17g,\n", s.k_shot, s.mean);
    out += buf;
  }
  return out;
}

}  // namespace gilt
