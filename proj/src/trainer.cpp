// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "gilt/errors.hpp"
#include "gilt/grad_check.hpp"
#include "gilt/pipeline.hpp"

namespace gilt {

// ---- optimizer ---------------------------------------------------------------

void adam_step(ModelParams& params, const std::map<std::string, Matrix>& grads, AdamState& state,
               const OptimizerConfig& cfg, double lr) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (auto& [name, theta] : params.arrays) {
    auto git = grads.find(name);
    if (git == grads.end()) throw ShapeError("no gradient for parameter '" + name + "'");
    const Matrix& g = git->second;
    if (g.rows() != theta.rows() || g.cols() != theta.cols()) {
      throw ShapeError("gradient shape mismatch for '" + name + "'");
    }
    Matrix& m = state.m.try_emplace(name, theta.rows(), theta.cols(), 0.0).first->second;
    Matrix& v = state.v.try_emplace(name, theta.rows(), theta.cols(), 0.0).first->second;
    auto th = theta.data();
    auto gd = g.data();
    auto md = m.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < th.size(); ++i) {
      double gi = gd[i];
      if (cfg.kind == OptimizerKind::adam) gi += cfg.weight_decay * th[i];
      md[i] = cfg.beta1 * md[i] + (1.0 - cfg.beta1) * gi;
      vd[i] = cfg.beta2 * vd[i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = md[i] / bc1;
      const double v_hat = vd[i] / bc2;
      if (cfg.kind == OptimizerKind::adamw) th[i] *= 1.0 - lr * cfg.weight_decay;
      th[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

double clip_global_norm(std::map<std::string, Matrix>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [_, g] : grads)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& [_, g] : grads)
      for (double& v : g.data()) v *= s;
  }
  return norm;
}

double lr_factor(LrSchedule schedule, double progress, double warmup_fraction) {
  progress = std::clamp(progress, 0.0, 1.0);
  switch (schedule) {
    case LrSchedule::linear_decay: return 1.0 - progress;
    case LrSchedule::cosine: return 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    case LrSchedule::warmup:
      if (warmup_fraction > 0.0 && progress < warmup_fraction) return progress / warmup_fraction;
      return 1.0;
  }
  return 1.0;
}

// ---- config --------------------------------------------------------------------

void TrainConfig::validate() const {
  model.validate();
  if (!(optimizer.lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0,1)");
  }
  if (!(optimizer.eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (episodes_per_epoch < 1) throw ConfigError("episodes_per_epoch must be >= 1");
  for (int b : batch_items)
    if (b < 1) throw ConfigError("batch_items must be >= 1");
  for (double w : loss_weights)
    if (!(w >= 0.0)) throw ConfigError("loss weights must be >= 0");
  if (shots_end < 1 || shots_start < shots_end) throw ConfigError("shots need start >= end >= 1");
  if (n_way_min < 2) throw ConfigError("n_way.min must be >= 2");
  if (n_way_max != 0 && n_way_max < n_way_min) throw ConfigError("n_way.max must be 0 or >= n_way.min");
  if (query_size < 1) throw ConfigError("query_size must be >= 1");
  if (neg_ratio < 1) throw ConfigError("neg_ratio must be >= 1");
  if (!(feat_drop >= 0.0 && feat_drop < 1.0 && edge_drop >= 0.0 && edge_drop < 1.0)) {
    throw ConfigError("feat_drop and edge_drop must lie in [0,1)");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) throw ConfigError("warmup_fraction must lie in [0,1]");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

TrainConfig preset(const std::string& name) {
  TrainConfig c;
  if (name == "paper-table6") {
    c.model.dim = 512;
    c.model.encoder_layers = 5;
    c.model.icl_layers = 5;
    c.model.heads = 4;
    c.model.ffn_hidden = 4096;
    c.model.dropout = 0.1;
    c.optimizer.lr = 2e-6;
    c.optimizer.weight_decay = 4e-4;
    c.epochs = 50;
    c.batch_items = {8192, 16384, 1024};
    return c;
  }
  if (name == "desk") {
    c.model.dim = 32;
    c.model.encoder_layers = 4;
    c.model.icl_layers = 2;
    c.model.heads = 4;
    c.model.ffn_hidden = 128;
    c.model.dropout = 0.1;
    c.model.residual_init_gain = 0.0;
    c.optimizer.lr = 1e-3;
    c.optimizer.weight_decay = 4e-4;
    c.epochs = 20;
    c.episodes_per_epoch = 40;
    c.batch_items = {256, 256, 256};
    c.query_size = 32;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected paper-table6 or desk)");
}

std::string telemetry_csv_header() { return "epoch,L_node,L_link,L_graph,L_total,lr,shots"; }

std::string telemetry_csv_row(const EpochTelemetry& t) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d", t.epoch, t.level_loss[0], t.level_loss[1],
                t.level_loss[2], t.total_loss, t.lr, t.shots);
  return buf;
}

namespace {

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw ParseError("corrupt rng state");
  return rng;
}

int train_classes_with(const std::vector<int>& labels, const std::vector<Split>& tags, int k) {
  std::map<int, int> counts;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (tags[i] == Split::train) ++counts[labels[i]];
  int n = 0;
  for (auto [_, c] : counts) n += c >= k ? 1 : 0;
  return n;
}

int eligible_classes(const Dataset& d, TaskLevel level, int k) {
  std::vector<int> labels;
  std::vector<Split> tags;
  if (level == TaskLevel::node) {
    const Graph& g = d.graphs[0];
    labels = *g.node_labels;
    for (std::size_t i = 0; i < g.node_count; ++i) tags.push_back(g.node_split ? (*g.node_split)[i] : Split::train);
  } else {
    for (const Graph& g : d.graphs) {
      labels.push_back(*g.graph_label);
      tags.push_back(g.graph_split.value_or(Split::train));
    }
  }
  // One extra item per class keeps a query candidate available.
  return train_classes_with(labels, tags, k + 1);
}

struct Job {
  TaskLevel level;
  std::size_t dataset;
  Episode episode;
  std::uint64_t dropout_seed = 0;
  double coef = 0.0;
};

Job sample_job(const Corpus& corpus, const std::vector<std::size_t>& sources, TaskLevel level, int k,
               const TrainConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, sources.size() - 1);
  Job job;
  job.level = level;
  job.dataset = sources[pick(rng)];
  const Dataset& d = corpus.datasets[job.dataset];
  const auto q = static_cast<std::size_t>(cfg.query_size);
  try {
    if (level == TaskLevel::link) {
      job.episode = sample_link_episode(d.graphs[0], k, q, SplitPolicy::pretrain, rng, {cfg.neg_ratio, 200});
    } else {
      const int avail = eligible_classes(d, level, k);
      const int hi = cfg.n_way_max > 0 ? std::min(cfg.n_way_max, avail) : avail;
      if (hi < cfg.n_way_min) {
        throw SamplingError(std::to_string(avail) + " classes have more than " + std::to_string(k) +
                            " train items; n_way.min is " + std::to_string(cfg.n_way_min));
      }
      std::uniform_int_distribution<int> n_dist(cfg.n_way_min, hi);
      const int n = n_dist(rng);
      job.episode = level == TaskLevel::node
                        ? sample_node_episode(d.graphs[0], n, k, q, SplitPolicy::pretrain, rng)
                        : sample_graph_episode(d, n, k, q, SplitPolicy::pretrain, rng);
    }
  } catch (const SamplingError& e) {
    throw ConfigError("cannot sample a " + std::string(to_string(level)) + " episode from dataset '" + d.name +
                      "' at " + std::to_string(k) + " shots: " + e.what());
  }
  job.episode = augment(std::move(job.episode), cfg.feat_drop, cfg.edge_drop, rng);
  job.dropout_seed = rng();
  return job;
}

std::size_t items_of(const Episode& e) { return e.support.size() + e.query.size(); }

}  // namespace

TrainState initial_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainState s;
  s.params = init_params(cfg.model, cfg.seed);
  s.rng_state = rng_to_string(Rng(cfg.seed ^ 0x5851f42d4c957f2dULL));
  return s;
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, TrainState start, const EpochCallback& on_epoch,
                  const std::function<void(const TrainState&)>& on_diverge) {
  cfg.validate();
  corpus.validate();
  if (!(start.params.config == cfg.model)) throw ConfigError("checkpoint architecture differs from the config");
  if (cfg.preflight_grad_check) {
    const double err = preflight_gradient_check(cfg.seed);
    if (!(err < 1e-4)) {
      throw NumericalError("gradient pre-flight failed: max relative error " + std::to_string(err));
    }
  }

  std::vector<TaskLevel> levels = cfg.levels;
  if (levels.empty()) {
    for (TaskLevel l : {TaskLevel::node, TaskLevel::link, TaskLevel::graph})
      if (corpus.supports(l)) levels.push_back(l);
  }
  std::array<std::vector<std::size_t>, 3> sources;
  for (TaskLevel l : levels) {
    for (std::size_t i = 0; i < corpus.datasets.size(); ++i)
      if (corpus.datasets[i].supports(l)) sources[level_index(l)].push_back(i);
    if (sources[level_index(l)].empty()) {
      throw ConfigError("no dataset in the corpus supports " + std::string(to_string(l)) + " tasks");
    }
  }

  const AlignSpec spec = align_spec(cfg.model);
  std::vector<PreparedDataset> prepared;
  prepared.reserve(corpus.datasets.size());
  for (const Dataset& d : corpus.datasets) prepared.push_back(prepare_dataset(d, spec));

  TrainResult result;
  result.state = std::move(start);
  TrainState& st = result.state;
  Rng rng = rng_from_string(st.rng_state);

  for (int epoch = st.epoch; epoch < cfg.epochs; ++epoch) {
    const int k = shots_at(cfg.shot_schedule(), epoch);

    // Sample the whole epoch up front so the number of steps is known.
    std::array<std::vector<std::vector<Job>>, 3> batches;
    for (TaskLevel l : levels) {
      auto& out = batches[level_index(l)];
      std::size_t filled = 0;
      for (int i = 0; i < cfg.episodes_per_epoch; ++i) {
        Job job = sample_job(corpus, sources[level_index(l)], l, k, cfg, rng);
        if (out.empty() || filled >= static_cast<std::size_t>(cfg.batch_items[level_index(l)])) {
          out.emplace_back();
          filled = 0;
        }
        filled += items_of(job.episode);
        out.back().push_back(std::move(job));
      }
    }
    std::size_t steps = 0;
    for (const auto& b : batches) steps = std::max(steps, b.size());

    EpochTelemetry tel;
    tel.epoch = epoch;
    tel.shots = k;
    std::array<double, 3> level_sum{0, 0, 0};
    std::array<std::size_t, 3> level_count{0, 0, 0};
    double total_sum = 0.0;

    for (std::size_t s = 0; s < steps; ++s) {
      const double progress =
          (static_cast<double>(epoch) + static_cast<double>(s) / static_cast<double>(steps)) / cfg.epochs;
      const double lr = cfg.optimizer.lr * lr_factor(cfg.lr_schedule, progress, cfg.warmup_fraction);
      if (s == 0) tel.lr = lr;

      std::vector<Job*> jobs;
      for (TaskLevel l : levels) {
        auto& b = batches[level_index(l)];
        if (s >= b.size()) continue;
        for (Job& j : b[s]) {
          j.coef = cfg.loss_weights[level_index(l)] / static_cast<double>(b[s].size());
          jobs.push_back(&j);
        }
      }

      std::vector<double> losses(jobs.size(), 0.0);
      std::vector<std::map<std::string, Matrix>> grads(jobs.size());
      std::vector<std::string> failures(jobs.size());
      const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t i = 0; i < n_jobs; ++i) {
        const Job& j = *jobs[static_cast<std::size_t>(i)];
        try {
          ad::Tape tape;
          BoundParams bound(tape, st.params);
          ForwardOptions opts;
          opts.train = true;
          opts.dropout_seed = j.dropout_seed;
          EpisodeForward f = forward_episode(tape, bound, prepared[j.dataset], j.episode, opts);
          tape.backward(f.loss);
          losses[static_cast<std::size_t>(i)] = f.loss.value()(0, 0);
          grads[static_cast<std::size_t>(i)] = bound.gradients();
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(i)] = e.what();
        }
      }
      for (const auto& f : failures)
        if (!f.empty()) throw NumericalError("episode failed: " + f);

      // Serial merge in job order keeps the sum independent of thread count.
      std::map<std::string, Matrix> total;
      for (const auto& [name, m] : st.params.arrays) total.emplace(name, Matrix(m.rows(), m.cols(), 0.0));
      std::array<double, 3> step_sum{0, 0, 0};
      std::array<std::size_t, 3> step_count{0, 0, 0};
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::size_t li = level_index(jobs[i]->level);
        step_sum[li] += losses[i];
        step_count[li] += 1;
        for (auto& [name, g] : grads[i]) {
          auto dst = total.at(name).data();
          auto src = g.data();
          for (std::size_t x = 0; x < dst.size(); ++x) dst[x] += jobs[i]->coef * src[x];
        }
      }
      double step_total = 0.0;
      for (std::size_t li = 0; li < 3; ++li) {
        if (step_count[li] == 0) continue;
        step_total += cfg.loss_weights[li] * step_sum[li] / static_cast<double>(step_count[li]);
        level_sum[li] += step_sum[li];
        level_count[li] += step_count[li];
      }
      if (!std::isfinite(step_total)) {
        if (on_diverge) on_diverge(st);
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(s));
      }
      total_sum += step_total;
      clip_global_norm(total, cfg.grad_clip);
      adam_step(st.params, total, st.optimizer, cfg.optimizer, lr);
      st.step += 1;
    }

    for (std::size_t li = 0; li < 3; ++li) {
      if (level_count[li] > 0) tel.level_loss[li] = level_sum[li] / static_cast<double>(level_count[li]);
    }
    tel.total_loss = steps > 0 ? total_sum / static_cast<double>(steps) : 0.0;
    st.epoch = epoch + 1;
    st.rng_state = rng_to_string(rng);
    result.telemetry.push_back(tel);
    if (on_epoch) on_epoch(st, tel);
  }
  return result;
}

double preflight_gradient_check(std::uint64_t seed) {
  SyntheticSpec syn;
  syn.n_classes = 2;
  syn.nodes_per_class = 6;
  syn.intra_p = 0.6;
  syn.inter_p = 0.1;
  syn.feature_dim = 5;
  syn.class_mean_separation = 2.0;
  syn.seed = seed;
  Dataset d{"preflight", {make_synthetic(syn)}, {TaskLevel::node}};

  ModelConfig mc;
  mc.dim = 8;
  mc.encoder_layers = 2;
  mc.icl_layers = 1;
  mc.heads = 2;
  mc.ffn_hidden = 8;
  mc.temperature = 2.0;
  ModelParams params = init_params(mc, seed);
  // Move LayerNorm affines and biases off their trivial init so every
  // parameter has a non-degenerate gradient.
  Rng rng(seed + 17);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& [_, m] : params.arrays)
    for (double& v : m.data()) v += u(rng);

  const PreparedDataset prepared = prepare_dataset(d, align_spec(mc));
  const Episode e = sample_node_episode(d.graphs[0], 2, 2, 3, SplitPolicy::pretrain, rng);

  std::vector<std::string> names;
  std::vector<Matrix> values;
  for (const auto& [name, m] : params.arrays) {
    names.push_back(name);
    values.push_back(m);
  }
  ad::ScalarFn g = [&](ad::Tape& tape, std::span<const ad::Var> leaves) {
    BoundParams bound(params.config, names, leaves);
    return forward_episode(tape, bound, prepared, e, {}).loss;
  };
  ad::GradCheckOptions opts;
  return ad::grad_check(g, values, opts).max_rel_error;
}

}  // namespace gilt
