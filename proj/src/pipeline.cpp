// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/pipeline.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "gilt/errors.hpp"
#include "gilt/struct_encoder.hpp"

namespace gilt {

AlignSpec align_spec(const ModelConfig& config) {
  AlignSpec s;
  s.unified_dim = config.dim;
  s.intermediate_dim = config.intermediate_dim;
  s.mode = config.align_mode;
  return s;
}

PreparedGraph prepare_graph(const Graph& g, const AlignSpec& spec) {
  PreparedGraph p;
  p.graph = &g;
  p.aligned = align(g.features, spec);
  p.adjacency = std::make_shared<const SparseMatrix>(normalize_adjacency(g));
  return p;
}

PreparedDataset prepare_dataset(const Dataset& d, const AlignSpec& spec) {
  PreparedDataset p;
  p.dataset = &d;
  p.graphs.reserve(d.graphs.size());
  for (const Graph& g : d.graphs) p.graphs.push_back(prepare_graph(g, spec));
  return p;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Message-passing adjacency for one episode: hidden edges removed, then
// augmentation edge dropout.
std::shared_ptr<const SparseMatrix> episode_adjacency(const PreparedGraph& pg, const Episode& e,
                                                      const Augmentation* aug) {
  const bool drop = aug != nullptr && aug->edge_drop > 0.0;
  if (e.hidden_edges.empty() && !drop) return pg.adjacency;
  std::unordered_set<std::uint64_t> hidden;
  for (const Edge& h : e.hidden_edges) hidden.insert(edge_key(h.u, h.v));
  const std::vector<bool> keep = drop ? edge_keep_mask(*aug, pg.graph->edges.size())
                                      : std::vector<bool>(pg.graph->edges.size(), true);
  std::vector<Edge> visible;
  visible.reserve(pg.graph->edges.size());
  for (std::size_t i = 0; i < pg.graph->edges.size(); ++i) {
    const Edge& ed = pg.graph->edges[i];
    if (keep[i] && hidden.count(edge_key(ed.u, ed.v)) == 0) visible.push_back(ed);
  }
  return std::make_shared<const SparseMatrix>(normalize_adjacency(pg.graph->node_count, visible));
}

ad::Var input_features(ad::Tape& tape, const BoundParams& params, const PreparedGraph& pg,
                       const Augmentation* aug) {
  ad::Var x = tape.constant(pg.aligned.values);
  if (pg.aligned.mode == AlignMode::learnable_projection) {
    x = ad::standardize_cols(ad::matmul(x, params["align.projection"]));
  }
  if (aug != nullptr && aug->feat_drop > 0.0) {
    x = ad::apply_mask(x, feature_keep_mask(*aug, x.rows(), x.cols()));
  }
  return x;
}

ad::Var embed(ad::Tape& tape, const BoundParams& params, const PreparedGraph& pg, const Episode& e,
              const Augmentation* aug, int layers) {
  const ad::Var x = input_features(tape, params, pg, aug);
  return encode(x, episode_adjacency(pg, e, aug), params, layers);
}

}  // namespace

EpisodeForward forward_episode(ad::Tape& tape, const BoundParams& params, const PreparedDataset& data,
                               const Episode& e, const ForwardOptions& opts) {
  const ModelConfig& cfg = params.config();
  const int enc_layers = opts.encoder_layers < 0 ? cfg.encoder_layers : opts.encoder_layers;
  const int icl_layers = opts.icl_layers < 0 ? cfg.icl_layers : opts.icl_layers;
  if (data.graphs.empty()) throw ProtocolError("episode run against an empty dataset");
  const Augmentation* aug = opts.train && e.augmentation.active() ? &e.augmentation : nullptr;

  ad::Var support_reprs;
  ad::Var query_reprs;
  if (e.level == TaskLevel::graph) {
    // Encode every referenced graph once and pool it.
    std::map<std::uint32_t, ad::Var> pooled;
    auto repr_of = [&](std::uint32_t gi) {
      if (gi >= data.graphs.size()) throw ProtocolError("episode references graph " + std::to_string(gi));
      auto it = pooled.find(gi);
      if (it != pooled.end()) return it->second;
      std::optional<Augmentation> local;
      if (aug != nullptr) local = Augmentation{aug->feat_drop, aug->edge_drop, mix_seed(aug->seed, gi)};
      Episode no_hidden;
      ad::Var h = embed(tape, params, data.graphs[gi], no_hidden, local ? &*local : nullptr, enc_layers);
      return pooled.emplace(gi, pooled_repr(h)).first->second;
    };
    std::vector<ad::Var> s;
    std::vector<ad::Var> q;
    for (const ItemRef& r : e.support) s.push_back(repr_of(r.a));
    for (const ItemRef& r : e.query) q.push_back(repr_of(r.a));
    support_reprs = ad::concat_rows(s);
    query_reprs = q.empty() ? tape.constant(Matrix(0, cfg.dim)) : ad::concat_rows(q);
  } else {
    const PreparedGraph& pg = data.graphs[0];
    ad::Var h = embed(tape, params, pg, e, aug, enc_layers);
    if (e.level == TaskLevel::node) {
      support_reprs = node_reprs(h, e.support);
      query_reprs = node_reprs(h, e.query);
    } else {
      support_reprs = link_reprs(h, e.support);
      query_reprs = link_reprs(h, e.query);
    }
  }

  EpisodeForward f;
  f.tokens = build_tokens(support_reprs, query_reprs, e.support_labels, e.n_way);
  std::optional<DropoutSource> dropout;
  if (opts.train && cfg.dropout > 0.0) dropout.emplace(cfg.dropout, opts.dropout_seed);
  f.context = icl_forward(f.tokens.support, f.tokens.query, params, icl_layers, dropout ? &*dropout : nullptr);
  f.head = predict(f.context.support, f.context.query, e.support_labels, e.n_way, opts.space, cfg.temperature,
                   cfg.dim);
  if (!e.query_labels.empty()) f.loss = episode_loss(f.head.probs, e.query_labels);
  return f;
}

EpisodeResult run_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e,
                          const ForwardOptions& opts) {
  ad::Tape tape;
  BoundParams bound(tape, params, false);
  ForwardOptions o = opts;
  o.train = false;
  return to_result(forward_episode(tape, bound, data, e, o).head);
}

TokenSet tokenize_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e) {
  ad::Tape tape;
  BoundParams bound(tape, params, false);
  ForwardOptions o;
  o.icl_layers = 0;
  EpisodeForward f = forward_episode(tape, bound, data, e, o);
  TokenSet t;
  t.n_way = e.n_way;
  t.dim = params.config.dim;
  t.support = f.tokens.support.value();
  t.query = f.tokens.query.value();
  t.support_classes = e.support_labels;
  t.degenerate_prototypes = f.tokens.degenerate_prototypes;
  return t;
}

}  // namespace gilt
