// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/episode.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "gilt/errors.hpp"
#include "json.hpp"

namespace gilt {
namespace {

// First k entries of a partial Fisher–Yates shuffle.
template <class T>
std::vector<T> draw(std::vector<T> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

Split tag_or_train(const std::optional<std::vector<Split>>& tags, std::size_t i) {
  return tags ? (*tags)[i] : Split::train;
}

void require_split_for_eval(bool has_split, SplitPolicy policy, const char* what) {
  if (policy == SplitPolicy::evaluation && !has_split) {
    throw ProtocolError(std::string("evaluation episodes need a ") + what + " split");
  }
}

// Shared N-way K-shot logic over labelled items (nodes or graphs).
Episode sample_classified(TaskLevel level, const std::vector<int>& labels,
                          const std::vector<Split>& tags, int n_way, int k_shot,
                          std::size_t query_size, SplitPolicy policy, Rng& rng) {
  if (n_way < 1 || k_shot < 1) throw SamplingError("n_way and k_shot must be >= 1");
  const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::uint32_t>> train(static_cast<std::size_t>(classes));
  std::vector<std::vector<std::uint32_t>> test(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (tags[i] == Split::train) train[c].push_back(static_cast<std::uint32_t>(i));
    if (tags[i] == Split::test) test[c].push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<int> eligible;
  for (int c = 0; c < classes; ++c) {
    if (train[static_cast<std::size_t>(c)].size() >= static_cast<std::size_t>(k_shot)) eligible.push_back(c);
  }
  if (eligible.size() < static_cast<std::size_t>(n_way)) {
    throw SamplingError("need " + std::to_string(n_way) + " classes with >= " + std::to_string(k_shot) +
                        " train items, found " + std::to_string(eligible.size()));
  }
  Episode e;
  e.level = level;
  e.policy = policy;
  e.n_way = n_way;
  e.k_shot = k_shot;
  e.class_ids = draw(eligible, static_cast<std::size_t>(n_way), rng);

  std::vector<std::pair<std::uint32_t, int>> query_pool;
  for (int ec = 0; ec < n_way; ++ec) {
    const auto c = static_cast<std::size_t>(e.class_ids[static_cast<std::size_t>(ec)]);
    std::vector<std::uint32_t> shuffled = draw(train[c], train[c].size(), rng);
    for (int s = 0; s < k_shot; ++s) {
      e.support.push_back({shuffled[static_cast<std::size_t>(s)], 0});
      e.support_labels.push_back(ec);
    }
    const auto& rest = policy == SplitPolicy::pretrain
                           ? std::vector<std::uint32_t>(shuffled.begin() + k_shot, shuffled.end())
                           : test[c];
    for (std::uint32_t v : rest) query_pool.emplace_back(v, ec);
  }
  if (query_pool.empty()) throw SamplingError("no query items available for the chosen classes");
  std::sort(query_pool.begin(), query_pool.end());
  if (query_size != kAllQueries && query_size < query_pool.size()) {
    query_pool = draw(std::move(query_pool), query_size, rng);
  }
  for (auto [v, ec] : query_pool) {
    e.query.push_back({v, 0});
    e.query_labels.push_back(ec);
  }
  return e;
}

std::unordered_set<std::uint64_t> edge_set(const Graph& g) {
  std::unordered_set<std::uint64_t> s;
  s.reserve(g.edges.size() * 2);
  for (const Edge& e : g.edges) s.insert(edge_key(e.u, e.v));
  return s;
}

}  // namespace

Episode sample_node_episode(const Graph& g, int n_way, int k_shot, std::size_t query_size,
                            SplitPolicy policy, Rng& rng) {
  if (!g.node_labels) throw SamplingError("node episodes need node labels");
  require_split_for_eval(g.node_split.has_value(), policy, "node");
  std::vector<Split> tags(g.node_count);
  for (std::size_t i = 0; i < g.node_count; ++i) tags[i] = tag_or_train(g.node_split, i);
  return sample_classified(TaskLevel::node, *g.node_labels, tags, n_way, k_shot, query_size, policy, rng);
}

Episode sample_graph_episode(const Dataset& d, int n_way, int k_shot, std::size_t query_size,
                             SplitPolicy policy, Rng& rng) {
  std::vector<int> labels;
  std::vector<Split> tags;
  bool all_tagged = true;
  for (const Graph& g : d.graphs) {
    if (!g.graph_label) throw SamplingError("graph episodes need graph labels");
    labels.push_back(*g.graph_label);
    tags.push_back(g.graph_split.value_or(Split::train));
    all_tagged = all_tagged && g.graph_split.has_value();
  }
  require_split_for_eval(all_tagged, policy, "graph");
  return sample_classified(TaskLevel::graph, labels, tags, n_way, k_shot, query_size, policy, rng);
}

Episode sample_link_episode(const Graph& g, int k_shot, std::size_t query_size, SplitPolicy policy,
                            Rng& rng, const LinkSamplingOptions& opts) {
  if (k_shot < 1) throw SamplingError("k_shot must be >= 1");
  if (opts.neg_ratio < 1) throw SamplingError("neg_ratio must be >= 1");
  require_split_for_eval(g.edge_split.has_value(), policy, "edge");
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> test;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Split s = tag_or_train(g.edge_split, i);
    if (s == Split::train) train.push_back(static_cast<std::uint32_t>(i));
    if (s == Split::test) test.push_back(static_cast<std::uint32_t>(i));
  }
  if (train.size() < static_cast<std::size_t>(k_shot)) {
    throw SamplingError("need >= " + std::to_string(k_shot) + " train edges, found " +
                        std::to_string(train.size()));
  }
  const std::size_t n = g.node_count;
  const std::size_t max_edges = n < 2 ? 0 : n * (n - 1) / 2;
  if (g.edges.size() >= max_edges) throw SamplingError("graph is complete: no non-edges to sample");

  Episode e;
  e.level = TaskLevel::link;
  e.policy = policy;
  e.n_way = 2;
  e.k_shot = k_shot;
  e.class_ids = {0, 1};

  train = draw(std::move(train), train.size(), rng);
  std::vector<std::uint32_t> support_pos(train.begin(), train.begin() + k_shot);
  std::vector<std::uint32_t> query_pool =
      policy == SplitPolicy::pretrain ? std::vector<std::uint32_t>(train.begin() + k_shot, train.end()) : test;
  if (query_pool.empty()) throw SamplingError("no held-out edges available for queries");
  std::sort(query_pool.begin(), query_pool.end());
  const std::size_t ratio = static_cast<std::size_t>(opts.neg_ratio);
  std::size_t q_pos = query_pool.size();
  if (query_size != kAllQueries) q_pos = std::clamp<std::size_t>(query_size / (1 + ratio), 1, q_pos);
  std::vector<std::uint32_t> query_pos =
      q_pos < query_pool.size() ? draw(std::move(query_pool), q_pos, rng) : query_pool;

  const auto edges = edge_set(g);
  std::unordered_set<std::uint64_t> used;
  std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
  auto negatives = [&](std::size_t count) {
    std::vector<ItemRef> out;
    std::size_t budget = opts.max_attempts_per_negative * count;
    while (out.size() < count) {
      if (budget-- == 0) {
        throw SamplingError("gave up sampling non-edges; the graph is too dense");
      }
      std::uint32_t u = node(rng);
      std::uint32_t v = node(rng);
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      const auto key = edge_key(u, v);
      if (edges.count(key) != 0 || !used.insert(key).second) continue;
      out.push_back({u, v});
    }
    return out;
  };

  for (const ItemRef& r : negatives(ratio * static_cast<std::size_t>(k_shot))) {
    e.support.push_back(r);
    e.support_labels.push_back(0);
  }
  for (std::uint32_t i : support_pos) {
    e.support.push_back({g.edges[i].u, g.edges[i].v});
    e.support_labels.push_back(1);
  }
  for (std::uint32_t i : query_pos) {
    e.query.push_back({g.edges[i].u, g.edges[i].v});
    e.query_labels.push_back(1);
  }
  for (const ItemRef& r : negatives(ratio * query_pos.size())) {
    e.query.push_back(r);
    e.query_labels.push_back(0);
  }

  if (policy == SplitPolicy::pretrain) {
    for (std::uint32_t i : query_pos) e.hidden_edges.push_back(g.edges[i]);
  } else {
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      if ((*g.edge_split)[i] != Split::train) e.hidden_edges.push_back(g.edges[i]);
    }
  }
  std::sort(e.hidden_edges.begin(), e.hidden_edges.end());
  return e;
}

Episode augment(Episode e, double feat_drop, double edge_drop, Rng& rng) {
  if (!(feat_drop >= 0.0 && feat_drop < 1.0) || !(edge_drop >= 0.0 && edge_drop < 1.0)) {
    throw ConfigError("dropout probabilities must lie in [0,1)");
  }
  if (feat_drop == 0.0 && edge_drop == 0.0) return e;
  e.augmentation = {feat_drop, edge_drop, rng()};
  return e;
}

Matrix feature_keep_mask(const Augmentation& a, std::size_t rows, std::size_t cols) {
  Matrix mask(rows, cols, 1.0);
  if (a.feat_drop <= 0.0) return mask;
  Rng rng(a.seed);
  std::bernoulli_distribution drop(a.feat_drop);
  for (double& v : mask.data()) v = drop(rng) ? 0.0 : 1.0;
  return mask;
}

std::vector<bool> edge_keep_mask(const Augmentation& a, std::size_t edge_count) {
  std::vector<bool> keep(edge_count, true);
  if (a.edge_drop <= 0.0) return keep;
  // Separate stream from the feature mask.
  Rng rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  std::bernoulli_distribution drop(a.edge_drop);
  for (std::size_t i = 0; i < edge_count; ++i) keep[i] = !drop(rng);
  return keep;
}

namespace {

void check_disjoint(const Episode& e) {
  std::unordered_set<std::uint64_t> seen;
  auto key = [&e](const ItemRef& r) {
    return e.level == TaskLevel::link ? edge_key(r.a, r.b) : static_cast<std::uint64_t>(r.a);
  };
  for (const ItemRef& r : e.support) seen.insert(key(r));
  for (const ItemRef& r : e.query) {
    if (seen.count(key(r)) != 0) throw ProtocolError("leakage: a query item also appears in the support set");
  }
  if (e.support.size() != e.support_labels.size() || e.query.size() != e.query_labels.size()) {
    throw ProtocolError("episode label count mismatch");
  }
}

void check_tag(Split have, Split want, const char* role) {
  if (have != want) {
    throw ProtocolError(std::string("leakage: ") + role + " item tagged " + std::string(to_string(have)) +
                        ", expected " + std::string(to_string(want)));
  }
}

}  // namespace

void check_leakage(const Episode& e, const Graph& g) {
  check_disjoint(e);
  const bool eval = e.policy == SplitPolicy::evaluation;
  if (e.level == TaskLevel::node) {
    for (const ItemRef& r : e.support) {
      if (r.a >= g.node_count) throw ProtocolError("support node out of range");
      if (eval) check_tag((*g.node_split)[r.a], Split::train, "support");
    }
    for (const ItemRef& r : e.query) {
      if (r.a >= g.node_count) throw ProtocolError("query node out of range");
      if (eval) check_tag((*g.node_split)[r.a], Split::test, "query");
    }
    return;
  }
  if (e.level != TaskLevel::link) throw ProtocolError("graph-level episode checked against a single graph");
  std::unordered_map<std::uint64_t, Split> tags;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    tags.emplace(edge_key(g.edges[i].u, g.edges[i].v), tag_or_train(g.edge_split, i));
  }
  std::unordered_set<std::uint64_t> hidden;
  for (const Edge& h : e.hidden_edges) hidden.insert(edge_key(h.u, h.v));
  auto check = [&](const ItemRef& r, int label, bool is_query) {
    auto it = tags.find(edge_key(r.a, r.b));
    if (label == 0) {
      if (it != tags.end()) throw ProtocolError("negative link sample is a true edge");
      return;
    }
    if (it == tags.end()) throw ProtocolError("positive link sample is not an edge");
    if (eval) check_tag(it->second, is_query ? Split::test : Split::train, is_query ? "query" : "support");
    if (is_query && hidden.count(it->first) == 0) {
      throw ProtocolError("leakage: query edge is visible to message passing");
    }
  };
  for (std::size_t i = 0; i < e.support.size(); ++i) check(e.support[i], e.support_labels[i], false);
  for (std::size_t i = 0; i < e.query.size(); ++i) check(e.query[i], e.query_labels[i], true);
}

void check_leakage(const Episode& e, const Dataset& d) {
  if (e.level != TaskLevel::graph) {
    if (d.graphs.size() != 1) throw ProtocolError("node/link episode needs a single-graph dataset");
    check_leakage(e, d.graphs[0]);
    return;
  }
  check_disjoint(e);
  const bool eval = e.policy == SplitPolicy::evaluation;
  for (const ItemRef& r : e.support) {
    if (r.a >= d.graphs.size()) throw ProtocolError("support graph out of range");
    if (eval) check_tag(d.graphs[r.a].graph_split.value_or(Split::train), Split::train, "support");
  }
  for (const ItemRef& r : e.query) {
    if (r.a >= d.graphs.size()) throw ProtocolError("query graph out of range");
    if (eval) check_tag(d.graphs[r.a].graph_split.value_or(Split::train), Split::test, "query");
  }
}

int shots_at(const ShotSchedule& s, int epoch) {
  if (s.start_shots < s.end_shots || s.end_shots < 1) {
    throw ConfigError("shot schedule needs start >= end >= 1");
  }
  if (s.total_epochs < 1 || epoch < 0 || epoch >= s.total_epochs) {
    throw ConfigError("epoch " + std::to_string(epoch) + " outside the schedule");
  }
  if (epoch == s.total_epochs - 1) return s.end_shots;
  const double t = static_cast<double>(epoch) / static_cast<double>(s.total_epochs);
  const double x = s.start_shots + (s.end_shots - s.start_shots) * t;
  return static_cast<int>(std::floor(x + 0.5));
}

// ---- JSON ------------------------------------------------------------------

std::string episode_to_json(const Episode& e) {
  using nlohmann::json;
  auto items = [](const std::vector<ItemRef>& v) {
    json a = json::array();
    for (const ItemRef& r : v) a.push_back({r.a, r.b});
    return a;
  };
  json hidden = json::array();
  for (const Edge& h : e.hidden_edges) hidden.push_back({h.u, h.v});
  json j = {{"level", std::string(to_string(e.level))},
            {"policy", e.policy == SplitPolicy::pretrain ? "pretrain" : "evaluation"},
            {"n_way", e.n_way},
            {"k_shot", e.k_shot},
            {"support", items(e.support)},
            {"support_labels", e.support_labels},
            {"query", items(e.query)},
            {"query_labels", e.query_labels},
            {"class_ids", e.class_ids},
            {"hidden_edges", hidden},
            {"augmentation",
             {{"feat_drop", e.augmentation.feat_drop},
              {"edge_drop", e.augmentation.edge_drop},
              {"seed", e.augmentation.seed}}}};
  return j.dump();
}

Episode episode_from_json(std::string_view text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    Episode e;
    e.level = parse_task_level(j.at("level").get<std::string>());
    const auto policy = j.at("policy").get<std::string>();
    if (policy != "pretrain" && policy != "evaluation") throw ParseError("bad episode policy");
    e.policy = policy == "pretrain" ? SplitPolicy::pretrain : SplitPolicy::evaluation;
    e.n_way = j.at("n_way").get<int>();
    e.k_shot = j.at("k_shot").get<int>();
    auto items = [](const json& a) {
      std::vector<ItemRef> v;
      for (const auto& r : a) v.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
      return v;
    };
    e.support = items(j.at("support"));
    e.support_labels = j.at("support_labels").get<std::vector<int>>();
    e.query = items(j.at("query"));
    e.query_labels = j.at("query_labels").get<std::vector<int>>();
    e.class_ids = j.at("class_ids").get<std::vector<int>>();
    for (const auto& h : j.at("hidden_edges")) {
      e.hidden_edges.push_back({h.at(0).get<std::uint32_t>(), h.at(1).get<std::uint32_t>()});
    }
    const auto& a = j.at("augmentation");
    e.augmentation = {a.at("feat_drop").get<double>(), a.at("edge_drop").get<double>(),
                      a.at("seed").get<std::uint64_t>()};
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed episode JSON: ") + ex.what());
  }
}

}  // namespace gilt
