// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "gilt/errors.hpp"
#include "json.hpp"

namespace gilt {

using nlohmann::json;

std::string_view to_string(TaskLevel level) {
  switch (level) {
    case TaskLevel::node: return "node";
    case TaskLevel::link: return "link";
    case TaskLevel::graph: return "graph";
  }
  return "?";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

TaskLevel parse_task_level(std::string_view s) {
  if (s == "node") return TaskLevel::node;
  if (s == "link") return TaskLevel::link;
  if (s == "graph") return TaskLevel::graph;
  throw ConfigError("unknown task level '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "valid") return Split::valid;
  if (s == "test") return Split::test;
  throw ParseError("unknown split tag '" + std::string(s) + "'");
}

GraphFormat parse_graph_format(std::string_view s) {
  if (s == "json") return GraphFormat::json;
  if (s == "edge-list" || s == "edge-list+csv") return GraphFormat::edge_list;
  throw ConfigError("unknown graph format '" + std::string(s) + "'");
}

int Graph::class_count() const {
  if (!node_labels || node_labels->empty()) return 0;
  return *std::max_element(node_labels->begin(), node_labels->end()) + 1;
}

void Graph::validate() const {
  if (features.rows() != node_count) {
    throw ConsistencyError("feature rows (" + std::to_string(features.rows()) +
                           ") != node count (" + std::to_string(node_count) + ")");
  }
  if (!all_finite(features)) throw NonFiniteError("features contain NaN or Inf");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw ConsistencyError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") out of range for " + std::to_string(node_count) + " nodes");
    }
    if (e.u == e.v) throw ConsistencyError("self-loop stored on node " + std::to_string(e.u));
    if (e.u > e.v) throw ConsistencyError("edge not stored as (min,max)");
    if (!seen.insert(edge_key(e.u, e.v)).second) throw ConsistencyError("duplicate edge");
  }
  if (node_labels) {
    if (node_labels->size() != node_count) throw ConsistencyError("label count != node count");
    for (int y : *node_labels) {
      if (y < 0) throw ConsistencyError("negative node label");
    }
  }
  if (node_split && node_split->size() != node_count) {
    throw ConsistencyError("node split size != node count");
  }
  if (edge_split && edge_split->size() != edges.size()) {
    throw ConsistencyError("edge split size != edge count");
  }
  if (graph_label && *graph_label < 0) throw ConsistencyError("negative graph label");
}

Graph make_graph(std::size_t node_count, std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                 Matrix features, std::optional<std::vector<int>> labels) {
  Graph g;
  g.node_count = node_count;
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= node_count ||
        static_cast<std::size_t>(b) >= node_count) {
      throw ConsistencyError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") out of range for " + std::to_string(node_count) + " nodes");
    }
    if (a == b) continue;
    auto u = static_cast<std::uint32_t>(std::min(a, b));
    auto v = static_cast<std::uint32_t>(std::max(a, b));
    edges.push_back({u, v});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.features = std::move(features);
  g.node_labels = std::move(labels);
  g.validate();
  return g;
}

bool Dataset::supports(TaskLevel level) const {
  return std::find(levels.begin(), levels.end(), level) != levels.end();
}

void Dataset::validate() const {
  if (graphs.empty()) throw ConsistencyError("dataset '" + name + "' has no graphs");
  if (levels.empty()) throw ConsistencyError("dataset '" + name + "' supports no task level");
  for (const Graph& g : graphs) g.validate();
  if (supports(TaskLevel::node) || supports(TaskLevel::link)) {
    if (graphs.size() != 1) {
      throw ConsistencyError("node/link dataset '" + name + "' must hold exactly one graph");
    }
  }
  if (supports(TaskLevel::node) && !graphs[0].node_labels) {
    throw ConsistencyError("dataset '" + name + "' is annotated for node tasks but has no labels");
  }
  if (supports(TaskLevel::graph)) {
    for (const Graph& g : graphs) {
      if (!g.graph_label) {
        throw ConsistencyError("dataset '" + name + "' has a graph without a graph label");
      }
    }
  }
}

bool Corpus::supports(TaskLevel level) const {
  return std::any_of(datasets.begin(), datasets.end(),
                     [level](const Dataset& d) { return d.supports(level); });
}

void Corpus::validate() const {
  if (datasets.empty()) throw ConsistencyError("corpus is empty");
  for (const Dataset& d : datasets) d.validate();
}

// ---- JSON ------------------------------------------------------------------

namespace {

json graph_to_json_value(const Graph& g) {
  json j;
  j["nodes"] = g.node_count;
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  json feats = json::array();
  for (std::size_t i = 0; i < g.features.rows(); ++i) {
    auto r = g.features.row(i);
    feats.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["features"] = std::move(feats);
  if (g.node_labels) j["labels"] = *g.node_labels;
  if (g.graph_label) j["graph_label"] = *g.graph_label;
  auto splits = [](const std::vector<Split>& s) {
    json a = json::array();
    for (Split x : s) a.push_back(std::string(to_string(x)));
    return a;
  };
  if (g.node_split) j["node_split"] = splits(*g.node_split);
  if (g.edge_split) j["edge_split"] = splits(*g.edge_split);
  if (g.graph_split) j["graph_split"] = std::string(to_string(*g.graph_split));
  return j;
}

Graph graph_from_json_value(const json& j) {
  try {
    const auto n = j.at("nodes").get<std::size_t>();
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("edge entries must be [src, dst]");
      pairs.emplace_back(e[0].get<std::int64_t>(), e[1].get<std::int64_t>());
    }
    const auto& fj = j.at("features");
    if (fj.size() != n) {
      throw ConsistencyError("feature rows (" + std::to_string(fj.size()) + ") != node count (" +
                             std::to_string(n) + ")");
    }
    const std::size_t d = n == 0 ? 0 : fj[0].size();
    Matrix features(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (fj[i].size() != d) throw ConsistencyError("ragged feature rows");
      for (std::size_t c = 0; c < d; ++c) {
        const auto& v = fj[i][c];
        if (v.is_string()) {
          // Non-finite values survive JSON only as strings ("NaN", "Inf").
          features(i, c) = std::strtod(v.get<std::string>().c_str(), nullptr);
          if (std::isfinite(features(i, c))) throw ParseError("non-numeric feature value");
        } else {
          features(i, c) = v.get<double>();
        }
      }
    }
    std::optional<std::vector<int>> labels;
    if (j.contains("labels") && !j["labels"].is_null()) labels = j["labels"].get<std::vector<int>>();

    // Stored edges may already be canonical; make_graph keeps them sorted, so
    // remember the on-disk order to reattach edge_split tags.
    Graph g = make_graph(n, pairs, std::move(features), std::move(labels));
    if (j.contains("graph_label")) g.graph_label = j["graph_label"].get<int>();
    auto read_splits = [](const json& a) {
      std::vector<Split> s;
      s.reserve(a.size());
      for (const auto& x : a) s.push_back(parse_split(x.get<std::string>()));
      return s;
    };
    if (j.contains("node_split")) g.node_split = read_splits(j["node_split"]);
    if (j.contains("edge_split")) {
      auto tags = read_splits(j["edge_split"]);
      if (tags.size() != pairs.size()) throw ConsistencyError("edge split size != edge count");
      std::vector<std::pair<std::uint64_t, Split>> keyed;
      keyed.reserve(tags.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        keyed.emplace_back(edge_key(static_cast<std::uint32_t>(pairs[i].first),
                                    static_cast<std::uint32_t>(pairs[i].second)),
                           tags[i]);
      }
      std::sort(keyed.begin(), keyed.end());
      std::vector<Split> ordered;
      ordered.reserve(g.edges.size());
      std::size_t k = 0;
      for (const Edge& e : g.edges) {
        const auto key = edge_key(e.u, e.v);
        while (k < keyed.size() && keyed[k].first < key) ++k;
        if (k == keyed.size() || keyed[k].first != key) throw ConsistencyError("edge split mismatch");
        ordered.push_back(keyed[k].second);
      }
      g.edge_split = std::move(ordered);
    }
    if (j.contains("graph_split")) g.graph_split = parse_split(j["graph_split"].get<std::string>());
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed graph JSON: ") + e.what());
  }
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---- edge list + CSV ------------------------------------------------------

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

double parse_real(const std::string& tok, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str()) throw ParseError("'" + path.string() + "': bad number '" + tok + "'");
  while (*end == ' ') ++end;
  if (*end != '\0') throw ParseError("'" + path.string() + "': bad number '" + tok + "'");
  return v;
}

std::int64_t parse_int(const std::string& tok, const std::filesystem::path& path) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') {
    throw ParseError("'" + path.string() + "': bad integer '" + tok + "'");
  }
  return v;
}

Graph load_edge_list(const std::filesystem::path& edge_path) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::int64_t max_id = -1;
  for (const auto& line : read_lines(edge_path)) {
    std::istringstream ss(line);
    std::string a;
    std::string b;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t')) {
      throw ParseError("'" + edge_path.string() + "': expected src<TAB>dst, got '" + line + "'");
    }
    pairs.emplace_back(parse_int(a, edge_path), parse_int(b, edge_path));
    max_id = std::max({max_id, pairs.back().first, pairs.back().second});
  }

  auto sibling = [&](const char* suffix) {
    auto p = edge_path;
    p.replace_filename(edge_path.stem().string() + suffix);
    return p;
  };
  const auto feature_path = sibling(".features.csv");
  std::vector<std::vector<double>> rows;
  for (const auto& line : read_lines(feature_path)) {
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(parse_real(tok, feature_path));
    if (!rows.empty() && row.size() != rows[0].size()) {
      throw ConsistencyError("'" + feature_path.string() + "': ragged feature rows");
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  Matrix features(n, n == 0 ? 0 : rows[0].size());
  for (std::size_t i = 0; i < n; ++i) std::copy(rows[i].begin(), rows[i].end(), features.row(i).begin());

  std::optional<std::vector<int>> labels;
  const auto label_path = sibling(".labels.csv");
  if (std::filesystem::exists(label_path)) {
    std::vector<int> ls;
    for (const auto& line : read_lines(label_path)) ls.push_back(static_cast<int>(parse_int(line, label_path)));
    if (ls.size() != n) throw ConsistencyError("label rows != feature rows");
    labels = std::move(ls);
  }
  if (max_id >= static_cast<std::int64_t>(n)) {
    throw ConsistencyError("edge endpoint " + std::to_string(max_id) + " out of range for " +
                           std::to_string(n) + " nodes");
  }
  return make_graph(n, pairs, std::move(features), std::move(labels));
}

}  // namespace

std::string graph_to_json(const Graph& g) { return graph_to_json_value(g).dump(); }

Graph graph_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed graph JSON: ") + e.what());
  }
  return graph_from_json_value(j);
}

void write_graph_json(const Graph& g, const std::filesystem::path& path) {
  write_text_file(path, graph_to_json(g));
}

Graph load_graph(const std::filesystem::path& path, GraphFormat format) {
  if (format == GraphFormat::edge_list) return load_edge_list(path);
  return graph_from_json_value(parse_json_file(path));
}

std::vector<Graph> load_graph_collection(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  std::vector<Graph> out;
  if (j.contains("graphs")) {
    for (const auto& g : j["graphs"]) out.push_back(graph_from_json_value(g));
  } else {
    out.push_back(graph_from_json_value(j));
  }
  return out;
}

void write_graph_collection(std::span<const Graph> graphs, const std::filesystem::path& path) {
  json j;
  j["graphs"] = json::array();
  for (const Graph& g : graphs) j["graphs"].push_back(graph_to_json_value(g));
  write_text_file(path, j.dump());
}

std::vector<RegistryEntry> load_registry(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  std::vector<RegistryEntry> entries;
  try {
    for (const auto& [name, v] : j.at("datasets").items()) {
      RegistryEntry e;
      e.name = name;
      e.path = v.at("path").get<std::string>();
      if (e.path.is_relative()) e.path = path.parent_path() / e.path;
      e.format = parse_graph_format(v.value("format", std::string("json")));
      for (const auto& l : v.value("levels", json::array({"node"}))) {
        e.levels.push_back(parse_task_level(l.get<std::string>()));
      }
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError("registry '" + path.string() + "': " + e.what());
  }
  return entries;
}

void write_registry(std::span<const RegistryEntry> entries, const std::filesystem::path& path) {
  json j;
  j["datasets"] = json::object();
  for (const auto& e : entries) {
    json levels = json::array();
    for (TaskLevel l : e.levels) levels.push_back(std::string(to_string(l)));
    j["datasets"][e.name] = {{"path", e.path.string()},
                             {"format", e.format == GraphFormat::json ? "json" : "edge-list"},
                             {"levels", levels}};
  }
  write_text_file(path, j.dump(2));
}

Dataset load_dataset(const RegistryEntry& entry) {
  Dataset d;
  d.name = entry.name;
  d.levels = entry.levels;
  if (entry.format == GraphFormat::json) {
    d.graphs = load_graph_collection(entry.path);
  } else {
    d.graphs.push_back(load_graph(entry.path, entry.format));
  }
  d.validate();
  return d;
}

Corpus load_corpus(const std::filesystem::path& registry_path) {
  Corpus c;
  for (const auto& e : load_registry(registry_path)) c.datasets.push_back(load_dataset(e));
  c.validate();
  return c;
}

// ---- synthetic ---------------------------------------------------------------

namespace {

std::vector<std::vector<double>> class_means(int n_classes, int dim, double separation,
                                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> means(static_cast<std::size_t>(n_classes),
                                         std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& m : means) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : m) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
    } while (norm == 0.0);
    for (double& v : m) v *= separation / norm;
  }
  return means;
}

}  // namespace

Graph make_synthetic(const SyntheticSpec& spec) {
  if (spec.n_classes < 1 || spec.nodes_per_class < 1 || spec.feature_dim < 1) {
    throw ConfigError("synthetic spec: counts must be >= 1");
  }
  if (!(spec.intra_p >= 0.0 && spec.intra_p <= 1.0 && spec.inter_p >= 0.0 && spec.inter_p <= 1.0)) {
    throw ConfigError("synthetic spec: probabilities must lie in [0,1]");
  }
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.class_mean_separation)) {
    throw ConfigError("synthetic spec: noise_sd must be >= 0 and separation finite");
  }
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.n_classes) * spec.nodes_per_class;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / spec.nodes_per_class);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.intra_p : spec.inter_p;
      if (unit(rng) < p) pairs.emplace_back(i, j);
    }
  }

  const auto means = class_means(spec.n_classes, spec.feature_dim, spec.class_mean_separation, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x(n, static_cast<std::size_t>(spec.feature_dim));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = means[static_cast<std::size_t>(labels[i])];
    for (std::size_t c = 0; c < x.cols(); ++c) x(i, c) = mu[c] + spec.noise_sd * noise(rng);
  }
  return make_graph(n, pairs, std::move(x), std::move(labels));
}

Dataset make_synthetic_graph_set(const SyntheticGraphSetSpec& spec, std::string name) {
  if (spec.n_graphs < 1 || spec.n_classes < 1 || spec.min_nodes < 1 || spec.max_nodes < spec.min_nodes) {
    throw ConfigError("synthetic graph set: invalid counts");
  }
  std::mt19937_64 rng(spec.seed);
  const auto means = class_means(spec.n_classes, spec.feature_dim, spec.class_mean_separation, rng);
  std::uniform_int_distribution<int> size_dist(spec.min_nodes, spec.max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.name = std::move(name);
  d.levels = {TaskLevel::graph};
  for (int gi = 0; gi < spec.n_graphs; ++gi) {
    const int label = gi % spec.n_classes;
    const auto n = static_cast<std::size_t>(size_dist(rng));
    const double p = std::clamp(spec.edge_p + label * spec.edge_p_step, 0.0, 1.0);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (unit(rng) < p) pairs.emplace_back(i, j);
    Matrix x(n, static_cast<std::size_t>(spec.feature_dim));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < x.cols(); ++c)
        x(i, c) = means[static_cast<std::size_t>(label)][c] + spec.noise_sd * noise(rng);
    Graph g = make_graph(n, pairs, std::move(x));
    g.graph_label = label;
    d.graphs.push_back(std::move(g));
  }
  d.validate();
  return d;
}

// ---- splits ------------------------------------------------------------------

namespace {

std::vector<Split> partition(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  const double total = f.train + f.valid + f.test;
  if (std::abs(total - 1.0) > 1e-9 || f.train < 0 || f.valid < 0 || f.test < 0) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(f.train * n)));
  const auto n_valid =
      std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(f.valid * n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Split> tags(n, Split::test);
  for (std::size_t i = 0; i < n_train; ++i) tags[order[i]] = Split::train;
  for (std::size_t i = n_train; i < n_train + n_valid; ++i) tags[order[i]] = Split::valid;
  return tags;
}

}  // namespace

Graph assign_split(Graph g, const SplitFractions& fractions, TaskLevel level, std::uint64_t seed) {
  switch (level) {
    case TaskLevel::node:
      if (!g.node_labels) throw ConfigError("node split requested on a graph without node labels");
      g.node_split = partition(g.node_count, fractions, seed);
      break;
    case TaskLevel::link:
      if (g.edges.empty()) throw ConfigError("link split requested on a graph without edges");
      g.edge_split = partition(g.edges.size(), fractions, seed);
      break;
    case TaskLevel::graph:
      throw ConfigError("graph-level splits apply to a dataset, not a single graph");
  }
  return g;
}

Graph assign_stratified_split(Graph g, const SplitFractions& fractions, std::uint64_t seed) {
  if (!g.node_labels) throw ConfigError("node split requested on a graph without node labels");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < g.node_count; ++i) by_class[(*g.node_labels)[i]].push_back(i);
  std::vector<Split> tags(g.node_count, Split::test);
  std::uint64_t stream = seed;
  for (const auto& [label, nodes] : by_class) {
    const auto part = partition(nodes.size(), fractions, stream++);
    for (std::size_t j = 0; j < nodes.size(); ++j) tags[nodes[j]] = part[j];
  }
  g.node_split = std::move(tags);
  return g;
}

Dataset assign_graph_split(Dataset d, const SplitFractions& fractions, std::uint64_t seed) {
  for (const Graph& g : d.graphs) {
    if (!g.graph_label) throw ConfigError("graph split requested on unlabelled graphs");
  }
  const auto tags = partition(d.graphs.size(), fractions, seed);
  for (std::size_t i = 0; i < d.graphs.size(); ++i) d.graphs[i].graph_split = tags[i];
  return d;
}

}  // namespace gilt
