// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gilt/matrix.hpp"

namespace gilt {

enum class TaskLevel : std::uint8_t { node, link, graph };
enum class Split : std::uint8_t { train, valid, test };

std::string_view to_string(TaskLevel level);
std::string_view to_string(Split split);
TaskLevel parse_task_level(std::string_view s);
Split parse_split(std::string_view s);

// Undirected edge stored once with u < v.
struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  auto operator<=>(const Edge&) const = default;
};

// Packs an unordered node pair into one key.
inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct Graph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  Matrix features;  // node_count × d_in
  std::optional<std::vector<int>> node_labels;
  std::optional<int> graph_label;
  std::optional<std::vector<Split>> node_split;
  std::optional<std::vector<Split>> edge_split;  // parallel to edges
  std::optional<Split> graph_split;              // set inside graph-level datasets

  std::size_t feature_dim() const noexcept { return features.cols(); }
  // Number of distinct node classes (max label + 1), 0 without labels.
  int class_count() const;
  // Throws ConsistencyError / NonFiniteError when an invariant is broken.
  void validate() const;

  bool operator==(const Graph&) const = default;
};

// Builds a validated graph from raw pairs: directed pairs are symmetrized,
// duplicates merged, self-loops dropped.
Graph make_graph(std::size_t node_count, std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                 Matrix features, std::optional<std::vector<int>> labels = std::nullopt);

// A named group of graphs plus the task levels it is annotated for. Node and
// link datasets hold one graph; graph-level datasets hold many labelled
// graphs.
struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<TaskLevel> levels;

  bool supports(TaskLevel level) const;
  void validate() const;
};

struct Corpus {
  std::vector<Dataset> datasets;

  bool supports(TaskLevel level) const;
  void validate() const;
};

// ---- file formats ----------------------------------------------------------

enum class GraphFormat { edge_list, json };
GraphFormat parse_graph_format(std::string_view s);

// edge_list: `path` is a TSV of "src<TAB>dst" pairs. Features are read from
// `<stem>.features.csv` next to it (one row per node) and labels, if present,
// from `<stem>.labels.csv` (one integer per line).
// json: {"nodes": n, "edges": [[s,d],...], "features": [[...]], "labels": [...]}
// plus the optional keys written by write_graph_json.
Graph load_graph(const std::filesystem::path& path, GraphFormat format);

std::string graph_to_json(const Graph& g);
Graph graph_from_json(std::string_view text);
void write_graph_json(const Graph& g, const std::filesystem::path& path);

// A JSON file holding either one graph object or {"graphs": [...]}.
std::vector<Graph> load_graph_collection(const std::filesystem::path& path);
void write_graph_collection(std::span<const Graph> graphs, const std::filesystem::path& path);

// Registry file: {"datasets": {"<name>": {"path": "...", "format": "json",
// "levels": ["node", ...]}}}. Relative paths resolve against the registry's
// directory.
struct RegistryEntry {
  std::string name;
  std::filesystem::path path;
  GraphFormat format = GraphFormat::json;
  std::vector<TaskLevel> levels;
};

std::vector<RegistryEntry> load_registry(const std::filesystem::path& path);
void write_registry(std::span<const RegistryEntry> entries, const std::filesystem::path& path);
Dataset load_dataset(const RegistryEntry& entry);
Corpus load_corpus(const std::filesystem::path& registry_path);

// ---- synthetic data --------------------------------------------------------

struct SyntheticSpec {
  int n_classes = 2;
  int nodes_per_class = 50;
  double intra_p = 0.2;
  double inter_p = 0.02;
  int feature_dim = 8;
  double class_mean_separation = 3.0;  // norm of each class mean
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Stochastic block model with Gaussian class-conditional features. Node i
// belongs to class i / nodes_per_class.
Graph make_synthetic(const SyntheticSpec& spec);

struct SyntheticGraphSetSpec {
  int n_graphs = 60;
  int n_classes = 2;
  int min_nodes = 8;
  int max_nodes = 16;
  double edge_p = 0.3;
  double edge_p_step = 0.15;  // class c uses edge_p + c·edge_p_step (clamped)
  int feature_dim = 6;
  double class_mean_separation = 1.5;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// Graph-classification dataset: each graph's label shifts both its edge
// density and its feature mean.
Dataset make_synthetic_graph_set(const SyntheticGraphSetSpec& spec, std::string name);

// ---- splits ----------------------------------------------------------------

struct SplitFractions {
  double train = 0.6;
  double valid = 0.2;
  double test = 0.2;
};

// Disjoint exhaustive partition of nodes (node level) or edges (link level).
// Edges are stored once, so an edge's tag covers both directions.
Graph assign_split(Graph g, const SplitFractions& fractions, TaskLevel level, std::uint64_t seed);

// Node split drawn per class, so every class gets its rounded share of train,
// valid and test nodes.
Graph assign_stratified_split(Graph g, const SplitFractions& fractions, std::uint64_t seed);

// Partition of the graphs of a graph-level dataset.
Dataset assign_graph_split(Dataset d, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace gilt
