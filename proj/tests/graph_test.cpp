// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/graph.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "common.hpp"
#include "gilt/errors.hpp"

namespace gilt {
namespace {

using gilt::testing::scratch_dir;

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Connected components by union-find.
std::size_t component_count(const Graph& g) {
  std::vector<std::size_t> parent(g.node_count);
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : g.edges) parent[find(e.u)] = find(e.v);
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < g.node_count; ++i) roots.insert(find(i));
  return roots.size();
}

TEST(GraphTest, LoadsThreeNodePathFromEdgeList) {
  const auto dir = scratch_dir("path3");
  write_file(dir / "g.tsv", "0\t1\n1\t2\n");
  write_file(dir / "g.features.csv", "1,0\n0,1\n1,1\n");
  write_file(dir / "g.labels.csv", "0\n1\n0\n");
  const Graph g = load_graph(dir / "g.tsv", GraphFormat::edge_list);
  EXPECT_EQ(g.node_count, 3u);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges[1], (Edge{1, 2}));
  EXPECT_EQ(g.feature_dim(), 2u);
  EXPECT_EQ(*g.node_labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(g.class_count(), 2);
}

TEST(GraphTest, OutOfRangeEdgeIsAConsistencyError) {
  const auto dir = scratch_dir("oob");
  write_file(dir / "g.tsv", "0\t5\n");
  write_file(dir / "g.features.csv", "1\n2\n3\n");
  EXPECT_THROW(load_graph(dir / "g.tsv", GraphFormat::edge_list), ConsistencyError);
  const std::pair<std::int64_t, std::int64_t> bad[] = {{0, 3}};
  EXPECT_THROW(make_graph(3, bad, Matrix(3, 1)), ConsistencyError);
  const std::pair<std::int64_t, std::int64_t> neg[] = {{-1, 0}};
  EXPECT_THROW(make_graph(3, neg, Matrix(3, 1)), ConsistencyError);
}

TEST(GraphTest, NonFiniteFeatureIsRejected) {
  const auto dir = scratch_dir("nan");
  write_file(dir / "g.tsv", "0\t1\n");
  write_file(dir / "g.features.csv", "1.0\nnan\n");
  EXPECT_THROW(load_graph(dir / "g.tsv", GraphFormat::edge_list), NonFiniteError);
  Matrix x(2, 1, 0.0);
  x(1, 0) = std::numeric_limits<double>::infinity();
  const std::pair<std::int64_t, std::int64_t> e[] = {{0, 1}};
  EXPECT_THROW(make_graph(2, e, x), NonFiniteError);
}

TEST(GraphTest, MakeGraphCanonicalizesEdges) {
  const std::pair<std::int64_t, std::int64_t> pairs[] = {{2, 0}, {0, 2}, {1, 1}, {1, 0}};
  const Graph g = make_graph(3, pairs, Matrix(3, 1));
  EXPECT_EQ(g.edges, (std::vector<Edge>{{0, 1}, {0, 2}}));
}

TEST(GraphTest, SyntheticGeneratorIsDeterministic) {
  SyntheticSpec s;
  s.seed = 17;
  EXPECT_EQ(make_synthetic(s), make_synthetic(s));
  SyntheticSpec t = s;
  t.seed = 18;
  EXPECT_NE(make_synthetic(s), make_synthetic(t));
}

TEST(GraphTest, SyntheticWithoutInterEdgesOrNoiseSplitsByClass) {
  SyntheticSpec s;
  s.n_classes = 2;
  s.nodes_per_class = 50;
  s.intra_p = 0.5;
  s.inter_p = 0.0;
  s.noise_sd = 0.0;
  const Graph g = make_synthetic(s);
  const auto& y = *g.node_labels;
  for (const Edge& e : g.edges) EXPECT_EQ(y[e.u], y[e.v]);
  EXPECT_EQ(component_count(g), 2u);
  // Noise-free features collapse to one mean per class.
  for (std::size_t i = 1; i < g.node_count; ++i) {
    std::size_t first = 0;
    while (y[first] != y[i]) ++first;
    for (std::size_t c = 0; c < g.feature_dim(); ++c) EXPECT_EQ(g.features(i, c), g.features(first, c));
  }
}

TEST(GraphTest, SyntheticIntraDensityIsWithinThreeSigma) {
  SyntheticSpec s;
  s.n_classes = 2;
  s.nodes_per_class = 100;
  s.intra_p = 0.15;
  s.inter_p = 0.0;
  s.seed = 3;
  const Graph g = make_synthetic(s);
  const double pairs = 2.0 * 100 * 99 / 2;
  const double density = static_cast<double>(g.edges.size()) / pairs;
  const double sigma = std::sqrt(0.15 * 0.85 / pairs);
  EXPECT_NEAR(density, 0.15, 3 * sigma);
}

TEST(GraphTest, SplitSizesFollowFractions) {
  Graph g = gilt::testing::random_graph(100, 0.05, 3, 2, 1);
  g = assign_split(std::move(g), {0.6, 0.2, 0.2}, TaskLevel::node, 5);
  std::array<int, 3> counts{};
  for (Split s : *g.node_split) ++counts[static_cast<int>(s)];
  EXPECT_EQ(counts, (std::array<int, 3>{60, 20, 20}));

  g = assign_split(std::move(g), {1.0, 0.0, 0.0}, TaskLevel::node, 5);
  for (Split s : *g.node_split) EXPECT_EQ(s, Split::train);
}

TEST(GraphTest, SplitIsDeterministicPerSeed) {
  const Graph g = gilt::testing::random_graph(80, 0.1, 3, 2, 2);
  const auto a = assign_split(g, {}, TaskLevel::node, 9).node_split;
  const auto b = assign_split(g, {}, TaskLevel::node, 9).node_split;
  const auto c = assign_split(g, {}, TaskLevel::node, 10).node_split;
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GraphTest, EdgeSplitCoversEveryEdgeOnce) {
  const Graph g = assign_split(gilt::testing::random_graph(60, 0.2, 2, 2, 4), {0.7, 0.1, 0.2}, TaskLevel::link, 1);
  ASSERT_TRUE(g.edge_split);
  ASSERT_EQ(g.edge_split->size(), g.edges.size());
  std::array<std::size_t, 3> counts{};
  for (Split s : *g.edge_split) ++counts[static_cast<int>(s)];
  EXPECT_EQ(counts[0] + counts[1] + counts[2], g.edges.size());
}

TEST(GraphTest, BadFractionsAreRejected) {
  const Graph g = gilt::testing::random_graph(10, 0.2, 2, 2, 4);
  EXPECT_THROW(assign_split(g, {0.5, 0.2, 0.2}, TaskLevel::node, 0), ConfigError);
  EXPECT_THROW(assign_split(g, {1.2, -0.2, 0.0}, TaskLevel::node, 0), ConfigError);
  EXPECT_THROW(assign_split(g, {}, TaskLevel::graph, 0), ConfigError);
}

TEST(GraphTest, StratifiedSplitBalancesEveryClass) {
  const Graph g = assign_stratified_split(gilt::testing::random_graph(120, 0.05, 2, 4, 6), {0.5, 0.0, 0.5}, 3);
  std::map<int, std::array<int, 3>> per_class;
  for (std::size_t i = 0; i < g.node_count; ++i) ++per_class[(*g.node_labels)[i]][static_cast<int>((*g.node_split)[i])];
  ASSERT_EQ(per_class.size(), 4u);
  for (const auto& [label, c] : per_class) EXPECT_EQ(c, (std::array<int, 3>{15, 0, 15})) << label;
}

TEST(GraphTest, JsonRoundTripPreservesEverything) {
  Graph g = gilt::testing::random_graph(30, 0.2, 4, 3, 8);
  g = assign_split(std::move(g), {}, TaskLevel::node, 1);
  g = assign_split(std::move(g), {}, TaskLevel::link, 2);
  EXPECT_EQ(graph_from_json(graph_to_json(g)), g);

  const auto dir = scratch_dir("json_rt");
  write_graph_json(g, dir / "g.json");
  EXPECT_EQ(load_graph(dir / "g.json", GraphFormat::json), g);
}

TEST(GraphTest, MalformedJsonIsAParseError) {
  EXPECT_THROW(graph_from_json("{not json"), ParseError);
}

TEST(GraphTest, GraphSetHasOneLabelPerGraph) {
  SyntheticGraphSetSpec s;
  s.n_graphs = 12;
  const Dataset d = make_synthetic_graph_set(s, "set");
  EXPECT_EQ(d.graphs.size(), 12u);
  for (const Graph& g : d.graphs) {
    ASSERT_TRUE(g.graph_label);
    EXPECT_GE(g.node_count, 8u);
    EXPECT_LE(g.node_count, 16u);
  }
  const Dataset split = assign_graph_split(d, {0.5, 0.25, 0.25}, 0);
  for (const Graph& g : split.graphs) EXPECT_TRUE(g.graph_split);
}

TEST(GraphTest, RegistryRoundTripLoadsCorpus) {
  const auto dir = scratch_dir("registry");
  SyntheticSpec s;
  const Graph g = assign_split(make_synthetic(s), {}, TaskLevel::node, 0);
  write_graph_collection(std::span<const Graph>(&g, 1), dir / "a.json");
  const RegistryEntry e{"a", dir / "a.json", GraphFormat::json, {TaskLevel::node}};
  write_registry(std::span<const RegistryEntry>(&e, 1), dir / "registry.json");
  const auto entries = load_registry(dir / "registry.json");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].name, "a");
  const Corpus c = load_corpus(dir / "registry.json");
  ASSERT_EQ(c.datasets.size(), 1u);
  EXPECT_TRUE(c.supports(TaskLevel::node));
  EXPECT_FALSE(c.supports(TaskLevel::graph));
  EXPECT_EQ(c.datasets[0].graphs[0], g);
}

}  // namespace
}  // namespace gilt
