// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gilt/graph.hpp"

namespace gilt {

using Rng = std::mt19937_64;

// pretrain: support and query both come from the train split, disjointly.
// evaluation: support from train, query from test.
enum class SplitPolicy { pretrain, evaluation };

// A node id, an (unordered) node pair, or a graph index within a dataset.
struct ItemRef {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  bool operator==(const ItemRef&) const = default;
};

struct Augmentation {
  double feat_drop = 0.0;
  double edge_drop = 0.0;
  std::uint64_t seed = 0;

  bool active() const noexcept { return feat_drop > 0.0 || edge_drop > 0.0; }
  bool operator==(const Augmentation&) const = default;
};

struct Episode {
  TaskLevel level = TaskLevel::node;
  SplitPolicy policy = SplitPolicy::pretrain;
  int n_way = 0;
  int k_shot = 0;
  std::vector<ItemRef> support;
  std::vector<int> support_labels;  // episode classes 0..n_way-1
  std::vector<ItemRef> query;
  std::vector<int> query_labels;
  // Original label of each episode class (node and graph tasks). Link
  // episodes use class 0 for non-edges and 1 for edges.
  std::vector<int> class_ids;
  // Edges removed from the message-passing graph for this episode.
  std::vector<Edge> hidden_edges;
  Augmentation augmentation;

  bool operator==(const Episode&) const = default;
};

// Query size meaning "every eligible item".
inline constexpr std::size_t kAllQueries = 0;

// Throws SamplingError when fewer than n_way classes have k_shot eligible
// items, or when no query can be drawn.
Episode sample_node_episode(const Graph& g, int n_way, int k_shot, std::size_t query_size,
                            SplitPolicy policy, Rng& rng);

struct LinkSamplingOptions {
  int neg_ratio = 3;
  std::size_t max_attempts_per_negative = 200;
};

// Binary episode: k_shot train edges (class 1) and neg_ratio·k_shot non-edges
// (class 0) in the support; queries mix held-out edges and fresh non-edges at
// the same ratio. query_size counts positives and negatives together.
Episode sample_link_episode(const Graph& g, int k_shot, std::size_t query_size, SplitPolicy policy,
                            Rng& rng, const LinkSamplingOptions& opts = {});

Episode sample_graph_episode(const Dataset& d, int n_way, int k_shot, std::size_t query_size,
                             SplitPolicy policy, Rng& rng);

// Records dropout probabilities and a seed; the masks themselves are
// materialized from the record when the episode is run.
Episode augment(Episode e, double feat_drop, double edge_drop, Rng& rng);

// 0/1 masks drawn from an augmentation record. Edge masks are indexed by the
// graph's edge list.
Matrix feature_keep_mask(const Augmentation& a, std::size_t rows, std::size_t cols);
std::vector<bool> edge_keep_mask(const Augmentation& a, std::size_t edge_count);

// Support ∩ query = ∅ and, for evaluation episodes, support items carry the
// train tag and query items the test tag. Throws ProtocolError otherwise.
void check_leakage(const Episode& e, const Graph& g);
void check_leakage(const Episode& e, const Dataset& d);

struct ShotSchedule {
  int start_shots = 20;
  int end_shots = 5;
  int total_epochs = 50;
};

// round_half_up(start + (end − start)·epoch/total_epochs); the last epoch is
// pinned to end_shots.
int shots_at(const ShotSchedule& s, int epoch);

std::string episode_to_json(const Episode& e);
Episode episode_from_json(std::string_view text);

}  // namespace gilt
