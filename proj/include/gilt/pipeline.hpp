// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "gilt/episode.hpp"
#include "gilt/feature_align.hpp"
#include "gilt/icl_transformer.hpp"
#include "gilt/model.hpp"
#include "gilt/proto_head.hpp"
#include "gilt/tokenizer.hpp"

// Wires alignment, encoding, tokenization, the transformer and the head into
// one differentiable episode computation.
namespace gilt {

AlignSpec align_spec(const ModelConfig& config);

// Per-graph state that does not depend on the episode.
struct PreparedGraph {
  const Graph* graph = nullptr;
  AlignedFeatures aligned;
  std::shared_ptr<const SparseMatrix> adjacency;
};

PreparedGraph prepare_graph(const Graph& g, const AlignSpec& spec);

// Views of a dataset's graphs. The dataset must outlive it.
struct PreparedDataset {
  const Dataset* dataset = nullptr;
  std::vector<PreparedGraph> graphs;
};

PreparedDataset prepare_dataset(const Dataset& d, const AlignSpec& spec);

struct ForwardOptions {
  bool train = false;  // enables model dropout and episode augmentation
  int encoder_layers = -1;  // -1 uses the configured depth
  int icl_layers = -1;
  PredictionSpace space = PredictionSpace::class_space;
  std::uint64_t dropout_seed = 0;
};

struct EpisodeForward {
  TokenVars tokens;
  Contextual context;
  HeadVars head;
  ad::Var loss;
};

// Records the whole episode on `tape`. Node and link episodes read
// data.graphs[0]; graph episodes index data.graphs by item.
EpisodeForward forward_episode(ad::Tape& tape, const BoundParams& params, const PreparedDataset& data,
                               const Episode& e, const ForwardOptions& opts);

// Inference-mode convenience.
EpisodeResult run_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e,
                          const ForwardOptions& opts = {});

// Tokens as the transformer sees them, without running it.
TokenSet tokenize_episode(const ModelParams& params, const PreparedDataset& data, const Episode& e);

}  // namespace gilt
