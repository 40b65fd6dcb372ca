// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/pipeline.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "common.hpp"
#include "gilt/errors.hpp"
#include "gilt/grad_check.hpp"
#include "gilt/trainer.hpp"

namespace gilt {
namespace {

Dataset node_dataset(std::uint64_t seed) {
  SyntheticSpec s;
  s.n_classes = 3;
  s.nodes_per_class = 20;
  s.feature_dim = 5;
  s.seed = seed;
  return {"syn", {assign_split(make_synthetic(s), {0.5, 0.0, 0.5}, TaskLevel::node, seed)}, {TaskLevel::node}};
}

ModelConfig small_model() {
  ModelConfig c;
  c.dim = 8;
  c.encoder_layers = 2;
  c.icl_layers = 2;
  c.heads = 2;
  c.ffn_hidden = 16;
  return c;
}

Episode permuted_support(Episode e, std::uint64_t seed) {
  std::vector<std::size_t> order(e.support.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Episode p = e;
  for (std::size_t i = 0; i < order.size(); ++i) {
    p.support[i] = e.support[order[i]];
    p.support_labels[i] = e.support_labels[order[i]];
  }
  return p;
}

TEST(PipelineTest, FullEpisodeLossPassesGradientCheck) {
  EXPECT_LT(preflight_gradient_check(1), 1e-4);
}

TEST(PipelineTest, ProbabilitiesIgnoreSupportOrder) {
  const Dataset d = node_dataset(1);
  const ModelParams p = init_params(small_model(), 2);
  const PreparedDataset data = prepare_dataset(d, align_spec(p.config));
  Rng rng(3);
  const Episode e = sample_node_episode(d.graphs[0], 3, 3, kAllQueries, SplitPolicy::evaluation, rng);
  const EpisodeResult a = run_episode(p, data, e);
  const EpisodeResult b = run_episode(p, data, permuted_support(e, 4));
  EXPECT_LT(max_abs_diff(a.probs, b.probs), 1e-8);
}

TEST(PipelineTest, QueriesScoredAloneMatchBatch) {
  const Dataset d = node_dataset(5);
  const ModelParams p = init_params(small_model(), 6);
  const PreparedDataset data = prepare_dataset(d, align_spec(p.config));
  Rng rng(7);
  const Episode e = sample_node_episode(d.graphs[0], 3, 2, 6, SplitPolicy::evaluation, rng);
  const EpisodeResult all = run_episode(p, data, e);
  for (std::size_t i = 0; i < e.query.size(); ++i) {
    Episode one = e;
    one.query = {e.query[i]};
    one.query_labels = {e.query_labels[i]};
    const EpisodeResult r = run_episode(p, data, one);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r.probs(0, c), all.probs(i, c), 1e-10);
  }
}

TEST(PipelineTest, QueryClassSpaceTokensAreZero) {
  const Dataset d = node_dataset(8);
  const ModelParams p = init_params(small_model(), 9);
  const PreparedDataset data = prepare_dataset(d, align_spec(p.config));
  Rng rng(10);
  const Episode e = sample_node_episode(d.graphs[0], 2, 2, 5, SplitPolicy::evaluation, rng);
  const TokenSet t = tokenize_episode(p, data, e);
  EXPECT_EQ(t.query.cols(), 16u);
  for (std::size_t i = 0; i < t.query.rows(); ++i)
    for (std::size_t c = 8; c < 16; ++c) EXPECT_EQ(std::bit_cast<std::uint64_t>(t.query(i, c)), 0u);
}

TEST(PipelineTest, AugmentationOnlyAppliesInTraining) {
  const Dataset d = node_dataset(11);
  const ModelParams p = init_params(small_model(), 12);
  const PreparedDataset data = prepare_dataset(d, align_spec(p.config));
  Rng rng(13);
  const Episode plain = sample_node_episode(d.graphs[0], 2, 2, 5, SplitPolicy::pretrain, rng);
  const Episode aug = augment(plain, 0.5, 0.5, rng);
  EXPECT_EQ(run_episode(p, data, plain).probs, run_episode(p, data, aug).probs);
  ad::Tape t1;
  ad::Tape t2;
  ForwardOptions train;
  train.train = true;
  const double l1 = forward_episode(t1, BoundParams(t1, p), data, plain, train).loss.value()(0, 0);
  const double l2 = forward_episode(t2, BoundParams(t2, p), data, aug, train).loss.value()(0, 0);
  EXPECT_NE(l1, l2);
}

TEST(PipelineTest, LinkAndGraphEpisodesRun) {
  SyntheticSpec s;
  s.n_classes = 2;
  s.nodes_per_class = 20;
  const Dataset link{"l", {assign_split(make_synthetic(s), {0.6, 0.1, 0.3}, TaskLevel::link, 0)}, {TaskLevel::link}};
  const ModelParams p = init_params(small_model(), 1);
  Rng rng(2);
  const Episode le = sample_link_episode(link.graphs[0], 3, 16, SplitPolicy::evaluation, rng);
  const EpisodeResult lr = run_episode(p, prepare_dataset(link, align_spec(p.config)), le);
  EXPECT_EQ(lr.probs.rows(), le.query.size());
  EXPECT_EQ(lr.probs.cols(), 2u);

  SyntheticGraphSetSpec gs;
  gs.n_graphs = 20;
  const Dataset graphs = assign_graph_split(make_synthetic_graph_set(gs, "g"), {0.5, 0.0, 0.5}, 0);
  const Episode ge = sample_graph_episode(graphs, 2, 2, 6, SplitPolicy::evaluation, rng);
  const EpisodeResult gr = run_episode(p, prepare_dataset(graphs, align_spec(p.config)), ge);
  EXPECT_EQ(gr.probs.rows(), ge.query.size());
  EXPECT_TRUE(all_finite(gr.probs));
}

TEST(PipelineTest, AblationDepthsAreBounded) {
  const Dataset d = node_dataset(14);
  const ModelParams p = init_params(small_model(), 15);
  const PreparedDataset data = prepare_dataset(d, align_spec(p.config));
  Rng rng(16);
  const Episode e = sample_node_episode(d.graphs[0], 2, 2, 5, SplitPolicy::evaluation, rng);
  ForwardOptions o;
  o.icl_layers = 0;
  o.encoder_layers = 0;
  EXPECT_NO_THROW(run_episode(p, data, e, o));
  o.icl_layers = 3;
  EXPECT_THROW(run_episode(p, data, e, o), ConfigError);
}

}  // namespace
}  // namespace gilt
