// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/struct_encoder.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common.hpp"
#include "gilt/errors.hpp"

namespace gilt {
namespace {

using gilt::testing::random_graph;
using gilt::testing::random_normal;

constexpr double kEps = 1e-5;

ModelParams encoder_params(std::size_t d, int layers, EncoderVariant variant = EncoderVariant::linear) {
  ModelConfig c;
  c.dim = d;
  c.encoder_layers = layers;
  c.icl_layers = 0;
  c.heads = 1;
  c.encoder_variant = variant;
  return init_params(c, 0);
}

Matrix dense_adjacency(const Graph& g) {
  Matrix a(g.node_count, g.node_count, 0.0);
  for (std::size_t i = 0; i < g.node_count; ++i) a(i, i) = 1.0;
  for (const Edge& e : g.edges) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  std::vector<double> deg(g.node_count, 0.0);
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t j = 0; j < g.node_count; ++j) deg[i] += a(i, j);
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t j = 0; j < g.node_count; ++j) a(i, j) /= std::sqrt(deg[i] * deg[j]);
  return a;
}

Matrix dense_product(const Matrix& a, const Matrix& x) {
  Matrix y(a.rows(), x.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t c = 0; c < x.cols(); ++c) y(i, c) += a(i, k) * x(k, c);
  return y;
}

Matrix standardize_rows(Matrix x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double m = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) m += x(i, c);
    m /= static_cast<double>(x.cols());
    double v = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) v += (x(i, c) - m) * (x(i, c) - m);
    v /= static_cast<double>(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) x(i, c) = (x(i, c) - m) / std::sqrt(v + kEps);
  }
  return x;
}

Graph path3(std::size_t d) {
  const std::pair<std::int64_t, std::int64_t> e[] = {{0, 1}, {1, 2}};
  return make_graph(3, e, random_normal(3, d, 1));
}

TEST(StructEncoderTest, SingleEdgeGraphIsAllHalves) {
  const std::pair<std::int64_t, std::int64_t> e[] = {{0, 1}};
  const SparseMatrix a = normalize_adjacency(make_graph(2, e, Matrix(2, 1)));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(a.at(i, j), 0.5);
}

TEST(StructEncoderTest, IsolatedNodeKeepsUnitSelfLoop) {
  const SparseMatrix a = normalize_adjacency(make_graph(1, {}, Matrix(1, 1)));
  EXPECT_EQ(a.to_dense(), Matrix(1, 1, 1.0));
}

TEST(StructEncoderTest, PathGraphOffDiagonal) {
  const SparseMatrix a = normalize_adjacency(path3(1));
  EXPECT_NEAR(a.at(0, 1), 1.0 / std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(a.at(1, 1), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(a.at(0, 2), 0.0);
}

TEST(StructEncoderTest, AdjacencyIsSymmetricWithEntriesInUnitInterval) {
  const Graph g = random_graph(30, 0.2, 1, 2, 3);
  const SparseMatrix a = normalize_adjacency(g);
  EXPECT_LT(max_abs_diff(a.to_dense(), transpose(a.to_dense())), 1e-15);
  for (double v : a.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_LT(max_abs_diff(a.to_dense(), dense_adjacency(g)), 1e-15);
}

TEST(StructEncoderTest, ZeroLayersIsIdentity) {
  const Graph g = random_graph(20, 0.2, 4, 2, 4);
  const ModelParams p = encoder_params(4, 3);
  EXPECT_EQ(encode(g.features, normalize_adjacency(g), p, 0), g.features);
}

TEST(StructEncoderTest, CompleteGraphWithIdenticalRows) {
  std::vector<std::pair<std::int64_t, std::int64_t>> e;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) e.emplace_back(i, j);
  Matrix x(5, 4);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 4; ++c) x(i, c) = static_cast<double>(c * c) - 1.5;
  const Graph g = make_graph(5, e, x);
  const Matrix h = encode(g.features, normalize_adjacency(g), encoder_params(4, 1), 1);
  for (std::size_t i = 1; i < 5; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(h(i, c), h(0, c), 1e-12);
  double m = 0;
  double v = 0;
  for (std::size_t c = 0; c < 4; ++c) m += h(0, c) / 4.0;
  for (std::size_t c = 0; c < 4; ++c) v += (h(0, c) - m) * (h(0, c) - m) / 4.0;
  EXPECT_NEAR(m, 0.0, 1e-7);
  EXPECT_NEAR(v, 1.0, 1e-4);  // ε in the denominator shifts the variance by O(ε)
}

TEST(StructEncoderTest, PathGraphMatchesDenseOracle) {
  const Graph g = path3(2);
  Matrix x = Matrix::from_rows({{1.0, -2.0}, {0.5, 3.0}, {-1.0, 0.25}});
  const Matrix h = encode(x, normalize_adjacency(g), encoder_params(2, 1), 1);
  const Matrix expected = standardize_rows(dense_product(dense_adjacency(g), x));
  EXPECT_LT(max_abs_diff(h, expected), 1e-12);
}

TEST(StructEncoderTest, LayerNormOutputRowsAreStandardized) {
  const Graph g = random_graph(40, 0.1, 8, 2, 9);
  const Matrix a = dense_adjacency(g);
  const Matrix h = encode(g.features, normalize_adjacency(g), encoder_params(8, 3), 3);
  const Matrix oracle = standardize_rows(dense_product(a, standardize_rows(dense_product(a, standardize_rows(dense_product(a, g.features))))));
  EXPECT_LT(max_abs_diff(h, oracle), 1e-10);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double m = 0;
    for (std::size_t c = 0; c < 8; ++c) m += h(i, c) / 8.0;
    double v = 0;
    for (std::size_t c = 0; c < 8; ++c) v += (h(i, c) - m) * (h(i, c) - m) / 8.0;
    EXPECT_LT(std::abs(m), 1e-7);
    // ε in the denominator pulls the variance slightly below 1.
    EXPECT_GT(v, 0.9);
    EXPECT_LE(v, 1.0 + 1e-6);
  }
}

TEST(StructEncoderTest, PermutationEquivariance) {
  const Graph g = random_graph(25, 0.2, 6, 3, 11);
  std::vector<std::size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  // perm[i] is the new index of old node i.
  std::vector<std::pair<std::int64_t, std::int64_t>> e;
  for (const Edge& ed : g.edges) e.emplace_back(perm[ed.u], perm[ed.v]);
  Matrix px(25, 6);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t c = 0; c < 6; ++c) px(perm[i], c) = g.features(i, c);
  const Graph pg = make_graph(25, e, px);
  const ModelParams p = encoder_params(6, 3);
  const Matrix h = encode(g.features, normalize_adjacency(g), p, 3);
  const Matrix ph = encode(pg.features, normalize_adjacency(pg), p, 3);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(ph(perm[i], c), h(i, c), 1e-10);
}

TEST(StructEncoderTest, SparseAggregationMatchesDense) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Graph g = random_graph(10 + 10 * s, 0.15, 5, 2, s);
    const Matrix sparse = encode(g.features, normalize_adjacency(g), encoder_params(5, 1), 1);
    const Matrix dense = standardize_rows(dense_product(dense_adjacency(g), g.features));
    EXPECT_LT(max_abs_diff(sparse, dense), 1e-12);
  }
}

TEST(StructEncoderTest, LayersHaveNoResidualConnection) {
  const Graph g = path3(2);
  const Matrix x = Matrix::from_rows({{1.0, -2.0}, {0.5, 3.0}, {-1.0, 0.25}});
  const Matrix a = dense_adjacency(g);
  const Matrix h = encode(x, normalize_adjacency(g), encoder_params(2, 2), 2);
  const Matrix plain = standardize_rows(dense_product(a, standardize_rows(dense_product(a, x))));
  Matrix h1 = standardize_rows(dense_product(a, x));
  for (std::size_t k = 0; k < h1.size(); ++k) h1.data()[k] += x.data()[k];
  Matrix residual = standardize_rows(dense_product(a, h1));
  for (std::size_t k = 0; k < residual.size(); ++k) residual.data()[k] += h1.data()[k];
  EXPECT_LT(max_abs_diff(h, plain), 1e-12);
  EXPECT_GT(max_abs_diff(h, residual), 0.1);
}

TEST(StructEncoderTest, NonlinearVariantWithIdentityWeightIsReluThenNorm) {
  const Graph g = path3(3);
  const Matrix x = random_normal(3, 3, 5);
  const Matrix h = encode(x, normalize_adjacency(g), encoder_params(3, 1, EncoderVariant::nonlinear), 1);
  Matrix ax = dense_product(dense_adjacency(g), x);
  for (double& v : ax.data()) v = std::max(v, 0.0);
  EXPECT_LT(max_abs_diff(h, standardize_rows(ax)), 1e-12);
}

TEST(StructEncoderTest, WidthMismatchIsRejected) {
  const Graph g = path3(3);
  EXPECT_THROW(encode(g.features, normalize_adjacency(g), encoder_params(4, 1), 1), ShapeError);
}

}  // namespace
}  // namespace gilt
