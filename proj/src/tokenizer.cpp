// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/tokenizer.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gilt/errors.hpp"

namespace gilt {

ad::Var node_reprs(ad::Var h, std::span<const ItemRef> items) {
  std::vector<std::uint32_t> rows;
  rows.reserve(items.size());
  for (const ItemRef& r : items) {
    if (r.a >= h.rows()) throw ProtocolError("item references node " + std::to_string(r.a) + " out of range");
    rows.push_back(r.a);
  }
  return ad::gather_rows(h, rows);
}

ad::Var link_reprs(ad::Var h, std::span<const ItemRef> items) {
  std::vector<std::uint32_t> us;
  std::vector<std::uint32_t> vs;
  for (const ItemRef& r : items) {
    if (r.a >= h.rows() || r.b >= h.rows()) throw ProtocolError("link endpoint out of range");
    us.push_back(r.a);
    vs.push_back(r.b);
  }
  return ad::mul(ad::gather_rows(h, us), ad::gather_rows(h, vs));
}

ad::Var pooled_repr(ad::Var h) {
  if (h.rows() == 0) throw ProtocolError("cannot pool an empty graph");
  return ad::mean_rows(h);
}

Matrix class_average_matrix(std::span<const int> labels, int n_way) {
  for (int y : labels) {
    if (y < 0 || y >= n_way) throw ConfigError("label out of range");
  }
  Matrix avg(static_cast<std::size_t>(n_way), labels.size(), 0.0);
  for (int c = 0; c < n_way; ++c) {
    std::size_t n = 0;
    for (int y : labels) n += y == c ? 1 : 0;
    if (n == 0) throw SamplingError("class " + std::to_string(c) + " has no support items");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) avg(static_cast<std::size_t>(c), i) = 1.0 / static_cast<double>(n);
    }
  }
  return avg;
}

Matrix one_hot(std::span<const int> labels, int n_way) {
  Matrix m(labels.size(), static_cast<std::size_t>(n_way), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_way) throw ConfigError("label out of range");
    m(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return m;
}

TokenVars build_tokens(ad::Var support_reprs, ad::Var query_reprs, std::span<const int> support_labels,
                       int n_way) {
  if (support_reprs.rows() != support_labels.size()) throw ShapeError("support label count mismatch");
  if (query_reprs.cols() != support_reprs.cols()) throw ShapeError("support/query width mismatch");
  ad::Tape& tape = support_reprs.tape();
  const std::size_t d = support_reprs.cols();

  TokenVars t;
  ad::Var means = ad::matmul(tape.constant(class_average_matrix(support_labels, n_way)), support_reprs);
  t.prototypes = ad::l2_normalize_rows(means, 1e-12);
  t.degenerate_prototypes.assign(static_cast<std::size_t>(n_way), false);
  for (std::size_t c = 0; c < static_cast<std::size_t>(n_way); ++c) {
    double sq = 0.0;
    for (double v : means.value().row(c)) sq += v * v;
    t.degenerate_prototypes[c] = std::sqrt(sq) < 1e-12;
  }
  ad::Var broadcast = ad::matmul(tape.constant(one_hot(support_labels, n_way)), t.prototypes);
  const std::array<ad::Var, 2> s_parts{support_reprs, broadcast};
  t.support = ad::concat_cols(s_parts);
  const std::array<ad::Var, 2> q_parts{query_reprs, tape.constant(Matrix(query_reprs.rows(), d, 0.0))};
  t.query = ad::concat_cols(q_parts);
  return t;
}

TokenSet build_tokens(const Matrix& support_reprs, const Matrix& query_reprs,
                      std::span<const int> support_labels, int n_way) {
  ad::Tape tape;
  TokenVars v = build_tokens(tape.constant(support_reprs), tape.constant(query_reprs), support_labels, n_way);
  TokenSet t;
  t.n_way = n_way;
  t.dim = support_reprs.cols();
  t.support = v.support.value();
  t.query = v.query.value();
  t.support_classes.assign(support_labels.begin(), support_labels.end());
  t.degenerate_prototypes = v.degenerate_prototypes;
  return t;
}

namespace {

static_assert(std::endian::native == std::endian::little, "token files assume a little-endian host");

void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw ParseError("token file truncated");
  return v;
}

void put_rows(std::ofstream& out, const Matrix& m) {
  for (double v : m.data()) {
    const auto f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
}

Matrix get_rows(std::ifstream& in, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) {
    float f = 0;
    in.read(reinterpret_cast<char*>(&f), 4);
    if (!in) throw ParseError("token file truncated");
    v = f;
  }
  return m;
}

}  // namespace

void write_token_set(const TokenSet& t, const std::filesystem::path& path) {
  if (t.n_way < 1 || t.support.rows() % static_cast<std::size_t>(t.n_way) != 0) {
    throw ShapeError("support rows are not a multiple of N");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  put_u32(out, static_cast<std::uint32_t>(t.n_way));
  put_u32(out, static_cast<std::uint32_t>(t.support.rows() / static_cast<std::size_t>(t.n_way)));
  put_u32(out, static_cast<std::uint32_t>(t.query.rows()));
  put_u32(out, static_cast<std::uint32_t>(t.dim));
  put_rows(out, t.support);
  put_rows(out, t.query);
  for (int c : t.support_classes) put_u32(out, static_cast<std::uint32_t>(c));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TokenSet read_token_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  TokenSet t;
  t.n_way = static_cast<int>(get_u32(in));
  const std::size_t per_class = get_u32(in);
  const std::size_t q = get_u32(in);
  t.dim = get_u32(in);
  const std::size_t s = per_class * static_cast<std::size_t>(t.n_way);
  t.support = get_rows(in, s, 2 * t.dim);
  t.query = get_rows(in, q, 2 * t.dim);
  for (std::size_t i = 0; i < s; ++i) t.support_classes.push_back(static_cast<int>(get_u32(in)));
  return t;
}

}  // namespace gilt
