// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gilt/proto_head.hpp"

#include <algorithm>

#include "gilt/errors.hpp"
#include "gilt/tokenizer.hpp"
#include "json.hpp"

namespace gilt {
namespace {

bool zero_row(std::span<const double> r) {
  return std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
}

}  // namespace

HeadVars predict(ad::Var support, ad::Var query, std::span<const int> support_labels, int n_way,
                 PredictionSpace space, double temperature, std::size_t dim) {
  if (n_way < 2) throw ConfigError("prediction needs N >= 2 classes");
  if (support.cols() != query.cols()) throw ShapeError("support/query width mismatch");
  if (space == PredictionSpace::class_space && support.cols() < dim) {
    throw ShapeError("token narrower than the class space");
  }
  ad::Tape& tape = support.tape();
  ad::Var s = support;
  ad::Var q = query;
  if (space == PredictionSpace::class_space) {
    const std::size_t begin = support.cols() - dim;
    s = ad::slice_cols(support, begin, dim);
    q = ad::slice_cols(query, begin, dim);
  }
  HeadVars h;
  h.prototypes = ad::matmul(tape.constant(class_average_matrix(support_labels, n_way)), s);
  h.scores = ad::cosine_rows(q, h.prototypes);
  h.probs = ad::softmax_rows(ad::scale(h.scores, temperature));

  bool all_protos_zero = true;
  for (std::size_t c = 0; c < h.prototypes.rows(); ++c) all_protos_zero &= zero_row(h.prototypes.value().row(c));
  if (all_protos_zero) {
    for (std::size_t i = 0; i < q.rows(); ++i) h.degenerate |= zero_row(q.value().row(i));
  }
  return h;
}

ad::Var episode_loss(ad::Var probs, std::span<const int> labels) {
  if (labels.size() != probs.rows()) throw ShapeError("label count != query count");
  if (labels.empty()) throw ShapeError("loss over an empty query set");
  std::vector<std::uint32_t> cols;
  cols.reserve(labels.size());
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw ConfigError("label " + std::to_string(y) + " outside 0.." + std::to_string(probs.cols() - 1));
    }
    cols.push_back(static_cast<std::uint32_t>(y));
  }
  return ad::scale(ad::mean_all(ad::log_clamped(ad::pick(probs, cols), 1e-12)), -1.0);
}

EpisodeResult to_result(const HeadVars& head) {
  EpisodeResult r;
  r.probs = head.probs.value();
  r.scores = head.scores.value();
  r.degenerate = head.degenerate;
  for (std::size_t i = 0; i < r.probs.rows(); ++i) {
    auto row = r.probs.row(i);
    r.predicted.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return r;
}

std::string result_to_json(const EpisodeResult& r) {
  nlohmann::json probs = nlohmann::json::array();
  nlohmann::json scores = nlohmann::json::array();
  for (std::size_t i = 0; i < r.probs.rows(); ++i) {
    auto p = r.probs.row(i);
    auto s = r.scores.row(i);
    probs.push_back(std::vector<double>(p.begin(), p.end()));
    scores.push_back(std::vector<double>(s.begin(), s.end()));
  }
  return nlohmann::json{{"probs", probs}, {"scores", scores}, {"predicted", r.predicted}, {"degenerate", r.degenerate}}
      .dump();
}

EpisodeResult predict(const Matrix& support, const Matrix& query, std::span<const int> support_labels,
                      int n_way, PredictionSpace space, double temperature, std::size_t dim) {
  ad::Tape tape;
  return to_result(
      predict(tape.constant(support), tape.constant(query), support_labels, n_way, space, temperature, dim));
}

double episode_loss(const Matrix& probs, std::span<const int> labels) {
  ad::Tape tape;
  return episode_loss(tape.constant(probs), labels).value()(0, 0);
}

}  // namespace gilt
