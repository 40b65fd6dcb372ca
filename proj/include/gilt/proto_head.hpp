// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "gilt/autodiff.hpp"

namespace gilt {

enum class PredictionSpace { class_space, full_token };

struct HeadVars {
  ad::Var scores;      // |Q| × N cosine similarities
  ad::Var probs;       // softmax(temperature · scores)
  ad::Var prototypes;  // N × width, plain class means of the support slices
  // Some query had a zero slice while every prototype was zero too; its row
  // is uniform.
  bool degenerate = false;
};

// Scores queries against class prototypes built from the contextual support
// tokens. class_space uses the last `dim` columns, full_token all of them.
HeadVars predict(ad::Var support, ad::Var query, std::span<const int> support_labels, int n_way,
                 PredictionSpace space, double temperature, std::size_t dim);

// −mean log max(p_true, 1e-12) over the queries.
ad::Var episode_loss(ad::Var probs, std::span<const int> labels);

struct EpisodeResult {
  Matrix probs;
  Matrix scores;
  std::vector<int> predicted;
  bool degenerate = false;
};

EpisodeResult to_result(const HeadVars& head);
std::string result_to_json(const EpisodeResult& r);

// Tape-free helpers for callers holding plain matrices.
EpisodeResult predict(const Matrix& support, const Matrix& query, std::span<const int> support_labels,
                      int n_way, PredictionSpace space, double temperature, std::size_t dim);
double episode_loss(const Matrix& probs, std::span<const int> labels);

}  // namespace gilt
