// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gilt/feature_align.hpp"
#include "gilt/trainer.hpp"

namespace gilt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  TrainState state;
  // Alignment fitted on the training graphs, keyed "<dataset>/<graph>".
  std::vector<std::pair<std::string, PcaModel>> pca;

  bool operator==(const Checkpoint&) const = default;
};

enum class ArrayDtype : std::uint8_t { f64 = 0, f32 = 1 };

// Binary layout (little-endian):
//   "GILTCKPT", u32 version,
//   u64 dim, i32 encoder_layers, i32 icl_layers, i32 heads, u64 ffn_hidden,
//   u8 flags (1 unshared attention, 2 nonlinear encoder, 4 learnable projection),
//   i32 epoch, u64 step, u64 optimizer step count,
//   str rng_state, str config (key = value text),
//   u32 array count, then per array: str name, u8 dtype, u64 rows, u64 cols, data.
// Strings are u32 length + bytes. f64 arrays round-trip exactly; f32 is a
// smaller export. The file is written to a temporary name and renamed, and a
// JSON copy of the config is written next to it as <path>.json.
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                      ArrayDtype dtype = ArrayDtype::f64);

// Throws ParseError on a malformed or inconsistent file, IoError if missing.
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Short hex id of the parameter values, for manifests and reports.
std::string checkpoint_id(const Checkpoint& ckpt);

}  // namespace gilt
