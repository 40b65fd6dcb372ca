// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gilt/trainer.hpp"

// Flat `key = value` configuration text. Lines starting with '#' are
// comments. Every file carries `schema_version = 1`.
namespace gilt {

inline constexpr int kConfigSchemaVersion = 1;

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);

// Sets one field. Unknown keys and malformed values throw ConfigError naming
// the key.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);

// Applies every pair on top of `base`. schema_version must be present and
// equal to kConfigSchemaVersion.
TrainConfig apply_key_values(const KeyValues& kv, TrainConfig base);

// Every field, one per line, schema_version first. Parsing the output with
// apply_key_values reproduces the config exactly.
std::string to_key_value_text(const TrainConfig& cfg);
std::string to_json(const TrainConfig& cfg);

// Names accepted by apply_setting, in output order.
std::vector<std::string> config_keys();

}  // namespace gilt
