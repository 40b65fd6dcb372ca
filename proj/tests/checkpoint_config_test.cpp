// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>

#include "common.hpp"
#include "gilt/checkpoint.hpp"
#include "gilt/config.hpp"
#include "gilt/errors.hpp"

namespace gilt {
namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config = preset("desk");
  c.config.model.dim = 8;
  c.config.model.unshared_attention = true;
  c.config.corpus = "/tmp/corpus.json";
  c.state = initial_state(c.config);
  c.state.epoch = 3;
  c.state.step = 17;
  c.state.optimizer.t = 17;
  for (const auto& [name, m] : c.state.params.arrays) {
    c.state.optimizer.m[name] = gilt::testing::random_matrix(m.rows(), m.cols(), 1);
    c.state.optimizer.v[name] = gilt::testing::random_matrix(m.rows(), m.cols(), 2, 0.0, 1.0);
  }
  c.pca.push_back({"syn/0", fit_pca(gilt::testing::random_normal(30, 5, 3), 5)});
  return c;
}

TEST(CheckpointTest, F64RoundTripIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const auto path = gilt::testing::scratch_dir("ckpt") / "a.ckpt";
  write_checkpoint(c, path);
  EXPECT_EQ(read_checkpoint(path), c);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".json"));
  EXPECT_EQ(checkpoint_id(read_checkpoint(path)), checkpoint_id(c));
}

TEST(CheckpointTest, F32ExportRoundsValues) {
  const Checkpoint c = sample_checkpoint();
  const auto path = gilt::testing::scratch_dir("ckpt32") / "a.ckpt";
  write_checkpoint(c, path, ArrayDtype::f32);
  const Checkpoint r = read_checkpoint(path);
  for (const auto& [name, m] : c.state.params.arrays) {
    const Matrix& got = r.state.params.at(name);
    for (std::size_t i = 0; i < m.size(); ++i)
      EXPECT_EQ(got.data()[i], static_cast<double>(static_cast<float>(m.data()[i])));
  }
}

TEST(CheckpointTest, IdChangesWithAnyParameter) {
  Checkpoint c = sample_checkpoint();
  const std::string id = checkpoint_id(c);
  c.state.params.arrays.begin()->second.data()[0] += 1e-15;
  EXPECT_NE(checkpoint_id(c), id);
}

TEST(CheckpointTest, MissingAndCorruptFilesAreRejected) {
  const auto dir = gilt::testing::scratch_dir("ckpt_bad");
  EXPECT_THROW(read_checkpoint(dir / "missing.ckpt"), IoError);
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << "GILTCKPT garbage";
  EXPECT_THROW(read_checkpoint(dir / "bad.ckpt"), ParseError);

  const auto good = dir / "good.ckpt";
  write_checkpoint(sample_checkpoint(), good);
  const auto size = std::filesystem::file_size(good);
  std::filesystem::resize_file(good, size / 2);
  EXPECT_THROW(read_checkpoint(good), ParseError);
}

TEST(ConfigTest, KeyValueTextRoundTrips) {
  TrainConfig c = preset("desk");
  c.levels = {TaskLevel::node, TaskLevel::link};
  c.loss_weights = {0.1, 0.2, 0.3};
  c.model.align_mode = AlignMode::learnable_projection;
  c.lr_schedule = LrSchedule::cosine;
  c.optimizer.kind = OptimizerKind::adam;
  c.corpus = "x/registry.json";
  EXPECT_EQ(apply_key_values(parse_key_values(to_key_value_text(c)), TrainConfig{}), c);
}

TEST(ConfigTest, CommentsAndOverrides) {
  const KeyValues kv = parse_key_values("# comment\nschema_version = 1\n\nepochs = 7\nmodel.dim=16\n");
  const TrainConfig c = apply_key_values(kv, preset("desk"));
  EXPECT_EQ(c.epochs, 7);
  EXPECT_EQ(c.model.dim, 16u);
  EXPECT_EQ(c.model.encoder_layers, 4);
}

TEST(ConfigTest, SchemaVersionIsRequired) {
  EXPECT_THROW(apply_key_values(parse_key_values("epochs = 3\n"), TrainConfig{}), ConfigError);
  EXPECT_THROW(apply_key_values(parse_key_values("schema_version = 2\n"), TrainConfig{}), ConfigError);
}

TEST(ConfigTest, ErrorsNameTheKey) {
  TrainConfig c;
  try {
    apply_setting(c, "model.bogus", "1");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.bogus"), std::string::npos);
  }
  try {
    apply_setting(c, "epochs", "many");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("epochs"), std::string::npos);
  }
  EXPECT_THROW(parse_key_values("no equals sign\n"), ConfigError);
}

TEST(ConfigTest, EveryKeyIsSettable) {
  const std::string text = to_key_value_text(preset("paper-table6"));
  for (const std::string& k : config_keys()) EXPECT_NE(text.find(k + " ="), std::string::npos) << k;
  EXPECT_NE(to_json(preset("desk")).find("\"epochs\""), std::string::npos);
}

}  // namespace
}  // namespace gilt
