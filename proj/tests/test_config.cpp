// Copyright 2026 The C2C Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>

#include "c2c/config.hpp"
#include "c2c/errors.hpp"
#include "test_util.hpp"

using namespace c2c;

TEST_CASE("profiles") {
  const auto desk = profile_config("desk");
  CHECK(desk.train.epochs == 30);
  CHECK(desk.train.batch_size == 8);
  CHECK(desk.train.lr_max == 1e-3);
  desk.validate();

  const auto full = profile_config("paper_scale");
  CHECK(full.train.epochs == 3900);
  CHECK(full.train.batch_size == 32);
  CHECK(full.train.lr_max == 3e-4);
  CHECK(full.train.validation_fraction == 0.08);
  CHECK(full.encoder.channels == 64);
  CHECK(full.encoder.blocks == 3);
  CHECK(full.encoder.embed_dim == 48);
  full.validate();

  CHECK_THROWS_AS(profile_config("huge"), ConfigError);
}

TEST_CASE("format_config round trips through apply_config_text") {
  auto cfg = profile_config("desk");
  cfg.train.seed = 12345678901234ULL;
  cfg.train.lr_max = 0.1 + 0.2;
  cfg.encoder.dilations = {1, 5, 7};
  cfg.paths.manifest = "data/m.csv";
  const auto text = format_config(cfg);

  PipelineConfig back = profile_config("paper_scale");
  apply_config_text(back, text);
  CHECK(format_config(back) == text);
  CHECK(back.train.lr_max == cfg.train.lr_max);
  CHECK(back.encoder.dilations == cfg.encoder.dilations);
  CHECK(back.paths.manifest == "data/m.csv");
  CHECK(format_config(back, false).find("manifest") == std::string::npos);
}

TEST_CASE("config text parsing") {
  PipelineConfig cfg;
  apply_config_text(cfg,
                    "# comment\n"
                    "[train]\n"
                    "epochs = 7   # trailing comment\n"
                    "\n"
                    "[augment]\r\n"
                    "time_masks=0\n");
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.augment.time_masks == 0);

  CHECK_THROWS_AS(apply_config_text(cfg, "[train]\nepochz = 3\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "epochs = 3\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "[train]\nepochs = -3\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "[train]\nlr_max = fast\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "[train\n"), ConfigError);
}

TEST_CASE("overrides and file layering") {
  testing::TempDir dir("cfg");
  {
    std::ofstream f(dir / "c.ini");
    f << "[train]\nepochs = 5\nbatch_size = 4\n";
  }
  auto cfg = profile_config("desk");
  apply_config_file(cfg, dir / "c.ini");
  CHECK(cfg.train.epochs == 5);
  apply_override(cfg, "train.epochs", "9");
  CHECK(cfg.train.epochs == 9);
  CHECK(cfg.train.batch_size == 4);
  CHECK_THROWS_AS(apply_override(cfg, "epochs", "9"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "train.nope", "9"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(cfg, dir / "missing.ini"), IoError);

  for (const auto& key : config_keys()) CHECK(key.find('.') != std::string::npos);
}

TEST_CASE("validation rejects inconsistent values") {
  auto cfg = profile_config("desk");
  cfg.train.warmup_epochs = 40;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = profile_config("desk");
  cfg.encoder.dilations = {2, 3};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = profile_config("desk");
  cfg.preprocess.onset_threshold = 0.05;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("fnv1a_hex") {
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
