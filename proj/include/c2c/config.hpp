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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "c2c/augment.hpp"
#include "c2c/features.hpp"
#include "c2c/model.hpp"
#include "c2c/preprocess.hpp"

namespace c2c {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr_max = 3e-4;
  double lr_min = 1e-6;
  std::size_t cycle_len_epochs = 30;
  double cycle_mult = 1.0;
  double warmup_epochs = 3.0;
  // Learning-rate multiplier for the fusion gate.
  double alpha_lr_scale = 1.0;
  double validation_fraction = 0.08;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PathsConfig {
  std::string manifest;
  std::string out_dir = ".";
  std::string checkpoint;
};

struct PipelineConfig {
  PreprocessConfig preprocess;
  FrontendConfig frontend;
  AugmentConfig augment;
  EtEncoderConfig encoder;
  ClassifierConfig classifier;
  TrainConfig train;
  PathsConfig paths;

  void validate() const;
};

// `desk`: tens of epochs, batch 8, lr 1e-3. `paper_scale`: 3900 epochs,
// batch 32, lr 3e-4.
PipelineConfig profile_config(const std::string& name);
std::vector<std::string> profile_names();

// Line-based `key = value` text with `[section]` headers; `#` starts a
// comment. Unknown sections or keys are errors.
void apply_config_text(PipelineConfig& cfg, const std::string& text);
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

// Sets one value addressed as "section.key".
void apply_override(PipelineConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

// Canonical text form; apply_config_text(format_config(c)) reproduces c.
std::string format_config(const PipelineConfig& cfg, bool include_paths = true);

// Every addressable "section.key", in canonical order.
std::vector<std::string> config_keys();

std::string fnv1a_hex(const std::string& text);

}  // namespace c2c
