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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2c/audio_io.hpp"
#include "c2c/config.hpp"
#include "c2c/errors.hpp"
#include "c2c/model.hpp"

namespace c2c {

enum class Scenario { kC2C, kD2C, kB2C, kNoPreprocess, kRawFrontend, kNoAugment };

const char* scenario_name(Scenario s);
Scenario parse_scenario(const std::string& text);
std::vector<Scenario> all_scenarios();

// Pipeline switches selected by a scenario.
struct ScenarioArms {
  bool preprocess = true;
  FeatureKind frontend = FeatureKind::kLogMel;
  bool augment = true;
  ModelLayout layout = ModelLayout::kSingle;
  Modality primary = Modality::kCough;
};

ScenarioArms scenario_arms(Scenario s);

// Raised when a manifest lacks the modality a scenario needs.
class ScenarioUnavailable : public DataError {
 public:
  using DataError::DataError;
};

struct ScoredSample {
  std::string id;
  double score = 0.0;
  int label = 0;
};

// Mann-Whitney AUC with half credit for ties, O(n log n) via midranks.
double roc_auc(std::span<const ScoredSample> samples);

struct EvalReport {
  Scenario scenario = Scenario::kC2C;
  double roc_auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::vector<ScoredSample> scores;
  std::string config_fingerprint;
  std::optional<double> alpha;
};

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

void adam_step(std::span<Tensor> params, AdamState& state, double lr);

// Cosine annealing with warm restarts and a linear warm-up at the start of
// every cycle. `epoch` may be fractional.
double lr_schedule(double epoch, const TrainConfig& cfg);

// Single-example loss as a differentiable scalar.
Tensor bce_loss(const Tensor& prob, int target);

// 100 * (auc - baseline) / baseline.
double performance_variation(double auc, double baseline_auc);

std::string config_fingerprint(const PipelineConfig& cfg, Scenario scenario);

// One training/evaluation unit: a cough clip, a breath clip, or a pair.
struct Example {
  std::string id;
  int label = 0;
  std::filesystem::path primary;
  std::filesystem::path breath;  // fused layout only
};

std::vector<Example> build_examples(const std::vector<ManifestEntry>& entries,
                                    Scenario scenario,
                                    const std::filesystem::path& base_dir);

struct TrainProgress {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  double alpha = 1.0;
};

using ProgressFn = std::function<void(const TrainProgress&)>;

struct TrainResult {
  C2CModel model;
  EvalReport report;
  std::vector<double> epoch_losses;
};

// Featurizes clips per scenario, with caching of the deterministic stages.
class ExampleLoader {
 public:
  ExampleLoader(const PipelineConfig& cfg, Scenario scenario);

  // Features for the primary (and, if fused, breath) clip. Training mode
  // draws crops, shifts and masks from `seed`.
  std::pair<FeatureMatrix, std::optional<FeatureMatrix>> load(const Example& ex,
                                                              bool training,
                                                              std::uint64_t seed);
  FeatureMatrix featurize(const std::filesystem::path& path, bool training,
                          std::uint64_t seed);

 private:
  const AudioClip& prepared(const std::filesystem::path& path);

  PipelineConfig cfg_;
  ScenarioArms arms_;
  std::vector<std::pair<std::string, AudioClip>> cache_;
};

EvalReport evaluate(const C2CModel& model, const std::vector<Example>& examples,
                    const PipelineConfig& cfg, Scenario scenario);

TrainResult train(const DatasetSplit& split, const std::filesystem::path& base_dir,
                  Scenario scenario, const PipelineConfig& cfg,
                  const ProgressFn& progress = {});

// Builds the model a scenario trains, with in_dim taken from its frontend.
C2CModel make_model(const PipelineConfig& cfg, Scenario scenario, std::uint64_t seed);

struct AblationRow {
  Scenario scenario;
  double roc_auc;
  double variation_pct;
};

struct AblationResult {
  std::vector<EvalReport> reports;
  std::vector<std::string> skipped;
};

using LogFn = std::function<void(const std::string&)>;

AblationResult run_ablation_suite(const std::filesystem::path& manifest,
                                  const PipelineConfig& cfg,
                                  const std::vector<Scenario>& scenarios = all_scenarios(),
                                  const LogFn& log = {});

// Baseline (C2C) first, the rest by descending ROC-AUC.
std::vector<AblationRow> ablation_rows(const std::vector<EvalReport>& reports);
std::string format_ablation_table(const std::vector<AblationRow>& rows);
std::string format_ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace c2c
