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

#include "c2c/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "c2c/augment.hpp"
#include "c2c/preprocess.hpp"
#include "c2c/rng.hpp"

namespace c2c {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5AFF;
constexpr std::uint64_t kExampleStream = 0xE8A1;

struct ScenarioInfo {
  Scenario scenario;
  const char* name;
};

constexpr ScenarioInfo kScenarios[] = {
    {Scenario::kC2C, "C2C"},
    {Scenario::kD2C, "D2C"},
    {Scenario::kB2C, "B2C"},
    {Scenario::kNoPreprocess, "no_preprocess"},
    {Scenario::kRawFrontend, "raw_frontend"},
    {Scenario::kNoAugment, "no_augment"},
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& clip) {
  const std::filesystem::path p(clip);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

const char* scenario_name(Scenario s) {
  for (const auto& info : kScenarios)
    if (info.scenario == s) return info.name;
  return "unknown";
}

Scenario parse_scenario(const std::string& text) {
  for (const auto& info : kScenarios)
    if (text == info.name) return info.scenario;
  throw ConfigError("unknown scenario '" + text +
                    "' (expected C2C, D2C, B2C, no_preprocess, raw_frontend, no_augment)");
}

std::vector<Scenario> all_scenarios() {
  std::vector<Scenario> out;
  for (const auto& info : kScenarios) out.push_back(info.scenario);
  return out;
}

ScenarioArms scenario_arms(Scenario s) {
  ScenarioArms arms;
  switch (s) {
    case Scenario::kC2C:
      break;
    case Scenario::kD2C:
      arms.primary = Modality::kBreath;
      break;
    case Scenario::kB2C:
      arms.layout = ModelLayout::kFused;
      break;
    case Scenario::kNoPreprocess:
      arms.preprocess = false;
      break;
    case Scenario::kRawFrontend:
      arms.frontend = FeatureKind::kRawFrame;
      break;
    case Scenario::kNoAugment:
      arms.augment = false;
      break;
  }
  return arms;
}

double roc_auc(std::span<const ScoredSample> samples) {
  std::size_t n_pos = 0;
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw ValueError("roc_auc: labels must be 0 or 1");
    if (!std::isfinite(s.score)) throw ValueError("roc_auc: non-finite score for " + s.id);
    n_pos += s.label == 1;
  }
  const std::size_t n_neg = samples.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("roc_auc: need at least one positive and one negative (" +
                               std::to_string(n_pos) + " positive, " +
                               std::to_string(n_neg) + " negative)");
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].score < samples[b].score;
  });

  // Sum of 1-based midranks over positives.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && samples[order[j]].score == samples[order[i]].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (samples[order[k]].label == 1) positive_rank_sum += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name(report.scenario);
  j["roc_auc"] = report.roc_auc;
  j["n_pos"] = report.n_pos;
  j["n_neg"] = report.n_neg;
  j["config_fingerprint"] = report.config_fingerprint;
  if (report.alpha) j["alpha"] = *report.alpha;
  auto scores = nlohmann::ordered_json::array();
  for (const auto& s : report.scores)
    scores.push_back({{"id", s.id}, {"score", s.score}, {"label", s.label}});
  j["scores"] = std::move(scores);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.scenario = parse_scenario(j.at("scenario").get<std::string>());
    r.roc_auc = j.at("roc_auc").get<double>();
    r.n_pos = j.at("n_pos").get<std::size_t>();
    r.n_neg = j.at("n_neg").get<std::size_t>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    if (j.contains("alpha")) r.alpha = j.at("alpha").get<double>();
    for (const auto& s : j.at("scores")) {
      r.scores.push_back({s.at("id").get<std::string>(), s.at("score").get<double>(),
                          s.at("label").get<int>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("eval report: ") + e.what());
  }
}

void adam_step(std::span<Tensor> params, AdamState& state, double lr) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ConfigError("adam_step: parameter count changed");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto grad = p.grad();
    auto value = p.mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (grad.size() != value.size() || m.size() != value.size())
      throw ConfigError("adam_step: gradient/state shape mismatch for parameter " +
                        std::to_string(i));
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

double lr_schedule(double epoch, const TrainConfig& cfg) {
  const double base = static_cast<double>(cfg.cycle_len_epochs);
  double start = 0.0;
  double len = base;
  if (cfg.cycle_mult == 1.0) {
    start = std::floor(epoch / base) * base;
  } else {
    while (epoch >= start + len) {
      start += len;
      len *= cfg.cycle_mult;
    }
  }
  const double local = epoch - start;
  const double warmup = cfg.warmup_epochs;
  const double span = cfg.lr_max - cfg.lr_min;
  if (local < warmup) return cfg.lr_min + span * local / warmup;
  const double tau = (local - warmup) / (len - warmup);
  return cfg.lr_min + 0.5 * span * (1.0 + std::cos(std::numbers::pi * tau));
}

Tensor bce_loss(const Tensor& prob, int target) {
  return ag::binary_cross_entropy(prob, target);
}

double performance_variation(double auc, double baseline_auc) {
  return 100.0 * (auc - baseline_auc) / baseline_auc;
}

std::string config_fingerprint(const PipelineConfig& cfg, Scenario scenario) {
  return fnv1a_hex(std::string("scenario = ") + scenario_name(scenario) + "\n" +
                   format_config(cfg, false));
}

std::vector<Example> build_examples(const std::vector<ManifestEntry>& entries,
                                    Scenario scenario,
                                    const std::filesystem::path& base_dir) {
  const auto arms = scenario_arms(scenario);
  std::vector<Example> out;
  if (arms.layout == ModelLayout::kSingle) {
    for (const auto& e : entries) {
      if (e.modality != arms.primary) continue;
      out.push_back({e.clip_path, e.label, resolve(base_dir, e.clip_path), {}});
    }
    if (out.empty() && !entries.empty()) {
      throw ScenarioUnavailable(std::string(scenario_name(scenario)) + ": manifest has no " +
                                modality_name(arms.primary) + " entries");
    }
    return out;
  }

  std::map<std::string, const ManifestEntry*> breath_of;
  for (const auto& e : entries) {
    if (e.modality == Modality::kBreath) breath_of.emplace(e.subject_id, &e);
  }
  for (const auto& e : entries) {
    if (e.modality != Modality::kCough) continue;
    const auto it = breath_of.find(e.subject_id);
    if (it == breath_of.end()) continue;
    out.push_back({e.clip_path, e.label, resolve(base_dir, e.clip_path),
                   resolve(base_dir, it->second->clip_path)});
  }
  if (out.empty() && !entries.empty()) {
    throw ScenarioUnavailable(std::string(scenario_name(scenario)) +
                              ": no subject has both cough and breath entries");
  }
  return out;
}

ExampleLoader::ExampleLoader(const PipelineConfig& cfg, Scenario scenario)
    : cfg_(cfg), arms_(scenario_arms(scenario)) {}

const AudioClip& ExampleLoader::prepared(const std::filesystem::path& path) {
  const std::string key = path.string();
  for (const auto& [k, clip] : cache_)
    if (k == key) return clip;
  AudioClip clip = load_pipeline_clip(path);
  if (arms_.preprocess) clip = preprocess_pipeline(clip, cfg_.preprocess).clip;
  cache_.emplace_back(key, std::move(clip));
  return cache_.back().second;
}

FeatureMatrix ExampleLoader::featurize(const std::filesystem::path& path, bool training,
                                       std::uint64_t seed) {
  const AudioClip& base = prepared(path);
  AudioClip clip = fix_length(base, cfg_.augment.segment_sec,
                              training ? CropMode::kTraining : CropMode::kEvaluation,
                              derive_seed(seed, 1));
  const bool augment = training && arms_.augment;
  if (augment) clip = random_shift(clip, cfg_.augment, derive_seed(seed, 2));
  FeatureMatrix features = compute_features(clip, cfg_.frontend, arms_.frontend);
  normalize_columns(features);
  if (augment) features = feature_mask(features, cfg_.augment, derive_seed(seed, 3));
  return features;
}

std::pair<FeatureMatrix, std::optional<FeatureMatrix>> ExampleLoader::load(
    const Example& ex, bool training, std::uint64_t seed) {
  std::pair<FeatureMatrix, std::optional<FeatureMatrix>> out;
  out.first = featurize(ex.primary, training, derive_seed(seed, 10));
  if (arms_.layout == ModelLayout::kFused)
    out.second = featurize(ex.breath, training, derive_seed(seed, 11));
  return out;
}

C2CModel make_model(const PipelineConfig& cfg, Scenario scenario, std::uint64_t seed) {
  const auto arms = scenario_arms(scenario);
  EtEncoderConfig enc = cfg.encoder;
  enc.in_dim = arms.frontend == FeatureKind::kLogMel ? cfg.frontend.mel_bins : 1;
  return C2CModel::create(arms.layout, enc, cfg.classifier, seed);
}

EvalReport evaluate(const C2CModel& model, const std::vector<Example>& examples,
                    const PipelineConfig& cfg, Scenario scenario) {
  ag::NoGradGuard no_grad;
  ExampleLoader loader(cfg, scenario);
  EvalReport report;
  report.scenario = scenario;
  report.config_fingerprint = config_fingerprint(cfg, scenario);
  for (const auto& ex : examples) {
    const auto [primary, breath] = loader.load(ex, false, 0);
    const double p = model.forward(primary, breath ? &*breath : nullptr).item();
    if (!std::isfinite(p)) throw NumericalError("evaluate: non-finite score for " + ex.id);
    report.scores.push_back({ex.id, p, ex.label});
    (ex.label == 1 ? report.n_pos : report.n_neg)++;
  }
  report.roc_auc = roc_auc(report.scores);
  if (model.layout() == ModelLayout::kFused) report.alpha = model.alpha();
  return report;
}

TrainResult train(const DatasetSplit& split, const std::filesystem::path& base_dir,
                  Scenario scenario, const PipelineConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto train_set = build_examples(split.train, scenario, base_dir);
  const auto validation_set = build_examples(split.validation, scenario, base_dir);
  if (train_set.empty()) throw ConfigError("train: empty training set");

  const std::uint64_t seed = cfg.train.seed;
  TrainResult result{make_model(cfg, scenario, derive_seed(seed, kInitStream)), {}, {}};
  C2CModel& model = result.model;
  auto network = model.network_parameters();
  auto fusion = model.fusion_parameters();
  AdamState network_state;
  AdamState fusion_state;
  ExampleLoader loader(cfg, scenario);

  const std::size_t n = train_set.size();
  const std::size_t batch = cfg.train.batch_size;
  const std::size_t steps = (n + batch - 1) / batch;
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(seed, kShuffleStream, epoch));
    shuffle_rng.shuffle(std::span(order));

    double epoch_loss = 0.0;
    double lr = cfg.train.lr_max;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * batch;
      const std::size_t end = std::min(n, begin + batch);
      lr = lr_schedule(static_cast<double>(epoch) +
                           static_cast<double>(step) / static_cast<double>(steps),
                       cfg.train);
      for (auto& p : network) p.zero_grad();
      for (auto& p : fusion) p.zero_grad();

      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t idx = order[k];
        const Example& ex = train_set[idx];
        const auto [primary, breath] =
            loader.load(ex, true, derive_seed(seed, kExampleStream, epoch * n + idx));
        const Tensor prob = model.forward(primary, breath ? &*breath : nullptr);
        const Tensor loss = bce_loss(prob, ex.label);
        if (!std::isfinite(loss.item())) {
          throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) +
                               " on " + ex.id);
        }
        epoch_loss += loss.item();
        ag::scale(loss, 1.0 / static_cast<double>(end - begin)).backward();
      }
      adam_step(network, network_state, lr);
      if (!fusion.empty()) adam_step(fusion, fusion_state, lr * cfg.train.alpha_lr_scale);
    }
    for (const auto& p : network) {
      for (double v : p.values()) {
        if (!std::isfinite(v))
          throw NumericalError("train: parameters diverged at epoch " + std::to_string(epoch));
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
    if (progress) progress({epoch, result.epoch_losses.back(), lr, model.alpha()});
  }

  result.report = evaluate(model, validation_set, cfg, scenario);
  return result;
}

AblationResult run_ablation_suite(const std::filesystem::path& manifest,
                                  const PipelineConfig& cfg,
                                  const std::vector<Scenario>& scenarios, const LogFn& log) {
  const auto entries = load_manifest(manifest);
  const auto split =
      split_dataset(entries, cfg.train.validation_fraction, cfg.train.seed);
  const auto base_dir = manifest.parent_path();
  AblationResult result;
  for (const Scenario s : scenarios) {
    try {
      if (log) log(std::string("training ") + scenario_name(s));
      auto trained = train(split, base_dir, s, cfg);
      if (log) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: ROC-AUC %.4f", scenario_name(s),
                      trained.report.roc_auc);
        log(buf);
      }
      result.reports.push_back(std::move(trained.report));
    } catch (const ScenarioUnavailable& e) {
      if (log) log(std::string("warning: skipping ") + scenario_name(s) + ": " + e.what());
      result.skipped.emplace_back(scenario_name(s));
    }
  }
  return result;
}

std::vector<AblationRow> ablation_rows(const std::vector<EvalReport>& reports) {
  const auto base = std::find_if(reports.begin(), reports.end(), [](const EvalReport& r) {
    return r.scenario == Scenario::kC2C;
  });
  if (base == reports.end()) throw ConfigError("ablation: no C2C baseline report");
  std::vector<AblationRow> rows;
  rows.push_back({Scenario::kC2C, base->roc_auc, 0.0});
  std::vector<AblationRow> rest;
  for (const auto& r : reports) {
    if (r.scenario == Scenario::kC2C) continue;
    rest.push_back({r.scenario, r.roc_auc, performance_variation(r.roc_auc, base->roc_auc)});
  }
  std::stable_sort(rest.begin(), rest.end(), [](const AblationRow& a, const AblationRow& b) {
    return a.roc_auc > b.roc_auc;
  });
  rows.insert(rows.end(), rest.begin(), rest.end());
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-16s %-9s %s\n", "Model", "ROC-AUC",
                "Performance variation (%)");
  out += buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i == 0) {
      std::snprintf(buf, sizeof buf, "%-16s %-9.4f %s\n", scenario_name(r.scenario),
                    r.roc_auc, "-");
    } else {
      std::snprintf(buf, sizeof buf, "%-16s %-9.4f %.2f\n", scenario_name(r.scenario),
                    r.roc_auc, r.variation_pct);
    }
    out += buf;
  }
  return out;
}

std::string format_ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "scenario,roc_auc,variation_pct\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.2f\n", scenario_name(r.scenario), r.roc_auc,
                  r.variation_pct);
    out += buf;
  }
  return out;
}

}  // namespace c2c
