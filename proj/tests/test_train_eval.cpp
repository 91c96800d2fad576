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

#include <cmath>
#include <numbers>

#include "c2c/errors.hpp"
#include "c2c/rng.hpp"
#include "c2c/synth.hpp"
#include "c2c/train_eval.hpp"
#include "test_util.hpp"

using namespace c2c;

namespace {

double pairwise_auc(const std::vector<ScoredSample>& s) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& p : s) {
    if (p.label != 1) continue;
    for (const auto& n : s) {
      if (n.label != 0) continue;
      pairs += 1.0;
      wins += p.score > n.score ? 1.0 : p.score == n.score ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

std::vector<ScoredSample> random_scores(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = std::to_string(i);
    out[i].label = static_cast<int>(rng.uniform_int(0, 1));
    out[i].score = std::round(rng.uniform(0.0, 1.0) * 20.0) / 20.0;
  }
  out[0].label = 0;
  out[1].label = 1;
  return out;
}

// A small, fast pipeline over 1-second synthetic clips.
PipelineConfig tiny_config() {
  auto cfg = profile_config("desk");
  cfg.encoder.channels = 8;
  cfg.encoder.blocks = 1;
  cfg.encoder.dilations = {2};
  cfg.encoder.se_bottleneck = 4;
  cfg.encoder.attn_hidden = 4;
  cfg.encoder.embed_dim = 6;
  cfg.classifier.hidden_dim = 4;
  cfg.augment.segment_sec = 1.0;
  cfg.augment.max_shift_sec = 0.25;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 4;
  cfg.train.cycle_len_epochs = 2;
  cfg.train.warmup_epochs = 0.5;
  cfg.train.validation_fraction = 0.25;
  return cfg;
}

SynthSpec tiny_corpus(bool with_breath) {
  SynthSpec spec;
  spec.n_clips = 12;
  spec.clip_sec = 1.0;
  spec.bursts_min = 1;
  spec.bursts_max = 1;
  spec.burst_sec_min = 0.1;
  spec.burst_sec_max = 0.2;
  spec.with_breath = with_breath;
  spec.seed = 4;
  return spec;
}

}  // namespace

TEST_CASE("roc_auc examples") {
  std::vector<ScoredSample> perfect{{"a", 1.0, 1}, {"b", 1.0, 1}, {"c", 0.0, 0}, {"d", 0.0, 0}};
  CHECK(roc_auc(perfect) == 1.0);
  std::vector<ScoredSample> ties{{"a", 0.3, 1}, {"b", 0.3, 0}, {"c", 0.3, 1}, {"d", 0.3, 0}};
  CHECK(roc_auc(ties) == 0.5);
  CHECK_THROWS_AS(roc_auc(std::vector<ScoredSample>{{"a", 0.1, 1}, {"b", 0.2, 1}}),
                  UndefinedMetricError);
  CHECK_THROWS_AS(roc_auc(std::vector<ScoredSample>{{"a", NAN, 1}, {"b", 0.2, 0}}), ValueError);
}

TEST_CASE("roc_auc matches the pairwise oracle and its invariances") {
  const auto s = random_scores(200, 1);
  CHECK(std::abs(roc_auc(s) - pairwise_auc(s)) <= 1e-12);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto base = random_scores(2 + seed * 7, seed);
    const double auc = roc_auc(base);
    CHECK(std::abs(auc - pairwise_auc(base)) <= 1e-12);

    auto exp_mapped = base;
    auto affine = base;
    auto flipped = base;
    for (auto& x : exp_mapped) x.score = std::exp(x.score);
    for (auto& x : affine) x.score = 3.0 * x.score - 7.0;
    for (auto& x : flipped) x.label = 1 - x.label;
    CHECK(std::abs(roc_auc(exp_mapped) - auc) <= 1e-12);
    CHECK(std::abs(roc_auc(affine) - auc) <= 1e-12);
    CHECK(std::abs(roc_auc(flipped) - (1.0 - auc)) <= 1e-12);
  }
}

TEST_CASE("lr_schedule") {
  TrainConfig cfg;
  cfg.lr_max = 1e-3;
  cfg.lr_min = 1e-6;
  cfg.cycle_len_epochs = 30;
  cfg.warmup_epochs = 3.0;
  CHECK(lr_schedule(0.0, cfg) == cfg.lr_min);
  CHECK(lr_schedule(3.0, cfg) == cfg.lr_max);
  CHECK(lr_schedule(16.5, cfg) == doctest::Approx(cfg.lr_min + (cfg.lr_max - cfg.lr_min) / 2));
  CHECK(lr_schedule(30.0 - 1e-12, cfg) == doctest::Approx(cfg.lr_min).epsilon(1e-6));
  CHECK(lr_schedule(30.0, cfg) == cfg.lr_min);  // restart
  CHECK(lr_schedule(33.0, cfg) == cfg.lr_max);

  // Continuity inside a cycle.
  double prev = lr_schedule(0.0, cfg);
  for (double e = 0.001; e < 29.999; e += 0.001) {
    const double v = lr_schedule(e, cfg);
    CHECK(std::abs(v - prev) < 1e-5);
    CHECK(v >= cfg.lr_min);
    CHECK(v <= cfg.lr_max);
    prev = v;
  }

  cfg.cycle_mult = 2.0;
  CHECK(lr_schedule(30.0, cfg) == cfg.lr_min);
  CHECK(lr_schedule(33.0, cfg) == cfg.lr_max);
  CHECK(lr_schedule(90.0, cfg) == cfg.lr_min);  // second cycle has length 60
  CHECK(lr_schedule(33.0 + 28.5, cfg) == doctest::Approx(cfg.lr_min + (cfg.lr_max - cfg.lr_min) / 2));
}

TEST_CASE("adam_step") {
  SUBCASE("first step is lr / (1 + eps)") {
    auto p = Tensor::parameter({1}, {0.0});
    p.mutable_grad()[0] = 1.0;
    std::vector<Tensor> ps{p};
    AdamState st;
    adam_step(ps, st, 0.1);
    CHECK(p[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-15));
  }
  SUBCASE("zero gradients leave parameters exactly unchanged") {
    auto p = Tensor::parameter({3}, {1.5, -2.0, 0.25});
    const auto before = std::vector<double>(p.values().begin(), p.values().end());
    p.zero_grad();
    std::vector<Tensor> ps{p};
    AdamState st;
    for (int i = 0; i < 3; ++i) adam_step(ps, st, 0.1);
    CHECK(std::vector<double>(p.values().begin(), p.values().end()) == before);
  }
  SUBCASE("ten steps on theta^2 match a scalar re-implementation") {
    auto p = Tensor::parameter({1}, {1.0});
    std::vector<Tensor> ps{p};
    AdamState st;
    double theta = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 10; ++t) {
      p.zero_grad();
      ag::square(ag::sum(p)).backward();
      adam_step(ps, st, 0.1);

      const double g = 2.0 * theta;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mh = m / (1.0 - std::pow(0.9, t));
      const double vh = v / (1.0 - std::pow(0.999, t));
      theta -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(std::abs(p[0] - theta) <= 1e-12);
    }
  }
}

TEST_CASE("bce_loss") {
  CHECK(bce_loss(Tensor::scalar(0.5), 1).item() == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(Tensor::scalar(1.0 - 1e-7), 1).item() == doctest::Approx(1e-7).epsilon(1e-3));
  CHECK(std::isfinite(bce_loss(Tensor::scalar(1.0), 0).item()));
  CHECK(std::isfinite(bce_loss(Tensor::scalar(0.0), 1).item()));

  auto p = Tensor::scalar(0.8, true);
  bce_loss(p, 1).backward();
  const double h = 1e-6;
  const double fd = (bce_loss(Tensor::scalar(0.8 + h), 1).item() -
                     bce_loss(Tensor::scalar(0.8 - h), 1).item()) / (2 * h);
  CHECK(p.grad()[0] == doctest::Approx(-1.25));
  CHECK(std::abs(p.grad()[0] - fd) < 1e-5);
  CHECK_THROWS_AS(bce_loss(Tensor::scalar(0.5), 2), ValueError);
}

TEST_CASE("performance variation and ablation formatting") {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", performance_variation(0.5, 0.781));
  CHECK(std::string(buf) == "-35.98");
  CHECK(performance_variation(0.781, 0.781) == 0.0);

  std::vector<EvalReport> reports(4);
  reports[0].scenario = Scenario::kNoPreprocess;
  reports[0].roc_auc = 0.5;
  reports[1].scenario = Scenario::kC2C;
  reports[1].roc_auc = 0.781;
  reports[2].scenario = Scenario::kRawFrontend;
  reports[2].roc_auc = 0.6;
  reports[3].scenario = Scenario::kNoAugment;
  reports[3].roc_auc = 0.7;
  const auto rows = ablation_rows(reports);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].scenario == Scenario::kC2C);
  CHECK(rows[1].scenario == Scenario::kNoAugment);
  CHECK(rows[2].scenario == Scenario::kRawFrontend);
  CHECK(rows[3].scenario == Scenario::kNoPreprocess);
  const auto table = format_ablation_table(rows);
  CHECK(table.find("Performance variation (%)") != std::string::npos);
  CHECK(table.find("-35.98") != std::string::npos);
  const auto csv = format_ablation_csv(rows);
  CHECK(csv.rfind("scenario,roc_auc,variation_pct\nC2C,0.7810,0.00\n", 0) == 0);
  CHECK(csv.find("no_preprocess,0.5000,-35.98") != std::string::npos);
  CHECK_THROWS_AS(ablation_rows({reports[0]}), ConfigError);
}

TEST_CASE("scenario names and eval report JSON") {
  for (auto s : all_scenarios()) CHECK(parse_scenario(scenario_name(s)) == s);
  CHECK(all_scenarios().size() == 6);
  CHECK_THROWS_AS(parse_scenario("C3C"), ConfigError);

  EvalReport r;
  r.scenario = Scenario::kB2C;
  r.roc_auc = 0.875;
  r.n_pos = 1;
  r.n_neg = 1;
  r.config_fingerprint = "abc";
  r.alpha = 0.93;
  r.scores = {{"x.wav", 0.25, 0}, {"y.wav", 0.75, 1}};
  const auto back = report_from_json(report_to_json(r));
  CHECK(back.scenario == r.scenario);
  CHECK(back.roc_auc == r.roc_auc);
  CHECK(back.alpha == r.alpha);
  CHECK(back.scores.size() == 2);
  CHECK(back.scores[1].id == "y.wav");
  CHECK(back.scores[1].score == 0.75);
  CHECK_THROWS_AS(report_from_json("{"), ParseError);
}

TEST_CASE("build_examples per scenario") {
  const std::vector<ManifestEntry> entries{{"c1.wav", 1, Modality::kCough, "a"},
                                           {"b1.wav", 1, Modality::kBreath, "a"},
                                           {"c2.wav", 0, Modality::kCough, "b"},
                                           {"/abs/c3.wav", 0, Modality::kCough, "c"}};
  const auto cough = build_examples(entries, Scenario::kC2C, "/data");
  REQUIRE(cough.size() == 3);
  CHECK(cough[0].primary == "/data/c1.wav");
  CHECK(cough[2].primary == "/abs/c3.wav");
  CHECK(build_examples(entries, Scenario::kD2C, "/data").size() == 1);
  const auto fused = build_examples(entries, Scenario::kB2C, "/data");
  REQUIRE(fused.size() == 1);
  CHECK(fused[0].breath == "/data/b1.wav");

  const std::vector<ManifestEntry> cough_only{{"c1.wav", 1, Modality::kCough, "a"}};
  CHECK_THROWS_AS(build_examples(cough_only, Scenario::kD2C, "."), ScenarioUnavailable);
  CHECK_THROWS_AS(build_examples(cough_only, Scenario::kB2C, "."), ScenarioUnavailable);
}

TEST_CASE("train is deterministic and rejects an empty training set") {
  testing::TempDir dir("train");
  const auto corpus = generate_corpus(tiny_corpus(true), dir.path());
  const auto cfg = tiny_config();
  const auto split = split_dataset(load_manifest(corpus.manifest), 0.25, 0);

  for (auto scenario : {Scenario::kC2C, Scenario::kB2C, Scenario::kRawFrontend}) {
    const auto a = train(split, dir.path(), scenario, cfg);
    const auto b = train(split, dir.path(), scenario, cfg);
    REQUIRE(a.report.scores.size() == b.report.scores.size());
    for (std::size_t i = 0; i < a.report.scores.size(); ++i)
      CHECK(a.report.scores[i].score == b.report.scores[i].score);
    CHECK(a.epoch_losses == b.epoch_losses);
    CHECK(a.report.config_fingerprint == config_fingerprint(cfg, scenario));
    CHECK(a.report.alpha.has_value() == (scenario == Scenario::kB2C));
  }

  DatasetSplit empty;
  empty.validation = split.validation;
  CHECK_THROWS_AS(train(empty, dir.path(), Scenario::kC2C, cfg), ConfigError);
}

TEST_CASE("ablation suite skips scenarios the manifest cannot serve") {
  testing::TempDir dir("ablate");
  const auto corpus = generate_corpus(tiny_corpus(false), dir.path());
  auto cfg = tiny_config();
  cfg.train.epochs = 1;
  std::vector<std::string> log;
  const auto result = run_ablation_suite(corpus.manifest, cfg, all_scenarios(),
                                         [&](const std::string& l) { log.push_back(l); });
  CHECK(result.reports.size() == 4);
  CHECK(result.skipped == std::vector<std::string>{"D2C", "B2C"});
  bool warned = false;
  for (const auto& l : log) warned = warned || l.find("warning") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("loss on one repeated example decreases for 20 steps") {
  testing::TempDir dir("descent");
  SynthSpec spec;
  spec.n_clips = 2;
  spec.seed = 8;
  const auto corpus = generate_corpus(spec, dir.path());
  const auto cfg = profile_config("desk");
  const auto examples = build_examples(load_manifest(corpus.manifest), Scenario::kC2C, dir.path());
  REQUIRE(examples.size() == 2);

  ExampleLoader loader(cfg, Scenario::kC2C);
  const auto features = loader.load(examples[1], false, 0).first;
  auto model = make_model(cfg, Scenario::kC2C, 3);
  auto params = model.network_parameters();
  AdamState state;
  std::vector<double> losses;
  for (int step = 0; step < 20; ++step) {
    for (auto& p : params) p.zero_grad();
    const auto loss = bce_loss(model.forward(features), examples[1].label);
    losses.push_back(loss.item());
    loss.backward();
    adam_step(params, state, 1e-3);
  }
  for (std::size_t i = 1; i < losses.size(); ++i) {
    INFO("step ", i, ": ", losses[i - 1], " -> ", losses[i]);
    CHECK(losses[i] < losses[i - 1]);
  }
}
