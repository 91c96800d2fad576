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

#include "c2c/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bytes.hpp"
#include "c2c/audio_io.hpp"
#include "c2c/config.hpp"
#include "c2c/errors.hpp"
#include "c2c/features.hpp"
#include "c2c/model.hpp"
#include "c2c/preprocess.hpp"
#include "c2c/synth.hpp"
#include "c2c/train_eval.hpp"

namespace c2c {

namespace fs = std::filesystem;

namespace {

struct ConfigOptions {
  std::string profile = "desk";
  std::string config_file;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_config_options(CLI::App* sub, ConfigOptions& o) {
  sub->add_option("--profile", o.profile, "Base profile (desk, paper_scale)")
      ->capture_default_str();
  sub->add_option("--config", o.config_file, "Config file with [section] key = value lines")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "Override one value, e.g. --set train.epochs=5");
  o.seed_opt = sub->add_option("--seed", o.seed, "Random seed (default: $C2C_SEED, then config)");
}

// Precedence, lowest first: profile, C2C_SEED, config file, --set, --seed.
PipelineConfig resolve_config(const ConfigOptions& o) {
  PipelineConfig cfg = profile_config(o.profile);
  if (const char* env = std::getenv("C2C_SEED"); env != nullptr && *env != '\0')
    apply_override(cfg, "train.seed", env);
  if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed_opt->count() > 0) cfg.train.seed = o.seed;
  cfg.validate();
  return cfg;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct SegmentArgs {
  std::string in, out, regions;
  ConfigOptions config;
};

void run_segment(const SegmentArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a.config);
  const AudioClip clip = load_pipeline_clip(a.in);
  const PreprocessResult r = preprocess_pipeline(clip, cfg.preprocess);
  write_wav(r.clip, a.out);

  auto regions = nlohmann::ordered_json::array();
  const double rate = static_cast<double>(clip.sample_rate);
  for (const auto& reg : r.regions) {
    regions.push_back({{"start_sample", reg.start_sample},
                       {"end_sample", reg.end_sample},
                       {"start_sec", static_cast<double>(reg.start_sample) / rate},
                       {"end_sec", static_cast<double>(reg.end_sample) / rate}});
  }
  bytes::write_text(a.regions, regions.dump(2) + "\n");
  out << r.regions.size() << " region(s), " << r.clip.samples.size() << " samples written to "
      << a.out << "\n";
  if (r.no_cough_detected) out << "no cough detected; wrote the peak-normalized clip\n";
}

struct FeaturizeArgs {
  std::string in, out, kind = "log_mel";
  bool preprocess = false;
  ConfigOptions config;
};

void run_featurize(const FeaturizeArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a.config);
  const FeatureKind kind = parse_feature_kind(a.kind);
  AudioClip clip = load_pipeline_clip(a.in);
  if (a.preprocess) clip = preprocess_pipeline(clip, cfg.preprocess).clip;
  const FeatureMatrix f = compute_features(clip, cfg.frontend, kind);
  write_features(f, a.out);
  out << f.frames << " x " << f.bins << " " << feature_kind_name(kind) << " features written to "
      << a.out << "\n";
}

struct SynthArgs {
  std::string out_dir;
  SynthSpec spec;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_synth(SynthArgs a, std::ostream& out) {
  if (a.seed_opt->count() > 0) {
    a.spec.seed = a.seed;
  } else if (const char* env = std::getenv("C2C_SEED"); env != nullptr && *env != '\0') {
    a.spec.seed = std::stoull(env);
  }
  const SynthCorpus corpus = generate_corpus(a.spec, a.out_dir);
  out << corpus.truths.size() << " clips written; manifest " << corpus.manifest.string()
      << ", truth " << corpus.truth_file.string() << "\n";
}

struct TrainArgs {
  std::string manifest, out_dir = ".", scenario = "C2C";
  bool quiet = false;
  ConfigOptions config;
};

void run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg = resolve_config(a.config);
  const Scenario scenario = parse_scenario(a.scenario);
  const auto entries = load_manifest(a.manifest);
  const auto split = split_dataset(entries, cfg.train.validation_fraction, cfg.train.seed);
  ProgressFn progress;
  if (!a.quiet) {
    progress = [&](const TrainProgress& p) {
      err << "epoch " << p.epoch + 1 << "/" << cfg.train.epochs << " loss "
          << fixed(p.mean_loss, 4) << " lr " << p.lr;
      if (scenario_arms(scenario).layout == ModelLayout::kFused)
        err << " alpha " << fixed(p.alpha, 4);
      err << "\n";
    };
  }
  const TrainResult result = train(split, fs::path(a.manifest).parent_path(), scenario, cfg,
                                   progress);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const std::string stem = scenario_name(scenario);
  save_checkpoint(result.model, dir / (stem + ".ckpt"));
  bytes::write_text(dir / (stem + "_report.json"), report_to_json(result.report));
  cfg.paths.manifest = a.manifest;
  cfg.paths.out_dir = a.out_dir;
  cfg.paths.checkpoint = (dir / (stem + ".ckpt")).string();
  bytes::write_text(dir / (stem + ".cfg"), format_config(cfg));
  out << stem << " validation ROC-AUC " << fixed(result.report.roc_auc, 4) << " (n_pos "
      << result.report.n_pos << ", n_neg " << result.report.n_neg << ")";
  if (result.report.alpha) out << " alpha " << fixed(*result.report.alpha, 4);
  out << "\n";
}

struct EvalArgs {
  std::string manifest, checkpoint, scenario = "C2C", split = "validation", out_file;
  ConfigOptions config;
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a.config);
  const Scenario scenario = parse_scenario(a.scenario);
  const auto entries = load_manifest(a.manifest);
  std::vector<ManifestEntry> chosen;
  if (a.split == "all") {
    chosen = entries;
  } else {
    auto split = split_dataset(entries, cfg.train.validation_fraction, cfg.train.seed);
    chosen = a.split == "train" ? split.train : split.validation;
  }
  const auto examples = build_examples(chosen, scenario, fs::path(a.manifest).parent_path());
  C2CModel model = make_model(cfg, scenario, 0);
  load_checkpoint(model, a.checkpoint);
  const EvalReport report = evaluate(model, examples, cfg, scenario);
  if (!a.out_file.empty()) bytes::write_text(a.out_file, report_to_json(report));
  out << scenario_name(scenario) << " " << a.split << " ROC-AUC " << fixed(report.roc_auc, 4)
      << " (n_pos " << report.n_pos << ", n_neg " << report.n_neg << ")\n";
}

struct AblateArgs {
  std::string manifest, out_dir = ".";
  std::vector<std::string> scenarios;
  ConfigOptions config;
};

void run_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = resolve_config(a.config);
  std::vector<Scenario> scenarios;
  for (const auto& s : a.scenarios) scenarios.push_back(parse_scenario(s));
  if (scenarios.empty()) scenarios = all_scenarios();
  const AblationResult result =
      run_ablation_suite(a.manifest, cfg, scenarios, [&](const std::string& line) {
        err << line << "\n";
      });

  const fs::path dir(a.out_dir);
  ensure_dir(dir / "reports");
  for (const auto& r : result.reports) {
    bytes::write_text(dir / "reports" / (std::string(scenario_name(r.scenario)) + ".json"),
                      report_to_json(r));
  }
  const auto rows = ablation_rows(result.reports);
  const std::string table = format_ablation_table(rows);
  bytes::write_text(dir / "ablation.txt", table);
  bytes::write_text(dir / "ablation.csv", format_ablation_csv(rows));
  out << table;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cough-based COVID-19 screening pipeline", "c2c"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Detect cough regions and extract them");
  segment->add_option("--in", seg.in, "Input WAV")->required()->check(CLI::ExistingFile);
  segment->add_option("--out", seg.out, "Output WAV with the concatenated regions")->required();
  segment->add_option("--regions", seg.regions, "Output JSON with region boundaries")
      ->required();
  add_config_options(segment, seg.config);

  FeaturizeArgs feat;
  auto* featurize = app.add_subcommand("featurize", "Compute a feature matrix for one clip");
  featurize->add_option("--in", feat.in, "Input WAV")->required()->check(CLI::ExistingFile);
  featurize->add_option("--out", feat.out, "Output feature file")->required();
  featurize->add_option("--kind", feat.kind, "Frontend (log_mel, raw_frame)")
      ->capture_default_str();
  featurize->add_flag("--preprocess", feat.preprocess, "Segment coughs before featurizing");
  add_config_options(featurize, feat.config);

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--out-dir", syn.out_dir, "Output directory")->required();
  synth->add_option("--n-clips", syn.spec.n_clips, "Number of clips")->capture_default_str();
  synth->add_option("--clip-sec", syn.spec.clip_sec, "Clip duration (s)")->capture_default_str();
  synth->add_option("--bursts-min", syn.spec.bursts_min, "Fewest bursts per clip")
      ->capture_default_str();
  synth->add_option("--bursts-max", syn.spec.bursts_max, "Most bursts per clip")
      ->capture_default_str();
  synth->add_option("--burst-sec-min", syn.spec.burst_sec_min, "Shortest burst (s)")
      ->capture_default_str();
  synth->add_option("--burst-sec-max", syn.spec.burst_sec_max, "Longest burst (s)")
      ->capture_default_str();
  synth->add_option("--class0-low", syn.spec.class0_low_hz, "Class 0 band lower edge (Hz)")
      ->capture_default_str();
  synth->add_option("--class0-high", syn.spec.class0_high_hz, "Class 0 band upper edge (Hz)")
      ->capture_default_str();
  synth->add_option("--class1-low", syn.spec.class1_low_hz, "Class 1 band lower edge (Hz)")
      ->capture_default_str();
  synth->add_option("--class1-high", syn.spec.class1_high_hz, "Class 1 band upper edge (Hz)")
      ->capture_default_str();
  synth->add_option("--snr-db", syn.spec.snr_db, "Burst-to-background ratio (dB)")
      ->capture_default_str();
  synth->add_option("--min-gap-sec", syn.spec.min_gap_sec, "Minimum gap between bursts (s)")
      ->capture_default_str();
  synth->add_flag("--with-breath", syn.spec.with_breath, "Also write noise-only breath clips");
  syn.seed_opt = synth->add_option("--seed", syn.seed, "Random seed (default: $C2C_SEED or 0)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one scenario and evaluate on validation");
  train_cmd->add_option("--manifest", tr.manifest, "Manifest CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--scenario", tr.scenario,
                        "C2C, D2C, B2C, no_preprocess, raw_frontend, no_augment")
      ->capture_default_str();
  train_cmd->add_option("--out-dir", tr.out_dir, "Directory for checkpoint and report")
      ->capture_default_str();
  train_cmd->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress");
  add_config_options(train_cmd, tr.config);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a manifest split");
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint written by train")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--scenario", ev.scenario, "Scenario the checkpoint was trained for")
      ->capture_default_str();
  eval_cmd->add_option("--split", ev.split, "validation, train or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"validation", "train", "all"}));
  eval_cmd->add_option("--out", ev.out_file, "Optional report JSON path");
  add_config_options(eval_cmd, ev.config);

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Train every scenario and tabulate ROC-AUC");
  ablate->add_option("--manifest", ab.manifest, "Manifest CSV")
      ->required()
      ->check(CLI::ExistingFile);
  ablate->add_option("--out-dir", ab.out_dir, "Directory for table, CSV and reports")
      ->capture_default_str();
  ablate->add_option("--scenarios", ab.scenarios, "Subset of scenarios (default: all)");
  add_config_options(ablate, ab.config);

  std::vector<const char*> argv{"c2c"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    if (args.empty()) err << app.help();
    return kExitUsage;
  }

  try {
    if (*segment) run_segment(seg, out);
    else if (*featurize) run_featurize(feat, out);
    else if (*synth) run_synth(syn, out);
    else if (*train_cmd) run_train(tr, out, err);
    else if (*eval_cmd) run_eval(ev, out);
    else if (*ablate) run_ablate(ab, out, err);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid number: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace c2c
