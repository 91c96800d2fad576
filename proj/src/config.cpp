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

#include "c2c/config.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "bytes.hpp"
#include "c2c/errors.hpp"

namespace c2c {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr_min >= 0.0 && lr_min < lr_max)) throw ConfigError("train: need 0 <= lr_min < lr_max");
  if (cycle_len_epochs == 0) throw ConfigError("train: cycle_len_epochs must be >= 1");
  if (!(cycle_mult >= 1.0)) throw ConfigError("train: cycle_mult must be >= 1");
  if (!(warmup_epochs >= 0.0 && warmup_epochs < static_cast<double>(cycle_len_epochs)))
    throw ConfigError("train: warmup_epochs must lie in [0, cycle_len_epochs)");
  if (!(alpha_lr_scale > 0.0)) throw ConfigError("train: alpha_lr_scale must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("train: validation_fraction must lie in (0, 1)");
}

void PipelineConfig::validate() const {
  preprocess.validate();
  frontend.validate(kPipelineRate);
  augment.validate();
  encoder.validate();
  classifier.validate();
  train.validate();
}

PipelineConfig profile_config(const std::string& name) {
  PipelineConfig cfg;
  if (name == "desk") {
    cfg.train.epochs = 30;
    cfg.train.batch_size = 8;
    cfg.train.lr_max = 1e-3;
    cfg.train.lr_min = 1e-6;
    cfg.train.cycle_len_epochs = 30;
    cfg.train.warmup_epochs = 3.0;
    cfg.train.alpha_lr_scale = 100.0;
  } else if (name == "paper_scale") {
    cfg.train.epochs = 3900;
    cfg.train.batch_size = 32;
    cfg.train.lr_max = 3e-4;
    cfg.train.lr_min = 1e-6;
    cfg.train.cycle_len_epochs = 100;
    cfg.train.warmup_epochs = 10.0;
    cfg.train.alpha_lr_scale = 1.0;
  } else {
    throw ConfigError("unknown profile '" + name + "' (expected desk or paper_scale)");
  }
  return cfg;
}

std::vector<std::string> profile_names() { return {"desk", "paper_scale"}; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigError("config " + key + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  if (text.empty() || text[0] == '-')
    throw ConfigError("config " + key + ": '" + text + "' is not a non-negative integer");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE)
    throw ConfigError("config " + key + ": '" + text + "' is not a non-negative integer");
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;

  std::string dotted() const { return section + "." + key; }
};

template <typename Member>
Field real_field(const char* section, const char* key, Member member) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [member](const PipelineConfig& c) { return fmt_double(member(c)); },
          [member, name](PipelineConfig& c, const std::string& v) {
            member(c) = parse_double(name, v);
          }};
}

template <typename Member>
Field count_field(const char* section, const char* key, Member member) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [member](const PipelineConfig& c) {
            return std::to_string(member(c));
          },
          [member, name](PipelineConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            member(c) = static_cast<T>(parse_u64(name, v));
          }};
}

template <typename Member>
Field text_field(const char* section, const char* key, Member member) {
  return {section, key,
          [member](const PipelineConfig& c) { return member(c); },
          [member](PipelineConfig& c, const std::string& v) { member(c) = v; }};
}

#define C2C_MEMBER(path) [](auto& c) -> auto& { return c.path; }

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(real_field("preprocess", "window_ms", C2C_MEMBER(preprocess.window_ms)));
    f.push_back(real_field("preprocess", "hop_ms", C2C_MEMBER(preprocess.hop_ms)));
    f.push_back(real_field("preprocess", "onset_threshold", C2C_MEMBER(preprocess.onset_threshold)));
    f.push_back(real_field("preprocess", "offset_threshold", C2C_MEMBER(preprocess.offset_threshold)));

    f.push_back(real_field("frontend", "frame_ms", C2C_MEMBER(frontend.frame_ms)));
    f.push_back(real_field("frontend", "hop_ms", C2C_MEMBER(frontend.hop_ms)));
    f.push_back(count_field("frontend", "fft_size", C2C_MEMBER(frontend.fft_size)));
    f.push_back(count_field("frontend", "mel_bins", C2C_MEMBER(frontend.mel_bins)));
    f.push_back(real_field("frontend", "f_min", C2C_MEMBER(frontend.f_min)));
    f.push_back(real_field("frontend", "f_max", C2C_MEMBER(frontend.f_max)));
    f.push_back(real_field("frontend", "log_floor", C2C_MEMBER(frontend.log_floor)));

    f.push_back(real_field("augment", "segment_sec", C2C_MEMBER(augment.segment_sec)));
    f.push_back(real_field("augment", "max_shift_sec", C2C_MEMBER(augment.max_shift_sec)));
    f.push_back(count_field("augment", "time_masks", C2C_MEMBER(augment.time_masks)));
    f.push_back(count_field("augment", "max_time_mask", C2C_MEMBER(augment.max_time_mask)));
    f.push_back(count_field("augment", "freq_masks", C2C_MEMBER(augment.freq_masks)));
    f.push_back(count_field("augment", "max_freq_mask", C2C_MEMBER(augment.max_freq_mask)));
    f.push_back(real_field("augment", "mask_value", C2C_MEMBER(augment.mask_value)));

    f.push_back(count_field("encoder", "channels", C2C_MEMBER(encoder.channels)));
    f.push_back(count_field("encoder", "blocks", C2C_MEMBER(encoder.blocks)));
    f.push_back(Field{
        "encoder", "dilations",
        [](const PipelineConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.encoder.dilations.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(c.encoder.dilations[i]);
          }
          return s;
        },
        [](PipelineConfig& c, const std::string& v) {
          std::vector<std::size_t> out;
          std::istringstream in(v);
          std::string item;
          while (std::getline(in, item, ','))
            out.push_back(static_cast<std::size_t>(parse_u64("encoder.dilations", trim(item))));
          c.encoder.dilations = out;
        }});
    f.push_back(count_field("encoder", "se_bottleneck", C2C_MEMBER(encoder.se_bottleneck)));
    f.push_back(count_field("encoder", "attn_hidden", C2C_MEMBER(encoder.attn_hidden)));
    f.push_back(count_field("encoder", "embed_dim", C2C_MEMBER(encoder.embed_dim)));

    f.push_back(count_field("classifier", "hidden_dim", C2C_MEMBER(classifier.hidden_dim)));
    f.push_back(count_field("classifier", "out_dim", C2C_MEMBER(classifier.out_dim)));

    f.push_back(count_field("train", "epochs", C2C_MEMBER(train.epochs)));
    f.push_back(count_field("train", "batch_size", C2C_MEMBER(train.batch_size)));
    f.push_back(real_field("train", "lr_max", C2C_MEMBER(train.lr_max)));
    f.push_back(real_field("train", "lr_min", C2C_MEMBER(train.lr_min)));
    f.push_back(count_field("train", "cycle_len_epochs", C2C_MEMBER(train.cycle_len_epochs)));
    f.push_back(real_field("train", "cycle_mult", C2C_MEMBER(train.cycle_mult)));
    f.push_back(real_field("train", "warmup_epochs", C2C_MEMBER(train.warmup_epochs)));
    f.push_back(real_field("train", "alpha_lr_scale", C2C_MEMBER(train.alpha_lr_scale)));
    f.push_back(real_field("train", "validation_fraction", C2C_MEMBER(train.validation_fraction)));
    f.push_back(count_field("train", "seed", C2C_MEMBER(train.seed)));

    f.push_back(text_field("paths", "manifest", C2C_MEMBER(paths.manifest)));
    f.push_back(text_field("paths", "out_dir", C2C_MEMBER(paths.out_dir)));
    f.push_back(text_field("paths", "checkpoint", C2C_MEMBER(paths.checkpoint)));
    return f;
  }();
  return all;
}

#undef C2C_MEMBER

const Field& find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return f;
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside a section");
    try {
      find_field(section, trim(line.substr(0, eq))).set(cfg, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  try {
    apply_config_text(cfg, bytes::read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(PipelineConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override '" + dotted_key + "' must be section.key");
  find_field(dotted_key.substr(0, dot), dotted_key.substr(dot + 1)).set(cfg, value);
}

std::string format_config(const PipelineConfig& cfg, bool include_paths) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (!include_paths && f.section == "paths") continue;
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.dotted());
  return keys;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace c2c
