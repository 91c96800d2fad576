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

#include "c2c/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

#include <json.hpp>

#include "bytes.hpp"
#include "c2c/errors.hpp"
#include "c2c/features.hpp"
#include "c2c/rng.hpp"

namespace c2c {

namespace {

constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kBackgroundStream = 2;
constexpr std::uint64_t kBreathStream = 3;
constexpr std::uint64_t kBurstStream = 100;

std::size_t seconds_to_samples(double sec, int rate) {
  return static_cast<std::size_t>(std::llround(sec * rate));
}

void check_band(double low, double high, int rate, const char* name) {
  if (!(low > 0.0 && low < high && high < rate / 2.0))
    throw ConfigError(std::string("synth: ") + name + " must satisfy 0 < low < high < rate/2");
}

double background_scale(const SynthSpec& spec) {
  const double burst_rms = kBurstPeak / kBurstClipSigma;
  const double power = burst_rms * burst_rms * std::pow(10.0, -spec.snr_db / 10.0);
  return std::sqrt(power / 2.0);  // Laplace variance is 2 b^2
}

std::vector<double> background(const SynthSpec& spec, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  const double b = background_scale(spec);
  std::vector<double> out(length);
  for (auto& x : out) x = rng.laplace(b);
  return out;
}

std::string numbered(const char* stem, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu", stem, index);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (sample_rate <= 0) throw ConfigError("synth: sample_rate must be positive");
  if (!(clip_sec > 0.0)) throw ConfigError("synth: clip_sec must be positive");
  if (bursts_min > bursts_max) throw ConfigError("synth: bursts_min > bursts_max");
  if (!(burst_sec_min > 0.0 && burst_sec_min <= burst_sec_max))
    throw ConfigError("synth: need 0 < burst_sec_min <= burst_sec_max");
  if (!(min_gap_sec >= 0.0)) throw ConfigError("synth: min_gap_sec must be >= 0");
  if (!std::isfinite(snr_db)) throw ConfigError("synth: snr_db must be finite");
  check_band(class0_low_hz, class0_high_hz, sample_rate, "class0_band");
  check_band(class1_low_hz, class1_high_hz, sample_rate, "class1_band");
  const double worst = static_cast<double>(bursts_max) * burst_sec_max +
                       static_cast<double>(bursts_max + 1) * min_gap_sec;
  if (worst > clip_sec)
    throw ConfigError("synth: bursts_max bursts of burst_sec_max do not fit in clip_sec");
}

std::vector<double> band_limited_noise(std::size_t length, double low_hz, double high_hz,
                                       int sample_rate, std::uint64_t seed) {
  if (length == 0) return {};
  std::size_t n = 1;
  while (n < length) n <<= 1;
  Rng rng(seed);
  std::vector<std::complex<double>> buf(n);
  for (auto& z : buf) z = rng.normal();
  fft_inplace(buf, false);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f < low_hz || f > high_hz) {
      buf[k] = 0.0;
      if (k != 0 && k != n / 2) buf[n - k] = 0.0;
    }
  }
  fft_inplace(buf, true);

  std::vector<double> out(length);
  double power = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = buf[i].real();
    power += out[i] * out[i];
  }
  const double rms = std::sqrt(power / static_cast<double>(length));
  if (rms > 0.0)
    for (auto& x : out) x /= rms;
  return out;
}

SynthClip synth_clip(const SynthSpec& spec, std::size_t index) {
  spec.validate();
  const int rate = spec.sample_rate;
  const std::size_t length = seconds_to_samples(spec.clip_sec, rate);
  const std::size_t gap = seconds_to_samples(spec.min_gap_sec, rate);
  const int label = static_cast<int>(index % 2);

  Rng layout(derive_seed(spec.seed, index, kLayoutStream));
  const auto n_bursts = static_cast<std::size_t>(
      layout.uniform_int(static_cast<std::int64_t>(spec.bursts_min),
                         static_cast<std::int64_t>(spec.bursts_max)));
  std::vector<std::size_t> durations(n_bursts);
  std::size_t occupied = (n_bursts + 1) * gap;
  for (auto& d : durations) {
    d = seconds_to_samples(layout.uniform(spec.burst_sec_min, spec.burst_sec_max), rate);
    occupied += d;
  }
  const std::size_t slack = length > occupied ? length - occupied : 0;
  std::vector<std::size_t> offsets(n_bursts);
  for (auto& o : offsets)
    o = static_cast<std::size_t>(layout.uniform_int(0, static_cast<std::int64_t>(slack)));
  std::sort(offsets.begin(), offsets.end());

  SynthClip out;
  out.clip.sample_rate = rate;
  out.clip.samples = background(spec, length, derive_seed(spec.seed, index, kBackgroundStream));
  out.truth.clip_path = "clips/" + numbered("clip", index) + ".wav";
  out.truth.label = label;

  const double low = label == 0 ? spec.class0_low_hz : spec.class1_low_hz;
  const double high = label == 0 ? spec.class0_high_hz : spec.class1_high_hz;
  const double gain = kBurstPeak / kBurstClipSigma;
  std::size_t cursor = gap;
  for (std::size_t b = 0; b < n_bursts; ++b) {
    const std::size_t start = cursor + offsets[b];
    const std::size_t end = start + durations[b];
    auto noise = band_limited_noise(durations[b], low, high, rate,
                                    derive_seed(spec.seed, index, kBurstStream + b));
    for (std::size_t i = 0; i < noise.size(); ++i) {
      const double v = std::clamp(noise[i], -kBurstClipSigma, kBurstClipSigma);
      out.clip.samples[start + i] += gain * v;
    }
    out.truth.bursts.push_back({start, end});
    cursor += durations[b] + gap;
  }

  // Burst energy must dominate the background by at least 10x at >= 20 dB.
  if (spec.snr_db >= 20.0 && n_bursts > 0) {
    double burst_power = 0.0;
    std::size_t burst_count = 0;
    std::vector<bool> inside(length, false);
    for (const auto& iv : out.truth.bursts) {
      for (std::size_t i = iv.start_sample; i < iv.end_sample; ++i) {
        inside[i] = true;
        burst_power += out.clip.samples[i] * out.clip.samples[i];
      }
      burst_count += iv.end_sample - iv.start_sample;
    }
    double background_power = 0.0;
    std::size_t background_count = 0;
    for (std::size_t i = 0; i < length; ++i) {
      if (inside[i]) continue;
      background_power += out.clip.samples[i] * out.clip.samples[i];
      ++background_count;
    }
    if (background_count > 0 && burst_count > 0) {
      const double ratio = (burst_power / static_cast<double>(burst_count)) /
                           (background_power / static_cast<double>(background_count));
      if (!(ratio >= 10.0))
        throw NumericalError("synth: burst/background energy ratio " + std::to_string(ratio) +
                             " below 10 for " + out.truth.clip_path);
    }
  }
  return out;
}

AudioClip synth_breath(const SynthSpec& spec, std::size_t index) {
  spec.validate();
  const std::size_t length = seconds_to_samples(spec.clip_sec, spec.sample_rate);
  return {background(spec, length, derive_seed(spec.seed, index, kBreathStream)),
          spec.sample_rate};
}

SynthCorpus generate_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "clips", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "clips").string() + ": " + ec.message());

  SynthCorpus corpus;
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < spec.n_clips; ++i) {
    SynthClip sc = synth_clip(spec, i);
    const std::string subject = numbered("s", i);
    write_wav(sc.clip, out_dir / sc.truth.clip_path);
    entries.push_back({sc.truth.clip_path, sc.truth.label, Modality::kCough, subject});
    if (spec.with_breath) {
      const std::string breath_path = "clips/" + numbered("breath", i) + ".wav";
      write_wav(synth_breath(spec, i), out_dir / breath_path);
      entries.push_back({breath_path, sc.truth.label, Modality::kBreath, subject});
    }
    corpus.truths.push_back(std::move(sc.truth));
  }
  corpus.manifest = out_dir / "manifest.csv";
  corpus.truth_file = out_dir / "truth.json";
  write_manifest(entries, corpus.manifest);
  bytes::write_text(corpus.truth_file, truth_to_json(corpus.truths));
  return corpus;
}

std::string truth_to_json(const std::vector<SynthTruth>& truths) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : truths) {
    auto bursts = nlohmann::ordered_json::array();
    for (const auto& b : t.bursts)
      bursts.push_back({{"start_sample", b.start_sample}, {"end_sample", b.end_sample}});
    arr.push_back({{"clip_path", t.clip_path}, {"label", t.label}, {"bursts", bursts}});
  }
  return arr.dump(2) + "\n";
}

std::vector<SynthTruth> truth_from_json(const std::string& text) {
  try {
    std::vector<SynthTruth> out;
    for (const auto& j : nlohmann::json::parse(text)) {
      SynthTruth t;
      t.clip_path = j.at("clip_path").get<std::string>();
      t.label = j.at("label").get<int>();
      for (const auto& b : j.at("bursts"))
        t.bursts.push_back({b.at("start_sample").get<std::size_t>(),
                            b.at("end_sample").get<std::size_t>()});
      out.push_back(std::move(t));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truth json: ") + e.what());
  }
}

}  // namespace c2c
