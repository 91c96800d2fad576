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

#include "c2c/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "c2c/errors.hpp"

namespace c2c {

void PreprocessConfig::validate() const {
  if (!(window_ms > 0.0)) throw ConfigError("preprocess: window_ms must be > 0");
  if (!(hop_ms > 0.0 && hop_ms <= window_ms))
    throw ConfigError("preprocess: hop_ms must lie in (0, window_ms]");
  if (!(offset_threshold > 0.0 && onset_threshold > offset_threshold))
    throw ConfigError("preprocess: need onset_threshold > offset_threshold > 0");
}

std::size_t PreprocessConfig::window_samples(int rate) const {
  return static_cast<std::size_t>(std::max(1.0, std::round(window_ms * rate / 1000.0)));
}

std::size_t PreprocessConfig::hop_samples(int rate) const {
  return static_cast<std::size_t>(std::max(1.0, std::round(hop_ms * rate / 1000.0)));
}

NormalizedClip normalize_peak(const AudioClip& clip) {
  if (clip.samples.empty()) throw EmptyAudioError("normalize_peak: empty clip");
  double peak = 0.0;
  for (double x : clip.samples) peak = std::max(peak, std::abs(x));
  NormalizedClip out{clip, peak == 0.0};
  if (!out.silent) {
    for (double& x : out.clip.samples) x /= peak;
  }
  return out;
}

SteSeries short_time_energy(const AudioClip& clip, const PreprocessConfig& cfg) {
  cfg.validate();
  SteSeries ste;
  ste.window_len = cfg.window_samples(clip.sample_rate);
  ste.hop_len = cfg.hop_samples(clip.sample_rate);
  const std::size_t n = clip.samples.size();
  if (n < ste.window_len) {
    throw TooShortError("short_time_energy: clip has " + std::to_string(n) +
                        " samples, window needs " + std::to_string(ste.window_len));
  }
  const std::size_t frames = (n - ste.window_len) / ste.hop_len + 1;
  ste.values.resize(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double* x = clip.samples.data() + k * ste.hop_len;
    double acc = 0.0;
    for (std::size_t i = 0; i < ste.window_len; ++i) acc += x[i] * x[i];
    ste.values[k] = acc;
  }
  return ste;
}

std::vector<CoughRegion> detect_cough_regions(const SteSeries& ste,
                                              const PreprocessConfig& cfg,
                                              std::size_t signal_len) {
  const auto& v = ste.values;
  std::vector<std::size_t> onsets;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] > cfg.onset_threshold && (k == 0 || v[k - 1] <= cfg.onset_threshold))
      onsets.push_back(k);
  }

  std::vector<CoughRegion> regions;
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    const bool has_next = i + 1 < onsets.size();
    const std::size_t limit = has_next ? onsets[i + 1] : v.size();
    // Walk back from the next onset, first over that onset's rising edge,
    // then to the last frame still above the offset threshold. If energy
    // never drops to the threshold between the onsets, the regions touch.
    std::size_t scan = limit;
    if (has_next) {
      while (scan > onsets[i] + 1 && v[scan - 1] > cfg.offset_threshold) --scan;
      if (scan == onsets[i] + 1) scan = limit;
    }
    std::size_t offset = scan - 1;
    while (offset > onsets[i] && !(v[offset] > cfg.offset_threshold)) --offset;

    CoughRegion r;
    r.start_sample = std::min(onsets[i] * ste.hop_len, signal_len);
    r.end_sample = std::min(offset * ste.hop_len + ste.window_len, signal_len);
    if (r.end_sample <= r.start_sample) continue;
    if (!regions.empty() && r.start_sample <= regions.back().end_sample) {
      regions.back().end_sample = std::max(regions.back().end_sample, r.end_sample);
    } else {
      regions.push_back(r);
    }
  }
  return regions;
}

AudioClip extract_cough_signal(const AudioClip& clip,
                               const std::vector<CoughRegion>& regions) {
  if (regions.empty()) throw EmptySegmentError("extract_cough_signal: no regions");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  std::size_t total = 0;
  for (const auto& r : regions) {
    if (r.start_sample >= r.end_sample || r.end_sample > clip.samples.size())
      throw ConfigError("extract_cough_signal: region outside clip bounds");
    total += r.length();
  }
  out.samples.reserve(total);
  for (const auto& r : regions) {
    out.samples.insert(out.samples.end(),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(r.start_sample),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(r.end_sample));
  }
  return out;
}

PreprocessResult preprocess_pipeline(const AudioClip& clip,
                                     const PreprocessConfig& cfg) {
  auto normalized = normalize_peak(clip);
  PreprocessResult result;
  result.silent = normalized.silent;
  const auto ste = short_time_energy(normalized.clip, cfg);
  result.regions = detect_cough_regions(ste, cfg, normalized.clip.samples.size());
  if (result.regions.empty()) {
    result.no_cough_detected = true;
    result.clip = std::move(normalized.clip);
  } else {
    result.clip = extract_cough_signal(normalized.clip, result.regions);
  }
  return result;
}

}  // namespace c2c
