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

#include "c2c/augment.hpp"

#include <algorithm>
#include <cmath>

#include "c2c/errors.hpp"
#include "c2c/rng.hpp"

namespace c2c {

void AugmentConfig::validate() const {
  if (!(segment_sec > 0.0)) throw ConfigError("augment: segment_sec must be > 0");
  if (!(max_shift_sec >= 0.0 && max_shift_sec <= segment_sec))
    throw ConfigError("augment: max_shift_sec must lie in [0, segment_sec]");
}

std::size_t AugmentConfig::segment_samples(int rate) const {
  return static_cast<std::size_t>(std::lround(segment_sec * rate));
}

AudioClip fix_length(const AudioClip& clip, double segment_sec, CropMode mode,
                     std::uint64_t seed) {
  if (clip.samples.empty()) throw EmptyAudioError("fix_length: empty clip");
  const auto target = static_cast<std::size_t>(std::lround(segment_sec * clip.sample_rate));
  if (target == 0) throw ConfigError("fix_length: segment shorter than one sample");
  const std::size_t n = clip.samples.size();

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (n >= target) {
    std::size_t start = 0;
    if (mode == CropMode::kTraining && n > target) {
      Rng rng(seed);
      start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - target)));
    }
    const auto first = clip.samples.begin() + static_cast<std::ptrdiff_t>(start);
    out.samples.assign(first, first + static_cast<std::ptrdiff_t>(target));
    return out;
  }
  out.samples.resize(target);
  for (std::size_t i = 0; i < target; ++i) out.samples[i] = clip.samples[i % n];
  return out;
}

AudioClip circular_shift(const AudioClip& clip, std::int64_t shift) {
  AudioClip out = clip;
  const auto n = static_cast<std::int64_t>(clip.samples.size());
  if (n == 0) return out;
  const std::int64_t s = ((shift % n) + n) % n;
  std::rotate(out.samples.begin(), out.samples.end() - s, out.samples.end());
  return out;
}

AudioClip random_shift(const AudioClip& clip, const AugmentConfig& cfg,
                       std::uint64_t seed) {
  cfg.validate();
  if (clip.samples.size() != cfg.segment_samples(clip.sample_rate)) {
    throw ConfigError("random_shift: clip length " + std::to_string(clip.samples.size()) +
                      " differs from segment length " +
                      std::to_string(cfg.segment_samples(clip.sample_rate)));
  }
  const auto max_shift = static_cast<std::int64_t>(std::lround(cfg.max_shift_sec * clip.sample_rate));
  Rng rng(seed);
  return circular_shift(clip, rng.uniform_int(-max_shift, max_shift));
}

void apply_time_mask(FeatureMatrix& features, std::size_t start, std::size_t width,
                     double value) {
  const std::size_t end = std::min(features.frames, start + width);
  for (std::size_t t = start; t < end; ++t) {
    for (std::size_t f = 0; f < features.bins; ++f) features.at(t, f) = value;
  }
}

void apply_freq_mask(FeatureMatrix& features, std::size_t start, std::size_t width,
                     double value) {
  const std::size_t end = std::min(features.bins, start + width);
  for (std::size_t t = 0; t < features.frames; ++t) {
    for (std::size_t f = start; f < end; ++f) features.at(t, f) = value;
  }
}

FeatureMatrix feature_mask(const FeatureMatrix& features, const AugmentConfig& cfg,
                           std::uint64_t seed) {
  FeatureMatrix out = features;
  Rng rng(seed);
  const auto draw_stripe = [&rng](std::size_t max_width, std::size_t extent) {
    const auto width = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(std::min(max_width, extent))));
    const auto start = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(extent - width)));
    return std::pair{start, width};
  };
  for (std::size_t i = 0; i < cfg.time_masks; ++i) {
    const auto [start, width] = draw_stripe(cfg.max_time_mask, out.frames);
    apply_time_mask(out, start, width, cfg.mask_value);
  }
  for (std::size_t i = 0; i < cfg.freq_masks; ++i) {
    const auto [start, width] = draw_stripe(cfg.max_freq_mask, out.bins);
    apply_freq_mask(out, start, width, cfg.mask_value);
  }
  return out;
}

}  // namespace c2c
