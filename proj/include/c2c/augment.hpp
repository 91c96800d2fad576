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

#include "c2c/audio_io.hpp"
#include "c2c/features.hpp"

namespace c2c {

struct AugmentConfig {
  double segment_sec = 4.0;
  double max_shift_sec = 1.0;
  std::size_t time_masks = 2;
  std::size_t max_time_mask = 20;
  std::size_t freq_masks = 2;
  std::size_t max_freq_mask = 8;
  double mask_value = 0.0;

  void validate() const;
  std::size_t segment_samples(int rate) const;
};

enum class CropMode { kTraining, kEvaluation };

// Crops or cyclically tiles a clip to exactly segment_sec. Training crops
// start at a seeded random offset; evaluation crops start at 0.
AudioClip fix_length(const AudioClip& clip, double segment_sec, CropMode mode,
                     std::uint64_t seed);

// Rotates right by `shift` samples (negative rotates left).
AudioClip circular_shift(const AudioClip& clip, std::int64_t shift);

// Circular shift by a seeded draw from [-max_shift, +max_shift] samples.
AudioClip random_shift(const AudioClip& clip, const AugmentConfig& cfg,
                       std::uint64_t seed);

// Sets rows [start, start + width) to value, clipped to the matrix.
void apply_time_mask(FeatureMatrix& features, std::size_t start, std::size_t width,
                     double value);
// Sets columns [start, start + width) to value, clipped to the matrix.
void apply_freq_mask(FeatureMatrix& features, std::size_t start, std::size_t width,
                     double value);

FeatureMatrix feature_mask(const FeatureMatrix& features, const AugmentConfig& cfg,
                           std::uint64_t seed);

}  // namespace c2c
