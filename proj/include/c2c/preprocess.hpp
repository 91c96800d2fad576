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

#include <cstddef>
#include <vector>

#include "c2c/audio_io.hpp"

namespace c2c {

// Cough segmentation by short-time energy. Defaults: 22.5 ms window,
// 11.25 ms hop, onset above 14.5, region edge above 0.1.
struct PreprocessConfig {
  double window_ms = 22.5;
  double hop_ms = 11.25;
  double onset_threshold = 14.5;
  double offset_threshold = 0.1;

  void validate() const;
  std::size_t window_samples(int rate) const;
  std::size_t hop_samples(int rate) const;
};

struct SteSeries {
  std::vector<double> values;
  std::size_t window_len = 0;
  std::size_t hop_len = 0;
};

// Half-open sample interval [start_sample, end_sample).
struct CoughRegion {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;

  std::size_t length() const { return end_sample - start_sample; }
  friend bool operator==(const CoughRegion&, const CoughRegion&) = default;
};

struct NormalizedClip {
  AudioClip clip;
  bool silent = false;
};

NormalizedClip normalize_peak(const AudioClip& clip);

// Rectangular-window sum of squares; the trailing partial frame is dropped.
SteSeries short_time_energy(const AudioClip& clip, const PreprocessConfig& cfg);

// Onset: a frame above onset_threshold whose predecessor is not. Offset:
// scanning back from the next onset (or the series end), past that onset's
// rising edge, the last frame above offset_threshold. Region samples are
// [onset * hop, offset * hop + window); touching regions merge.
std::vector<CoughRegion> detect_cough_regions(const SteSeries& ste,
                                              const PreprocessConfig& cfg,
                                              std::size_t signal_len);

AudioClip extract_cough_signal(const AudioClip& clip,
                               const std::vector<CoughRegion>& regions);

struct PreprocessResult {
  AudioClip clip;
  std::vector<CoughRegion> regions;
  bool silent = false;
  bool no_cough_detected = false;
};

PreprocessResult preprocess_pipeline(const AudioClip& clip,
                                     const PreprocessConfig& cfg);

}  // namespace c2c
