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

// Synthetic cough-like corpora with known burst boundaries.
//
// Each clip is low-level Laplacian background noise with zero or more
// band-limited noise bursts. The burst band encodes the label: class 0 uses
// class0_band, class 1 uses class1_band. Both bands have the same width by
// default, so frame energy alone carries no label information.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "c2c/audio_io.hpp"

namespace c2c {

struct SynthSpec {
  std::size_t n_clips = 20;
  double clip_sec = 4.0;
  std::size_t bursts_min = 1;
  std::size_t bursts_max = 3;
  double burst_sec_min = 0.15;
  double burst_sec_max = 0.4;
  double class0_low_hz = 300.0;
  double class0_high_hz = 1800.0;
  double class1_low_hz = 3000.0;
  double class1_high_hz = 4500.0;
  double snr_db = 30.0;
  std::uint64_t seed = 0;
  int sample_rate = kPipelineRate;
  // Minimum silence between consecutive bursts and at the clip edges.
  double min_gap_sec = 0.15;
  // Also emit one pure-background breath clip per subject.
  bool with_breath = false;

  void validate() const;
};

struct BurstInterval {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;  // exclusive

  bool operator==(const BurstInterval&) const = default;
};

struct SynthTruth {
  std::string clip_path;
  int label = 0;
  std::vector<BurstInterval> bursts;

  bool operator==(const SynthTruth&) const = default;
};

struct SynthClip {
  AudioClip clip;
  SynthTruth truth;
};

struct SynthCorpus {
  std::filesystem::path manifest;
  std::filesystem::path truth_file;
  std::vector<SynthTruth> truths;
};

// Peak amplitude of a burst before the clip is written.
inline constexpr double kBurstPeak = 0.5;
// Bursts are hard-clipped at this many standard deviations.
inline constexpr double kBurstClipSigma = 2.5;

// Zero-mean noise of `length` samples restricted to [low_hz, high_hz] by
// zeroing FFT bins, scaled to unit RMS.
std::vector<double> band_limited_noise(std::size_t length, double low_hz, double high_hz,
                                       int sample_rate, std::uint64_t seed);

// Clip `index` of the corpus; label is index % 2. Deterministic in
// (spec.seed, index).
SynthClip synth_clip(const SynthSpec& spec, std::size_t index);

// Breath clip for subject `index`: background noise only.
AudioClip synth_breath(const SynthSpec& spec, std::size_t index);

// Writes clips/clip_NNNN.wav (and clips/breath_NNNN.wav), manifest.csv and
// truth.json under out_dir.
SynthCorpus generate_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

std::string truth_to_json(const std::vector<SynthTruth>& truths);
std::vector<SynthTruth> truth_from_json(const std::string& text);

}  // namespace c2c
