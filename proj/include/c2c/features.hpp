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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "c2c/audio_io.hpp"

namespace c2c {

enum class FeatureKind : std::uint32_t { kLogMel = 0, kRawFrame = 1 };

const char* feature_kind_name(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

// Row-major T x F matrix: one row per frame.
struct FeatureMatrix {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> data;
  double frame_hop_ms = 10.0;
  FeatureKind kind = FeatureKind::kLogMel;

  double& at(std::size_t t, std::size_t f) { return data[t * bins + f]; }
  double at(std::size_t t, std::size_t f) const { return data[t * bins + f]; }
};

struct FrontendConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  std::size_t mel_bins = 40;
  double f_min = 50.0;
  double f_max = 7600.0;
  double log_floor = 1e-10;

  void validate(int rate) const;
  std::size_t frame_samples(int rate) const;
  std::size_t hop_samples(int rate) const;
};

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 transform. The inverse includes the 1/n factor.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

// One-sided spectrum (n/2 + 1 bins) of a real signal zero-padded to n.
std::vector<std::complex<double>> fft_real(std::span<const double> signal,
                                           std::size_t n);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Center frequency (Hz) of each mel filter.
std::vector<double> mel_centers_hz(const FrontendConfig& cfg);

// mel_bins x (fft_size / 2 + 1) triangular filters, each scaled to peak 1.
std::vector<std::vector<double>> mel_filterbank(const FrontendConfig& cfg, int rate);

std::size_t frame_count(std::size_t n, std::size_t frame, std::size_t hop);

FeatureMatrix log_mel_features(const AudioClip& clip, const FrontendConfig& cfg);
FeatureMatrix raw_frame_features(const AudioClip& clip, const FrontendConfig& cfg);
FeatureMatrix compute_features(const AudioClip& clip, const FrontendConfig& cfg,
                               FeatureKind kind);

// Per-clip mean/variance normalization of each feature column.
void normalize_columns(FeatureMatrix& features);

// Binary feature file: "C2CF", u32 T, u32 F, u32 kind, then T*F float32 LE.
std::vector<std::uint8_t> encode_features(const FeatureMatrix& features);
FeatureMatrix decode_features(const std::vector<std::uint8_t>& bytes);
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace c2c
