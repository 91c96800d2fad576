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

#include "c2c/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bytes.hpp"
#include "c2c/errors.hpp"

namespace c2c {

const char* feature_kind_name(FeatureKind kind) {
  return kind == FeatureKind::kLogMel ? "log_mel" : "raw_frame";
}

FeatureKind parse_feature_kind(const std::string& text) {
  if (text == "log_mel") return FeatureKind::kLogMel;
  if (text == "raw_frame") return FeatureKind::kRawFrame;
  throw ConfigError("unknown feature kind '" + text + "'");
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void FrontendConfig::validate(int rate) const {
  if (!(frame_ms > 0.0 && hop_ms > 0.0))
    throw ConfigError("frontend: frame_ms and hop_ms must be > 0");
  if (!is_power_of_two(fft_size))
    throw ConfigError("frontend: fft_size must be a power of two");
  if (fft_size < frame_samples(rate))
    throw ConfigError("frontend: fft_size smaller than the analysis frame");
  if (mel_bins < 2) throw ConfigError("frontend: mel_bins must be >= 2");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= rate / 2.0))
    throw ConfigError("frontend: need 0 <= f_min < f_max <= rate/2");
  if (!(log_floor > 0.0)) throw ConfigError("frontend: log_floor must be > 0");
}

std::size_t FrontendConfig::frame_samples(int rate) const {
  return static_cast<std::size_t>(std::max(1.0, std::round(frame_ms * rate / 1000.0)));
}

std::size_t FrontendConfig::hop_samples(int rate) const {
  return static_cast<std::size_t>(std::max(1.0, std::round(hop_ms * rate / 1000.0)));
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw ConfigError("fft: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from the angle directly rather than by repeated products,
      // so error does not accumulate across the butterfly span.
      const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                   std::sin(angle * static_cast<double>(k)));
      for (std::size_t start = 0; start < n; start += len) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<std::complex<double>> fft_real(std::span<const double> signal,
                                           std::size_t n) {
  if (!is_power_of_two(n)) throw ConfigError("fft_real: n must be a power of two");
  if (signal.size() > n) throw ConfigError("fft_real: signal longer than n");
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  fft_inplace(buf, false);
  buf.resize(n / 2 + 1);
  return buf;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges_hz(const FrontendConfig& cfg) {
  const double lo = hz_to_mel(cfg.f_min);
  const double hi = hz_to_mel(cfg.f_max);
  const std::size_t points = cfg.mel_bins + 2;
  std::vector<double> edges(points);
  for (std::size_t i = 0; i < points; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(points - 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_centers_hz(const FrontendConfig& cfg) {
  auto edges = mel_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<std::vector<double>> mel_filterbank(const FrontendConfig& cfg, int rate) {
  cfg.validate(rate);
  const auto edges = mel_edges_hz(cfg);
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(rate) / static_cast<double>(cfg.fft_size);

  std::vector<std::vector<double>> bank(cfg.mel_bins, std::vector<double>(n_bins, 0.0));
  for (std::size_t m = 0; m < cfg.mel_bins; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    auto& row = bank[m];
    double peak = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      row[k] = w;
      peak = std::max(peak, w);
    }
    if (peak == 0.0) {
      // Filter narrower than one FFT bin: fall back to the nearest bin.
      const auto k = static_cast<std::size_t>(std::lround(center / bin_hz));
      row[std::min(k, n_bins - 1)] = 1.0;
      continue;
    }
    for (double& w : row) w /= peak;
  }
  return bank;
}

std::size_t frame_count(std::size_t n, std::size_t frame, std::size_t hop) {
  if (n < frame) return 0;
  return (n - frame) / hop + 1;
}

FeatureMatrix log_mel_features(const AudioClip& clip, const FrontendConfig& cfg) {
  const int rate = clip.sample_rate;
  cfg.validate(rate);
  const std::size_t frame = cfg.frame_samples(rate);
  const std::size_t hop = cfg.hop_samples(rate);
  const std::size_t frames = frame_count(clip.samples.size(), frame, hop);
  if (frames == 0) {
    throw TooShortError("log_mel_features: clip has " +
                        std::to_string(clip.samples.size()) +
                        " samples, one frame needs " + std::to_string(frame));
  }

  const auto bank = mel_filterbank(cfg, rate);
  // Periodic Hann window.
  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(frame));
  }

  FeatureMatrix out;
  out.frames = frames;
  out.bins = cfg.mel_bins;
  out.data.resize(frames * cfg.mel_bins);
  out.frame_hop_ms = cfg.hop_ms;
  out.kind = FeatureKind::kLogMel;

  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  std::vector<double> buf(frame);
  std::vector<double> power(n_bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* x = clip.samples.data() + t * hop;
    for (std::size_t i = 0; i < frame; ++i) buf[i] = x[i] * window[i];
    const auto spectrum = fft_real(buf, cfg.fft_size);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]);
    for (std::size_t m = 0; m < cfg.mel_bins; ++m) {
      double acc = 0.0;
      const auto& row = bank[m];
      for (std::size_t k = 0; k < n_bins; ++k) acc += row[k] * power[k];
      out.at(t, m) = std::log(std::max(acc, cfg.log_floor));
    }
  }
  return out;
}

FeatureMatrix raw_frame_features(const AudioClip& clip, const FrontendConfig& cfg) {
  const int rate = clip.sample_rate;
  const std::size_t frame = cfg.frame_samples(rate);
  const std::size_t hop = cfg.hop_samples(rate);
  const std::size_t frames = frame_count(clip.samples.size(), frame, hop);
  if (frames == 0) {
    throw TooShortError("raw_frame_features: clip has " +
                        std::to_string(clip.samples.size()) +
                        " samples, one frame needs " + std::to_string(frame));
  }
  FeatureMatrix out;
  out.frames = frames;
  out.bins = 1;
  out.data.resize(frames);
  out.frame_hop_ms = cfg.hop_ms;
  out.kind = FeatureKind::kRawFrame;
  for (std::size_t t = 0; t < frames; ++t) {
    const double* x = clip.samples.data() + t * hop;
    double energy = 0.0;
    for (std::size_t i = 0; i < frame; ++i) energy += x[i] * x[i];
    out.data[t] = std::log(std::max(energy, cfg.log_floor));
  }
  return out;
}

FeatureMatrix compute_features(const AudioClip& clip, const FrontendConfig& cfg,
                               FeatureKind kind) {
  return kind == FeatureKind::kLogMel ? log_mel_features(clip, cfg)
                                      : raw_frame_features(clip, cfg);
}

void normalize_columns(FeatureMatrix& features) {
  const std::size_t T = features.frames;
  const std::size_t F = features.bins;
  for (std::size_t f = 0; f < F; ++f) {
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += features.at(t, f);
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double d = features.at(t, f) - mean;
      var += d * d;
    }
    var /= static_cast<double>(T);
    const double inv_std = 1.0 / std::sqrt(var + 1e-5);
    for (std::size_t t = 0; t < T; ++t) {
      features.at(t, f) = (features.at(t, f) - mean) * inv_std;
    }
  }
}

std::vector<std::uint8_t> encode_features(const FeatureMatrix& features) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * features.data.size());
  bytes::put_tag(out, "C2CF");
  bytes::put_u32(out, static_cast<std::uint32_t>(features.frames));
  bytes::put_u32(out, static_cast<std::uint32_t>(features.bins));
  bytes::put_u32(out, static_cast<std::uint32_t>(features.kind));
  for (double v : features.data) bytes::put_f32(out, static_cast<float>(v));
  return out;
}

FeatureMatrix decode_features(const std::vector<std::uint8_t>& data) {
  bytes::Reader in(data, "feature file");
  if (std::string(reinterpret_cast<const char*>(in.take(4)), 4) != "C2CF")
    throw ParseError("feature file: bad magic");
  FeatureMatrix out;
  out.frames = in.u32();
  out.bins = in.u32();
  const std::uint32_t kind = in.u32();
  if (kind > 1) throw ParseError("feature file: unknown kind " + std::to_string(kind));
  out.kind = static_cast<FeatureKind>(kind);
  out.data.resize(out.frames * out.bins);
  for (double& v : out.data) v = in.f32();
  if (!in.done()) throw ParseError("feature file: trailing bytes");
  return out;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  bytes::write_file(path, encode_features(features));
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  return decode_features(bytes::read_file(path));
}

}  // namespace c2c
