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

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "c2c/errors.hpp"
#include "c2c/features.hpp"
#include "c2c/rng.hpp"
#include "test_util.hpp"

using namespace c2c;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                           static_cast<double>(n);
      acc += x[t] * cd(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

AudioClip tone(double hz, std::size_t n) {
  AudioClip c{std::vector<double>(n), 16000};
  for (std::size_t i = 0; i < n; ++i)
    c.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  return c;
}

}  // namespace

TEST_CASE("fft_real on impulses and constants") {
  std::vector<double> impulse(8, 0.0);
  impulse[0] = 1.0;
  const auto a = fft_real(impulse, 8);
  REQUIRE(a.size() == 5);
  for (const auto& z : a) CHECK(std::abs(z - cd(1.0, 0.0)) < 1e-12);

  const auto b = fft_real(std::vector<double>(8, 1.0), 8);
  CHECK(std::abs(b[0] - cd(8.0, 0.0)) < 1e-9);
  for (std::size_t k = 1; k < b.size(); ++k) CHECK(std::abs(b[k]) < 1e-9);

  CHECK_THROWS_AS(fft_real(impulse, 12), ConfigError);
}

TEST_CASE("fft_inplace matches the naive DFT") {
  for (std::size_t n : {8u, 64u, 512u}) {
    Rng rng(n);
    std::vector<cd> x(n);
    for (auto& z : x) z = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const auto expected = naive_dft(x);
    auto got = x;
    fft_inplace(got, false);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - expected[k]));
    CHECK(worst < 1e-9);

    fft_inplace(got, true);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(got[k] - x[k]) < 1e-12);
  }
  const auto sig = random_signal(50, 9);
  std::vector<cd> padded(64, 0.0);
  for (std::size_t i = 0; i < sig.size(); ++i) padded[i] = sig[i];
  const auto full = naive_dft(padded);
  const auto half = fft_real(sig, 64);
  for (std::size_t k = 0; k < half.size(); ++k) CHECK(std::abs(half[k] - full[k]) < 1e-9);
}

TEST_CASE("Parseval's identity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = std::size_t{1} << (3 + seed % 8);
    const auto sig = random_signal(n, seed);
    std::vector<cd> x(sig.begin(), sig.end());
    fft_inplace(x, false);
    double time_energy = 0.0;
    double freq_energy = 0.0;
    for (double v : sig) time_energy += v * v;
    for (const auto& z : x) freq_energy += std::norm(z);
    freq_energy /= static_cast<double>(n);
    CHECK(std::abs(time_energy - freq_energy) <= 1e-6 * time_energy);
  }
}

TEST_CASE("mel filterbank geometry") {
  const FrontendConfig cfg;
  const auto bank = mel_filterbank(cfg, 16000);
  REQUIRE(bank.size() == 40);
  const auto centers = mel_centers_hz(cfg);
  REQUIRE(centers.size() == 40);
  for (std::size_t m = 0; m < bank.size(); ++m) {
    REQUIRE(bank[m].size() == 257);
    double peak = 0.0;
    for (double w : bank[m]) {
      CHECK(w >= 0.0);
      peak = std::max(peak, w);
    }
    CHECK(peak == doctest::Approx(1.0));
    if (m > 0) CHECK(centers[m] > centers[m - 1]);
  }
  CHECK(hz_to_mel(mel_to_hz(1234.5)) == doctest::Approx(1234.5));
  CHECK(hz_to_mel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
}

TEST_CASE("frame count") {
  CHECK(frame_count(400, 400, 160) == 1);
  CHECK(frame_count(399, 400, 160) == 0);
  CHECK(frame_count(64000, 400, 160) == 398);
  const FrontendConfig cfg;
  for (std::size_t n : {400u, 561u, 16000u, 16161u}) {
    const auto f = log_mel_features({std::vector<double>(n, 0.1), 16000}, cfg);
    CHECK(f.frames == (n - 400) / 160 + 1);
  }
}

TEST_CASE("log_mel_features") {
  const FrontendConfig cfg;
  SUBCASE("silence hits the floor") {
    const auto f = log_mel_features({std::vector<double>(1600, 0.0), 16000}, cfg);
    for (double v : f.data) CHECK(v == doctest::Approx(std::log(1e-10)));
  }
  SUBCASE("1 kHz tone peaks at the nearest mel center") {
    const auto f = log_mel_features(tone(1000.0, 16000), cfg);
    const auto centers = mel_centers_hz(cfg);
    std::size_t nearest = 0;
    for (std::size_t m = 1; m < centers.size(); ++m)
      if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
    for (std::size_t t = 0; t < f.frames; ++t) {
      std::size_t best = 0;
      for (std::size_t m = 1; m < f.bins; ++m)
        if (f.at(t, m) > f.at(t, best)) best = m;
      CHECK(best == nearest);
    }
  }
  SUBCASE("one frame against a direct windowed DFT") {
    const auto sig = random_signal(1200, 4);
    const auto f = log_mel_features({sig, 16000}, cfg);
    const auto bank = mel_filterbank(cfg, 16000);
    const std::size_t t = 3;
    std::vector<cd> frame(512, 0.0);
    for (std::size_t i = 0; i < 400; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / 400.0));
      frame[i] = sig[t * 160 + i] * w;
    }
    const auto spec = naive_dft(frame);
    for (std::size_t m = 0; m < 40; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k <= 256; ++k) e += bank[m][k] * std::norm(spec[k]);
      CHECK(f.at(t, m) == doctest::Approx(std::log(std::max(e, 1e-10))).epsilon(1e-9));
    }
  }
  SUBCASE("shifting by one hop shifts rows by one") {
    const auto sig = random_signal(4000, 5);
    std::vector<double> shifted(sig.begin() + 160, sig.end());
    const auto a = log_mel_features({sig, 16000}, cfg);
    const auto b = log_mel_features({shifted, 16000}, cfg);
    REQUIRE(b.frames + 1 == a.frames);
    for (std::size_t t = 0; t < b.frames; ++t)
      for (std::size_t m = 0; m < 40; ++m) CHECK(std::abs(b.at(t, m) - a.at(t + 1, m)) < 1e-9);
  }
  SUBCASE("finite for extreme finite inputs") {
    auto sig = random_signal(2000, 6);
    for (std::size_t i = 0; i < 500; ++i) sig[i] = 0.0;
    for (std::size_t i = 500; i < 600; ++i) sig[i] *= 1e-30;
    for (std::size_t i = 1000; i < 1100; ++i) sig[i] *= 1e6;
    for (auto kind : {FeatureKind::kLogMel, FeatureKind::kRawFrame})
      for (double v : compute_features({sig, 16000}, cfg, kind).data) CHECK(std::isfinite(v));
  }
  CHECK_THROWS_AS(log_mel_features({std::vector<double>(399, 0.0), 16000}, cfg), TooShortError);
}

TEST_CASE("raw_frame_features") {
  const FrontendConfig cfg;
  const auto silent = raw_frame_features({std::vector<double>(800, 0.0), 16000}, cfg);
  CHECK(silent.bins == 1);
  for (double v : silent.data) CHECK(v == doctest::Approx(std::log(1e-10)));

  const auto ones = raw_frame_features({std::vector<double>(800, 1.0), 16000}, cfg);
  for (double v : ones.data) CHECK(v == doctest::Approx(std::log(400.0)));

  const auto sig = random_signal(3000, 7);
  const auto f = raw_frame_features({sig, 16000}, cfg);
  for (std::size_t t = 0; t < f.frames; ++t) {
    double e = 0.0;
    for (std::size_t i = 0; i < 400; ++i) e += sig[t * 160 + i] * sig[t * 160 + i];
    CHECK(std::abs(f.data[t] - std::log(e)) < 1e-9);
  }
  CHECK_THROWS_AS(raw_frame_features({std::vector<double>(10, 1.0), 16000}, cfg), TooShortError);
}

TEST_CASE("normalize_columns gives zero mean and near-unit variance") {
  const auto f0 = log_mel_features({random_signal(8000, 8), 16000}, FrontendConfig{});
  auto f = f0;
  normalize_columns(f);
  for (std::size_t m = 0; m < f.bins; ++m) {
    double mean = 0.0, var = 0.0, raw_var = 0.0, raw_mean = 0.0;
    for (std::size_t t = 0; t < f.frames; ++t) {
      mean += f.at(t, m);
      raw_mean += f0.at(t, m);
    }
    mean /= f.frames;
    raw_mean /= f.frames;
    for (std::size_t t = 0; t < f.frames; ++t) {
      var += (f.at(t, m) - mean) * (f.at(t, m) - mean);
      raw_var += (f0.at(t, m) - raw_mean) * (f0.at(t, m) - raw_mean);
    }
    var /= f.frames;
    raw_var /= f.frames;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(raw_var / (raw_var + 1e-5)).epsilon(1e-9));
  }
}

TEST_CASE("feature file round trip") {
  const auto f = log_mel_features({random_signal(2000, 10), 16000}, FrontendConfig{});
  const auto bytes = encode_features(f);
  CHECK(bytes.size() == 16 + 4 * f.data.size());
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "C2CF");
  testing::TempDir dir("feat");
  write_features(f, dir / "f.c2cf");
  const auto g = read_features(dir / "f.c2cf");
  CHECK(g.frames == f.frames);
  CHECK(g.bins == f.bins);
  CHECK(g.kind == f.kind);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    CHECK(g.data[i] == static_cast<double>(static_cast<float>(f.data[i])));
  auto bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_features(bad), ParseError);
  CHECK(parse_feature_kind("raw_frame") == FeatureKind::kRawFrame);
  CHECK_THROWS_AS(parse_feature_kind("mfcc"), ConfigError);
}
