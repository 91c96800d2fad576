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
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>

#include "c2c/audio_io.hpp"
#include "c2c/errors.hpp"
#include "c2c/rng.hpp"
#include "test_util.hpp"

using namespace c2c;

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void tag(std::vector<std::uint8_t>& b, const char* t) { b.insert(b.end(), t, t + 4); }

// Hand-assembled RIFF/WAVE file.
std::vector<std::uint8_t> make_wav(std::uint16_t format, std::uint16_t channels,
                                   std::uint32_t rate, std::uint16_t bits,
                                   const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  tag(b, "RIFF");
  put32(b, static_cast<std::uint32_t>(36 + payload.size()));
  tag(b, "WAVE");
  tag(b, "fmt ");
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put16(b, bits);
  tag(b, "data");
  put32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> out;
  for (auto s : v) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::vector<std::uint8_t> f32(const std::vector<float>& v) {
  std::vector<std::uint8_t> out;
  for (float f : v) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put32(out, u);
  }
  return out;
}

AudioClip random_clip(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AudioClip c{std::vector<double>(n), 16000};
  for (auto& x : c.samples) x = rng.uniform(-1.0, 1.0);
  return c;
}

}  // namespace

TEST_CASE("decode_wav scales PCM16 to [-1, 1)") {
  const auto clip = decode_wav(make_wav(1, 1, 22050, 16, pcm16({0, 16384, -32768})));
  CHECK(clip.sample_rate == 22050);
  REQUIRE(clip.samples.size() == 3);
  CHECK(clip.samples[0] == 0.0);
  CHECK(clip.samples[1] == 0.5);
  CHECK(clip.samples[2] == -1.0);
}

TEST_CASE("decode_wav downmixes stereo by channel mean") {
  const auto clip = decode_wav(make_wav(3, 2, 16000, 32, f32({1.0f, 0.0f})));
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == 0.5);
}

TEST_CASE("decode_wav error taxonomy") {
  SUBCASE("missing RIFF") {
    CHECK_THROWS_AS(decode_wav({'J', 'U', 'N', 'K'}), ParseError);
  }
  SUBCASE("fmt chunk overruns the file") {
    auto b = make_wav(1, 1, 16000, 16, pcm16({1}));
    b.resize(20);
    try {
      decode_wav(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("fmt") != std::string::npos);
    }
  }
  SUBCASE("unsupported encoding") {
    CHECK_THROWS_AS(decode_wav(make_wav(2, 1, 16000, 16, pcm16({1}))), UnsupportedFormatError);
    CHECK_THROWS_AS(decode_wav(make_wav(1, 1, 16000, 24, {0, 0, 0})), UnsupportedFormatError);
  }
  SUBCASE("empty data") {
    CHECK_THROWS_AS(decode_wav(make_wav(1, 1, 16000, 16, {})), EmptyAudioError);
  }
  SUBCASE("non-finite float") {
    CHECK_THROWS_AS(decode_wav(make_wav(3, 1, 16000, 32, f32({NAN}))), ParseError);
  }
}

TEST_CASE("decode_wav skips unknown chunks including odd-size padding") {
  std::vector<std::uint8_t> b;
  tag(b, "RIFF");
  put32(b, 0);
  tag(b, "WAVE");
  tag(b, "LIST");
  put32(b, 3);
  b.insert(b.end(), {'a', 'b', 'c', 0});
  const auto rest = make_wav(1, 1, 16000, 16, pcm16({8192}));
  b.insert(b.end(), rest.begin() + 12, rest.end());
  const auto clip = decode_wav(b);
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == 0.25);
}

TEST_CASE("encode_wav writes a canonical header") {
  const auto one = encode_wav({{0.0}, 16000});
  CHECK(one.size() == 46);
  const auto second = encode_wav({std::vector<double>(16000, 0.1), 16000});
  CHECK(second.size() == 44 + 32000);
  std::uint32_t data_size = 0;
  std::memcpy(&data_size, second.data() + 40, 4);
  CHECK(data_size == 32000);
  CHECK(std::string(second.begin() + 36, second.begin() + 40) == "data");
}

TEST_CASE("WAV round trip stays within one LSB") {
  testing::TempDir dir("wav");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto clip = random_clip(1000 + seed * 37, seed);
    clip.samples[0] = 1.0;
    clip.samples[1] = -1.0;
    write_wav(clip, dir / "a.wav");
    const auto back = load_wav(dir / "a.wav");
    REQUIRE(back.samples.size() == clip.samples.size());
    CHECK(back.sample_rate == clip.sample_rate);
    double worst = 0.0;
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
      worst = std::max(worst, std::abs(back.samples[i] - clip.samples[i]));
    CHECK(worst <= 1.0 / 32768.0);
  }
}

TEST_CASE("write_wav to an unwritable path is an IoError") {
  CHECK_THROWS_AS(write_wav({{0.0}, 16000}, "/nonexistent_dir/x/y.wav"), IoError);
}

TEST_CASE("resample_linear") {
  SUBCASE("identity at equal rates") {
    const auto clip = random_clip(100, 3);
    CHECK(resample_linear(clip, 16000).samples == clip.samples);
  }
  SUBCASE("constant stays exactly constant") {
    const AudioClip c{std::vector<double>(441, 0.7), 44100};
    for (int rate : {8000, 16000, 22050, 48000}) {
      for (double v : resample_linear(c, rate).samples) CHECK(v == 0.7);
    }
  }
  SUBCASE("1 kHz sine from 48 kHz to 16 kHz") {
    AudioClip c{std::vector<double>(48000), 48000};
    for (std::size_t i = 0; i < c.samples.size(); ++i)
      c.samples[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 48000.0);
    const auto r = resample_linear(c, 16000);
    CHECK(r.sample_rate == 16000);
    double worst = 0.0;
    for (std::size_t i = 10; i + 10 < r.samples.size(); ++i) {
      const double t = static_cast<double>(i) / 16000.0;
      worst = std::max(worst, std::abs(r.samples[i] - std::sin(2.0 * std::numbers::pi * 1000.0 * t)));
    }
    CHECK(worst < 0.01);
  }
}

TEST_CASE("manifest parsing") {
  const std::string header = "clip_path,label,modality,subject_id\n";
  CHECK(parse_manifest(header).empty());

  const auto three = parse_manifest(header +
                                    "a.wav,0,cough,s1\r\n"
                                    "b.wav,1,breath,s1\n"
                                    "c.wav,1,cough,s2\n");
  REQUIRE(three.size() == 3);
  CHECK(three[0].clip_path == "a.wav");
  CHECK(three[1].modality == Modality::kBreath);
  CHECK(three[2].subject_id == "s2");
  CHECK(three[2].label == 1);

  try {
    parse_manifest(header + "a.wav,2,cough,s1\n");
    FAIL("expected ValueError");
  } catch (const ValueError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_manifest(header + "a.wav,0,cough,s1\nb.wav,0,cough\n");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_manifest("path,label\n"), SchemaError);
  CHECK_THROWS_AS(parse_manifest(header + "a.wav,0,sneeze,s1\n"), ValueError);
}

TEST_CASE("manifest parse, format, parse is a fixed point") {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 20; ++i) {
    entries.push_back({"clips/c" + std::to_string(i) + ".wav", i % 2,
                       i % 3 == 0 ? Modality::kBreath : Modality::kCough,
                       "s" + std::to_string(i / 2)});
  }
  const auto text = format_manifest(entries);
  const auto parsed = parse_manifest(text);
  CHECK(parsed == entries);
  CHECK(format_manifest(parsed) == text);

  testing::TempDir dir("manifest");
  write_manifest(entries, dir / "m.csv");
  CHECK(load_manifest(dir / "m.csv") == entries);
}

TEST_CASE("split_dataset") {
  std::vector<ManifestEntry> singles;
  for (int i = 0; i < 100; ++i)
    singles.push_back({"c" + std::to_string(i), i % 2, Modality::kCough, "s" + std::to_string(i)});

  SUBCASE("8% of 100 single-clip subjects") {
    const auto split = split_dataset(singles, 0.08, 7);
    CHECK(split.validation.size() == 8);
    CHECK(split.train.size() == 92);
  }
  SUBCASE("deterministic in the seed") {
    const auto a = split_dataset(singles, 0.08, 11);
    const auto b = split_dataset(singles, 0.08, 11);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
  }
  SUBCASE("subject-disjoint across seeds") {
    std::vector<ManifestEntry> grouped;
    for (int i = 0; i < 50; ++i)
      grouped.push_back({"c" + std::to_string(i), (i / 5) % 2, Modality::kCough,
                         "s" + std::to_string(i / 5)});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto split = split_dataset(grouped, 0.2, seed);
      CHECK(split.train.size() + split.validation.size() == 50);
      CHECK_FALSE(split.validation.empty());
      std::set<std::string> train_subjects;
      for (const auto& e : split.train) train_subjects.insert(e.subject_id);
      for (const auto& e : split.validation) CHECK(train_subjects.count(e.subject_id) == 0);
    }
  }
  SUBCASE("one subject cannot be split") {
    std::vector<ManifestEntry> same;
    for (int i = 0; i < 4; ++i) same.push_back({"c" + std::to_string(i), 0, Modality::kCough, "s"});
    CHECK_THROWS_AS(split_dataset(same, 0.5, 0), SplitInfeasibleError);
  }
}
