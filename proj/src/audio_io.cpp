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

#include "c2c/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

#include "bytes.hpp"
#include "c2c/errors.hpp"
#include "c2c/rng.hpp"

namespace c2c {

namespace {

using bytes::put_tag;
using bytes::put_u16;
using bytes::put_u32;
using bytes::read_u16;
using bytes::read_u32;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_fmt(const std::uint8_t* p, std::uint32_t size) {
  if (size < 16) throw ParseError("wav: 'fmt ' chunk too small");
  FormatChunk fmt;
  fmt.format = read_u16(p);
  fmt.channels = read_u16(p + 2);
  fmt.sample_rate = read_u32(p + 4);
  fmt.bits = read_u16(p + 14);
  if (fmt.format == kFormatExtensible) {
    if (size < 40) throw ParseError("wav: extensible 'fmt ' chunk too small");
    fmt.format = read_u16(p + 24);
  }
  if (fmt.sample_rate == 0) throw ParseError("wav: 'fmt ' chunk has zero sample rate");
  if (fmt.channels == 0) throw ParseError("wav: 'fmt ' chunk has zero channels");
  return fmt;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

const char* modality_name(Modality m) {
  return m == Modality::kCough ? "cough" : "breath";
}

Modality parse_modality(const std::string& text) {
  if (text == "cough") return Modality::kCough;
  if (text == "breath") return Modality::kBreath;
  throw ValueError("unknown modality '" + text + "'");
}

AudioClip decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw ParseError("wav: missing 'RIFF' chunk");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ParseError("wav: 'RIFF' chunk is not of type 'WAVE'");

  FormatChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string tag(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Writers that stream audio sometimes leave a bogus data size; accept
      // the truncated payload but reject any other short chunk.
      if (tag != "data") throw ParseError("wav: '" + tag + "' chunk overruns file");
      data = bytes.data() + body;
      data_size = static_cast<std::uint32_t>(bytes.size() - body);
      have_data = true;
      break;
    }
    if (tag == "fmt ") {
      fmt = parse_fmt(bytes.data() + body, size);
      have_fmt = true;
    } else if (tag == "data") {
      data = bytes.data() + body;
      data_size = size;
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw ParseError("wav: missing 'fmt ' chunk");
  if (!have_data) throw ParseError("wav: missing 'data' chunk");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedFormatError("wav: unsupported encoding (format " +
                                 std::to_string(fmt.format) + ", " +
                                 std::to_string(fmt.bits) + " bits)");
  }
  if (fmt.channels > 2) {
    throw UnsupportedFormatError("wav: unsupported channel count " +
                                 std::to_string(fmt.channels));
  }
  if (data_size == 0) throw EmptyAudioError("wav: 'data' chunk is empty");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw EmptyAudioError("wav: 'data' chunk holds no complete frame");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + f * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(p);
        float fv;
        std::memcpy(&fv, &raw, sizeof fv);
        if (!std::isfinite(fv)) throw ParseError("wav: 'data' chunk has non-finite sample");
        v = std::clamp(static_cast<double>(fv), -1.0, 1.0);
      }
      acc += v;
    }
    clip.samples[f] = acc / fmt.channels;
  }
  return clip;
}

AudioClip load_wav(const std::filesystem::path& path) {
  const auto data = bytes::read_file(path);
  try {
    return decode_wav(data);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  } catch (const EmptyAudioError& e) {
    throw EmptyAudioError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double x : clip.samples) {
    const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  bytes::write_file(path, encode_wav(clip));
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ConfigError("resample: target rate must be positive");
  if (clip.sample_rate == target_rate) return clip;
  const std::size_t n_in = clip.samples.size();
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const auto n_out = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(n_in) * ratio)));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * step;
    auto i0 = static_cast<std::size_t>(pos);
    if (i0 >= n_in - 1) {
      out.samples[j] = clip.samples[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    const double a = clip.samples[i0];
    const double b = clip.samples[i0 + 1];
    out.samples[j] = a + frac * (b - a);
  }
  return out;
}

AudioClip load_pipeline_clip(const std::filesystem::path& path) {
  return resample_linear(load_wav(path), kPipelineRate);
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kManifestHeader) {
    throw SchemaError(std::string("manifest line 1: header must be '") +
                      kManifestHeader + "'");
  }
  std::vector<ManifestEntry> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw SchemaError("manifest line " + std::to_string(line_no) +
                        ": expected 4 columns, found " +
                        std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.clip_path = fields[0];
    if (fields[1] == "0") {
      e.label = 0;
    } else if (fields[1] == "1") {
      e.label = 1;
    } else {
      throw ValueError("manifest line " + std::to_string(line_no) +
                       ": label must be 0 or 1, got '" + fields[1] + "'");
    }
    try {
      e.modality = parse_modality(fields[2]);
    } catch (const ValueError& err) {
      throw ValueError("manifest line " + std::to_string(line_no) + ": " +
                       err.what());
    }
    e.subject_id = fields[3];
    if (e.clip_path.empty()) {
      throw SchemaError("manifest line " + std::to_string(line_no) +
                        ": empty clip_path");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  const std::string text = bytes::read_text(path);
  try {
    return parse_manifest(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  } catch (const ValueError& e) {
    throw ValueError(path.string() + ": " + e.what());
  }
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out = kManifestHeader;
  out += '\n';
  for (const auto& e : entries) {
    out += e.clip_path + ',' + std::to_string(e.label) + ',' +
           modality_name(e.modality) + ',' + e.subject_id + '\n';
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  bytes::write_text(path, format_manifest(entries));
}

DatasetSplit split_dataset(const std::vector<ManifestEntry>& entries,
                           double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("split: fraction must lie in (0, 1)");
  if (entries.empty()) throw ConfigError("split: no entries");

  struct Subject {
    std::string id;
    std::vector<std::size_t> members;
    int label = 0;
  };
  std::vector<Subject> subjects;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto [it, inserted] = index_of.emplace(entries[i].subject_id, subjects.size());
    if (inserted) subjects.push_back({entries[i].subject_id, {}, 0});
    subjects[it->second].members.push_back(i);
  }
  const std::size_t n = entries.size();
  if (subjects.size() == 1 && n > 1) {
    throw SplitInfeasibleError("split: all " + std::to_string(n) +
                               " entries share subject '" + subjects[0].id + "'");
  }
  for (auto& s : subjects) {
    std::size_t positives = 0;
    for (auto i : s.members) positives += entries[i].label == 1;
    s.label = 2 * positives > s.members.size() ? 1 : 0;
  }

  std::vector<std::size_t> order(subjects.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));

  // Alternate classes, starting with whichever class the shuffle put first.
  std::vector<std::size_t> by_label[2];
  for (auto s : order) by_label[subjects[s].label].push_back(s);
  std::vector<std::size_t> interleaved;
  int turn = subjects[order.front()].label;
  std::size_t cursor[2] = {0, 0};
  while (interleaved.size() < order.size()) {
    if (cursor[turn] < by_label[turn].size()) {
      interleaved.push_back(by_label[turn][cursor[turn]++]);
    }
    turn = 1 - turn;
  }

  const auto target = static_cast<std::size_t>(
      std::max<long>(1, std::lround(fraction * static_cast<double>(n))));
  std::vector<bool> in_validation(subjects.size(), false);
  std::size_t taken = 0;
  for (auto s : interleaved) {
    if (taken == target) break;
    const std::size_t size = subjects[s].members.size();
    if (taken + size > target) continue;
    if (n > 1 && taken + size >= n) continue;
    in_validation[s] = true;
    taken += size;
  }
  if (taken == 0) {
    // No subject fits the target exactly; take the smallest one instead.
    std::size_t best = interleaved.front();
    for (auto s : interleaved) {
      if (subjects[s].members.size() < subjects[best].members.size()) best = s;
    }
    in_validation[best] = true;
  }

  DatasetSplit split;
  split.seed = seed;
  std::vector<bool> entry_in_validation(n, false);
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    if (!in_validation[s]) continue;
    for (auto i : subjects[s].members) entry_in_validation[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    (entry_in_validation[i] ? split.validation : split.train).push_back(entries[i]);
  }
  return split;
}

}  // namespace c2c
