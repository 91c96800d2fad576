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
#include <filesystem>
#include <string>
#include <vector>

namespace c2c {

inline constexpr int kPipelineRate = 16000;

// Mono waveform with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kPipelineRate;

  std::size_t size() const { return samples.size(); }
  double duration_sec() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class Modality { kCough, kBreath };

const char* modality_name(Modality m);
Modality parse_modality(const std::string& text);

struct ManifestEntry {
  std::string clip_path;
  int label = 0;
  Modality modality = Modality::kCough;
  std::string subject_id;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetSplit {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> validation;
  std::uint64_t seed = 0;
};

// Reads RIFF/WAVE with PCM16 or float32 payloads, mono or stereo. Stereo is
// averaged down to mono.
AudioClip load_wav(const std::filesystem::path& path);

// Writes a canonical 44-byte-header PCM16 mono file.
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

// In-memory variants of the above; the file functions are thin wrappers.
AudioClip decode_wav(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

AudioClip resample_linear(const AudioClip& clip, int target_rate);

// Loads a WAV file and brings it to the pipeline rate.
AudioClip load_pipeline_clip(const std::filesystem::path& path);

inline constexpr const char* kManifestHeader =
    "clip_path,label,modality,subject_id";

std::vector<ManifestEntry> parse_manifest(const std::string& text);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

// Subject-disjoint split. The validation side receives round(fraction * n)
// entries (at least one) whenever the subject sizes allow it. Subjects are
// shuffled by seed and then interleaved by label so both classes reach the
// validation side.
DatasetSplit split_dataset(const std::vector<ManifestEntry>& entries,
                           double fraction, std::uint64_t seed);

}  // namespace c2c
