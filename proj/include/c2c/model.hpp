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
#include <string>
#include <utility>
#include <vector>

#include "c2c/features.hpp"
#include "c2c/rng.hpp"
#include "c2c/tensor.hpp"

namespace c2c {

// Res2 split count inside each SE-Res2 block.
inline constexpr std::size_t kRes2Scale = 4;
inline constexpr double kPoolVarianceFloor = 1e-9;

// ECAPA-TDNN backbone at one eighth of the canonical 512 channels.
struct EtEncoderConfig {
  std::size_t in_dim = 40;
  std::size_t channels = 64;
  std::size_t blocks = 3;
  std::vector<std::size_t> dilations{2, 3, 4};
  std::size_t se_bottleneck = 16;
  std::size_t attn_hidden = 16;
  std::size_t embed_dim = 48;

  void validate() const;
};

struct ClassifierConfig {
  std::size_t hidden_dim = 32;
  std::size_t out_dim = 1;

  void validate() const;
};

struct Conv1dParams {
  Tensor weight;  // [out x in x kernel]
  Tensor bias;    // [out], may be undefined
};

struct LinearParams {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
};

struct SeRes2Params {
  Conv1dParams reduce;             // 1x1, C -> C
  std::vector<Conv1dParams> res2;  // kRes2Scale - 1 dilated 3x1 convs, C/4 -> C/4
  Conv1dParams expand;             // 1x1, C -> C
  LinearParams squeeze;            // C -> bottleneck
  LinearParams excite;             // bottleneck -> C
};

struct AttentivePoolParams {
  Conv1dParams attention;  // 1x1, C -> hidden, with bias
  Tensor context;          // [1 x hidden x 1], no bias
};

struct EtEncoderParams {
  Conv1dParams input;  // 5x1, in_dim -> C
  std::vector<SeRes2Params> blocks;
  Conv1dParams aggregate;  // 1x1, blocks*C -> blocks*C
  AttentivePoolParams pool;
  LinearParams embed;  // 2*blocks*C -> embed_dim
};

struct ClassifierParams {
  LinearParams hidden;
  LinearParams output;
};

// alpha = logistic(raw_alpha), so alpha stays inside (0, 1).
struct AlphaFusion {
  Tensor raw_alpha;

  double alpha() const;
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

EtEncoderParams init_encoder(const EtEncoderConfig& cfg, Rng& rng);
ClassifierParams init_classifier(std::size_t embed_dim, const ClassifierConfig& cfg,
                                 Rng& rng);
AlphaFusion init_fusion(double raw_alpha = 0.0);

void append_parameters(const std::string& prefix, const EtEncoderParams& p,
                       NamedTensors& out);
void append_parameters(const std::string& prefix, const ClassifierParams& p,
                       NamedTensors& out);

// [F x T] constant tensor from a T x F feature matrix.
Tensor features_to_input(const FeatureMatrix& features);

Tensor se_res2_block(const Tensor& x, const SeRes2Params& p, std::size_t dilation);
Tensor attentive_stat_pool(const Tensor& x, const AttentivePoolParams& p);
Tensor et_encoder_forward(const Tensor& input, const EtEncoderConfig& cfg,
                          const EtEncoderParams& p);
Tensor et_encoder_forward(const FeatureMatrix& features, const EtEncoderConfig& cfg,
                          const EtEncoderParams& p);
Tensor classifier_forward(const Tensor& embedding, const ClassifierParams& p);
Tensor fuse_alpha(const Tensor& cough_emb, const Tensor& breath_emb,
                  const AlphaFusion& fusion);

enum class ModelLayout { kSingle, kFused };

// Encoder + classifier, optionally with a second (breath) encoder whose
// embedding is mixed in through AlphaFusion.
class C2CModel {
 public:
  static C2CModel create(ModelLayout layout, const EtEncoderConfig& encoder_cfg,
                         const ClassifierConfig& classifier_cfg, std::uint64_t seed);

  ModelLayout layout() const { return layout_; }
  const EtEncoderConfig& encoder_config() const { return encoder_cfg_; }
  const ClassifierConfig& classifier_config() const { return classifier_cfg_; }

  // Probability of the positive class, a one-element tensor. `breath` is
  // required for the fused layout and ignored otherwise.
  Tensor forward(const FeatureMatrix& primary, const FeatureMatrix* breath = nullptr) const;

  NamedTensors named_parameters() const;
  // Parameters other than the fusion gate.
  std::vector<Tensor> network_parameters() const;
  // Fusion gate only; empty for the single layout.
  std::vector<Tensor> fusion_parameters() const;
  double alpha() const;

  EtEncoderParams& encoder() { return encoder_; }
  EtEncoderParams& breath_encoder() { return breath_encoder_; }
  ClassifierParams& classifier() { return classifier_; }
  AlphaFusion& fusion() { return fusion_; }

 private:
  ModelLayout layout_ = ModelLayout::kSingle;
  EtEncoderConfig encoder_cfg_;
  ClassifierConfig classifier_cfg_;
  EtEncoderParams encoder_;
  EtEncoderParams breath_encoder_;
  ClassifierParams classifier_;
  AlphaFusion fusion_;
};

// Binary checkpoint: "C2CM", u32 version, then per parameter: u32 name
// length, UTF-8 name, u32 rank, rank x u32 dims, float32 LE payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointRecord {
  std::string name;
  ag::Shape shape;
  std::vector<float> values;

  friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const NamedTensors& params);
std::vector<CheckpointRecord> decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const C2CModel& model, const std::filesystem::path& path);
// Copies every record into the model's parameter of the same name. Missing
// names, unknown names and shape mismatches are errors.
void load_checkpoint(C2CModel& model, const std::filesystem::path& path);
void apply_checkpoint(C2CModel& model, const std::vector<CheckpointRecord>& records);

}  // namespace c2c
