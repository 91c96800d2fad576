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

#include "c2c/model.hpp"

#include <cmath>
#include <map>

#include "bytes.hpp"
#include "c2c/errors.hpp"

namespace c2c {

void EtEncoderConfig::validate() const {
  if (in_dim == 0) throw ConfigError("encoder: in_dim must be >= 1");
  if (channels == 0 || channels % kRes2Scale != 0)
    throw ConfigError("encoder: channels must be a positive multiple of " +
                      std::to_string(kRes2Scale));
  if (blocks == 0) throw ConfigError("encoder: blocks must be >= 1");
  if (dilations.size() != blocks)
    throw ConfigError("encoder: need one dilation per block");
  for (auto d : dilations)
    if (d == 0) throw ConfigError("encoder: dilations must be >= 1");
  if (se_bottleneck == 0 || attn_hidden == 0 || embed_dim == 0)
    throw ConfigError("encoder: se_bottleneck, attn_hidden and embed_dim must be >= 1");
}

void ClassifierConfig::validate() const {
  if (hidden_dim == 0) throw ConfigError("classifier: hidden_dim must be >= 1");
  if (out_dim != 1) throw ConfigError("classifier: out_dim must be 1");
}

namespace {

std::vector<double> uniform_values(std::size_t n, double bound, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases alike.
Conv1dParams init_conv(std::size_t out, std::size_t in, std::size_t kernel, bool with_bias,
                       Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * kernel));
  Conv1dParams p;
  p.weight = Tensor::parameter({out, in, kernel}, uniform_values(out * in * kernel, bound, rng));
  if (with_bias) p.bias = Tensor::parameter({out}, uniform_values(out, bound, rng));
  return p;
}

LinearParams init_linear(std::size_t out, std::size_t in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  return {Tensor::parameter({out, in}, uniform_values(out * in, bound, rng)),
          Tensor::parameter({out}, uniform_values(out, bound, rng))};
}

void append(const std::string& name, const Conv1dParams& p, NamedTensors& out) {
  out.emplace_back(name + ".weight", p.weight);
  if (p.bias.defined()) out.emplace_back(name + ".bias", p.bias);
}

void append(const std::string& name, const LinearParams& p, NamedTensors& out) {
  out.emplace_back(name + ".weight", p.weight);
  out.emplace_back(name + ".bias", p.bias);
}

}  // namespace

double AlphaFusion::alpha() const { return ag::sigmoid(raw_alpha.detach()).item(); }

EtEncoderParams init_encoder(const EtEncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t C = cfg.channels;
  const std::size_t width = C / kRes2Scale;
  EtEncoderParams p;
  p.input = init_conv(C, cfg.in_dim, 5, true, rng);
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    SeRes2Params block;
    block.reduce = init_conv(C, C, 1, true, rng);
    for (std::size_t s = 1; s < kRes2Scale; ++s)
      block.res2.push_back(init_conv(width, width, 3, true, rng));
    block.expand = init_conv(C, C, 1, true, rng);
    block.squeeze = init_linear(cfg.se_bottleneck, C, rng);
    block.excite = init_linear(C, cfg.se_bottleneck, rng);
    p.blocks.push_back(std::move(block));
  }
  const std::size_t agg = cfg.blocks * C;
  p.aggregate = init_conv(agg, agg, 1, true, rng);
  p.pool.attention = init_conv(cfg.attn_hidden, agg, 1, true, rng);
  p.pool.context = init_conv(1, cfg.attn_hidden, 1, false, rng).weight;
  p.embed = init_linear(cfg.embed_dim, 2 * agg, rng);
  return p;
}

ClassifierParams init_classifier(std::size_t embed_dim, const ClassifierConfig& cfg,
                                 Rng& rng) {
  cfg.validate();
  return {init_linear(cfg.hidden_dim, embed_dim, rng),
          init_linear(cfg.out_dim, cfg.hidden_dim, rng)};
}

AlphaFusion init_fusion(double raw_alpha) {
  return {Tensor::parameter({1}, {raw_alpha})};
}

void append_parameters(const std::string& prefix, const EtEncoderParams& p,
                       NamedTensors& out) {
  append(prefix + ".input", p.input, out);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& block = p.blocks[b];
    const std::string name = prefix + ".blocks." + std::to_string(b);
    append(name + ".reduce", block.reduce, out);
    for (std::size_t s = 0; s < block.res2.size(); ++s)
      append(name + ".res2." + std::to_string(s), block.res2[s], out);
    append(name + ".expand", block.expand, out);
    append(name + ".se.squeeze", block.squeeze, out);
    append(name + ".se.excite", block.excite, out);
  }
  append(prefix + ".aggregate", p.aggregate, out);
  append(prefix + ".pool.attention", p.pool.attention, out);
  out.emplace_back(prefix + ".pool.context", p.pool.context);
  append(prefix + ".embed", p.embed, out);
}

void append_parameters(const std::string& prefix, const ClassifierParams& p,
                       NamedTensors& out) {
  append(prefix + ".hidden", p.hidden, out);
  append(prefix + ".output", p.output, out);
}

Tensor features_to_input(const FeatureMatrix& features) {
  const std::size_t T = features.frames;
  const std::size_t F = features.bins;
  std::vector<double> values(F * T);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) values[f * T + t] = features.at(t, f);
  return Tensor::constant({F, T}, std::move(values));
}

Tensor se_res2_block(const Tensor& x, const SeRes2Params& p, std::size_t dilation) {
  if (x.rank() != 2) throw ShapeError("se_res2_block: input must be [C x T]");
  const std::size_t C = x.dim(0);
  if (C % kRes2Scale != 0) {
    throw ConfigError("se_res2_block: channel count " + std::to_string(C) +
                      " not divisible by " + std::to_string(kRes2Scale));
  }
  if (p.res2.size() != kRes2Scale - 1)
    throw ConfigError("se_res2_block: expected " + std::to_string(kRes2Scale - 1) +
                      " Res2 convolutions");
  const std::size_t width = C / kRes2Scale;

  const Tensor h = ag::relu(ag::conv1d(x, p.reduce.weight, p.reduce.bias, 1));

  // Res2: the first split passes through, each later split adds the
  // previous output before its own dilated conv.
  std::vector<Tensor> splits;
  splits.reserve(kRes2Scale);
  splits.push_back(ag::slice_rows(h, 0, width));
  Tensor carry;
  for (std::size_t s = 1; s < kRes2Scale; ++s) {
    Tensor part = ag::slice_rows(h, s * width, width);
    if (carry.defined()) part = ag::add(part, carry);
    const auto& conv = p.res2[s - 1];
    carry = ag::relu(ag::conv1d(part, conv.weight, conv.bias, dilation));
    splits.push_back(carry);
  }
  const Tensor merged = ag::conv1d(ag::concat(splits), p.expand.weight, p.expand.bias, 1);

  // Squeeze-excitation gate.
  const Tensor pooled = ag::mean_time(merged);
  const Tensor bottleneck = ag::relu(ag::linear(pooled, p.squeeze.weight, p.squeeze.bias));
  const Tensor gate = ag::sigmoid(ag::linear(bottleneck, p.excite.weight, p.excite.bias));
  return ag::add(ag::scale_rows(merged, gate), x);
}

Tensor attentive_stat_pool(const Tensor& x, const AttentivePoolParams& p) {
  const Tensor hidden =
      ag::tanh(ag::conv1d(x, p.attention.weight, p.attention.bias, 1));
  const Tensor scores = ag::conv1d(hidden, p.context, Tensor(), 1);
  const Tensor weights = ag::softmax_rows(scores);
  const Tensor mean = ag::weighted_time_sum(x, weights);
  const Tensor second = ag::weighted_time_sum(ag::square(x), weights);
  const Tensor variance = ag::sub(second, ag::square(mean));
  const Tensor stddev = ag::sqrt_floor(variance, kPoolVarianceFloor);
  return ag::concat({mean, stddev});
}

Tensor et_encoder_forward(const Tensor& input, const EtEncoderConfig& cfg,
                          const EtEncoderParams& p) {
  if (input.rank() != 2 || input.dim(0) != cfg.in_dim) {
    throw ShapeError("et_encoder_forward: expected [" + std::to_string(cfg.in_dim) +
                     " x T] input, got " + ag::shape_string(input.shape()));
  }
  if (p.blocks.size() != cfg.blocks) throw ConfigError("et_encoder_forward: block count mismatch");
  Tensor h = ag::relu(ag::conv1d(input, p.input.weight, p.input.bias, 1));
  std::vector<Tensor> block_outputs;
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    h = se_res2_block(h, p.blocks[b], cfg.dilations[b]);
    block_outputs.push_back(h);
  }
  const Tensor aggregated =
      ag::conv1d(ag::concat(block_outputs), p.aggregate.weight, p.aggregate.bias, 1);
  const Tensor pooled = attentive_stat_pool(aggregated, p.pool);
  return ag::linear(pooled, p.embed.weight, p.embed.bias);
}

Tensor et_encoder_forward(const FeatureMatrix& features, const EtEncoderConfig& cfg,
                          const EtEncoderParams& p) {
  if (features.bins != cfg.in_dim) {
    throw ShapeError("et_encoder_forward: features have " + std::to_string(features.bins) +
                     " bins, encoder expects " + std::to_string(cfg.in_dim));
  }
  return et_encoder_forward(features_to_input(features), cfg, p);
}

Tensor classifier_forward(const Tensor& embedding, const ClassifierParams& p) {
  const Tensor hidden = ag::relu(ag::linear(embedding, p.hidden.weight, p.hidden.bias));
  return ag::sigmoid(ag::linear(hidden, p.output.weight, p.output.bias));
}

Tensor fuse_alpha(const Tensor& cough_emb, const Tensor& breath_emb,
                  const AlphaFusion& fusion) {
  return ag::convex_mix(cough_emb, breath_emb, ag::sigmoid(fusion.raw_alpha));
}

C2CModel C2CModel::create(ModelLayout layout, const EtEncoderConfig& encoder_cfg,
                          const ClassifierConfig& classifier_cfg, std::uint64_t seed) {
  C2CModel m;
  m.layout_ = layout;
  m.encoder_cfg_ = encoder_cfg;
  m.classifier_cfg_ = classifier_cfg;
  Rng rng(seed);
  m.encoder_ = init_encoder(encoder_cfg, rng);
  m.classifier_ = init_classifier(encoder_cfg.embed_dim, classifier_cfg, rng);
  if (layout == ModelLayout::kFused) {
    m.breath_encoder_ = init_encoder(encoder_cfg, rng);
    m.fusion_ = init_fusion();
  }
  return m;
}

Tensor C2CModel::forward(const FeatureMatrix& primary, const FeatureMatrix* breath) const {
  Tensor embedding = et_encoder_forward(primary, encoder_cfg_, encoder_);
  if (layout_ == ModelLayout::kFused) {
    if (breath == nullptr) throw ConfigError("fused model needs breath features");
    const Tensor breath_emb = et_encoder_forward(*breath, encoder_cfg_, breath_encoder_);
    embedding = fuse_alpha(embedding, breath_emb, fusion_);
  }
  return classifier_forward(embedding, classifier_);
}

NamedTensors C2CModel::named_parameters() const {
  NamedTensors out;
  append_parameters("encoder", encoder_, out);
  if (layout_ == ModelLayout::kFused) append_parameters("breath_encoder", breath_encoder_, out);
  append_parameters("classifier", classifier_, out);
  if (layout_ == ModelLayout::kFused) out.emplace_back("fusion.raw_alpha", fusion_.raw_alpha);
  return out;
}

std::vector<Tensor> C2CModel::network_parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters())
    if (name != "fusion.raw_alpha") out.push_back(t);
  return out;
}

std::vector<Tensor> C2CModel::fusion_parameters() const {
  if (layout_ != ModelLayout::kFused) return {};
  return {fusion_.raw_alpha};
}

double C2CModel::alpha() const {
  return layout_ == ModelLayout::kFused ? fusion_.alpha() : 1.0;
}

std::vector<std::uint8_t> encode_checkpoint(const NamedTensors& params) {
  std::vector<std::uint8_t> out;
  bytes::put_tag(out, "C2CM");
  bytes::put_u32(out, kCheckpointVersion);
  for (const auto& [name, t] : params) {
    bytes::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    bytes::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) bytes::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) bytes::put_f32(out, static_cast<float>(v));
  }
  return out;
}

std::vector<CheckpointRecord> decode_checkpoint(const std::vector<std::uint8_t>& data) {
  bytes::Reader in(data, "checkpoint");
  if (std::string(reinterpret_cast<const char*>(in.take(4)), 4) != "C2CM")
    throw ParseError("checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  std::vector<CheckpointRecord> records;
  while (!in.done()) {
    CheckpointRecord r;
    const std::uint32_t len = in.u32();
    const auto* name = in.take(len);
    r.name.assign(reinterpret_cast<const char*>(name), len);
    const std::uint32_t rank = in.u32();
    if (rank > 8) throw ParseError("checkpoint: implausible rank for " + r.name);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      r.shape.push_back(in.u32());
      count *= r.shape.back();
    }
    if (count * 4 > in.remaining()) throw ParseError("checkpoint: truncated payload for " + r.name);
    r.values.resize(count);
    for (float& v : r.values) v = in.f32();
    records.push_back(std::move(r));
  }
  return records;
}

void save_checkpoint(const C2CModel& model, const std::filesystem::path& path) {
  bytes::write_file(path, encode_checkpoint(model.named_parameters()));
}

void apply_checkpoint(C2CModel& model, const std::vector<CheckpointRecord>& records) {
  std::map<std::string, const CheckpointRecord*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  auto params = model.named_parameters();
  if (by_name.size() != params.size()) {
    throw DataError("checkpoint: holds " + std::to_string(by_name.size()) +
                    " parameters, model has " + std::to_string(params.size()));
  }
  for (auto& [name, t] : params) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint: missing parameter " + name);
    if (it->second->shape != t.shape()) {
      throw DataError("checkpoint: " + name + " has shape " +
                      ag::shape_string(it->second->shape) + ", model expects " +
                      ag::shape_string(t.shape()));
    }
    auto dst = t.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = it->second->values[i];
  }
}

void load_checkpoint(C2CModel& model, const std::filesystem::path& path) {
  apply_checkpoint(model, decode_checkpoint(bytes::read_file(path)));
}

}  // namespace c2c
