// src/model.cc

// Copyright 2026  The sst Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "sst/model.h"

#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace sst {

void ModelConfig::validate() const {
  if (n_channels <= 0) throw ConfigError("model: n_channels must be positive");
  if (n_sessions <= 0) throw ConfigError("model: n_sessions must be positive");
  if (conv_blocks < 1) throw ConfigError("model: need at least one conv block");
  if (model_dim <= 0) throw ConfigError("model: model_dim must be positive");
  if (n_layers < 0) throw ConfigError("model: n_layers must be non-negative");
  if (n_heads <= 0 || model_dim % n_heads != 0)
    throw ConfigError("model: model_dim " + std::to_string(model_dim) +
                      " is not divisible by " + std::to_string(n_heads) +
                      " heads");
  if (ff_hidden <= 0) throw ConfigError("model: ff_hidden must be positive");
  if (window <= 0) throw ConfigError("model: window must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("model: dropout must lie in [0, 1)");
  if (n_features <= 0) throw ConfigError("model: n_features must be positive");
  if (n_phonemes <= 0) throw ConfigError("model: n_phonemes must be positive");
  if (session_dim <= 0)
    throw ConfigError("model: session_dim must be positive");
}

void ConvBlock::setup(long in_ch, long out_ch, Rng* rng) {
  conv_a.setup(in_ch, out_ch, 2, rng);
  norm_a.setup(out_ch);
  conv_b.setup(out_ch, out_ch, 1, rng);
  norm_b.setup(out_ch);
  shortcut.setup(in_ch, out_ch, true, rng);
}

void ConvBlock::collect(const std::string& prefix, nn::ParamList* out) {
  conv_a.collect(prefix + ".conv_a", out);
  norm_a.collect(prefix + ".norm_a", out);
  conv_b.collect(prefix + ".conv_b", out);
  norm_b.collect(prefix + ".norm_b", out);
  shortcut.collect(prefix + ".shortcut", out);
}

namespace {

Eigen::MatrixXd conv_block_forward(const ConvBlock& block,
                                   const Eigen::MatrixXd& x,
                                   ConvBlockCache* cache) {
  cache->x = x;
  cache->a_pre = block.conv_a.forward(x);
  cache->a_normed = block.norm_a.forward(cache->a_pre, &cache->norm_a);
  cache->a_act = nn::relu(cache->a_normed);
  Eigen::MatrixXd main =
      block.norm_b.forward(block.conv_b.forward(cache->a_act),
                           &cache->norm_b);
  long t_out = cache->a_pre.rows();
  cache->sub.resize(t_out, x.cols());
  for (long m = 0; m < t_out; ++m) cache->sub.row(m) = x.row(2 * m);
  cache->out_pre = main + block.shortcut.forward(cache->sub);
  return nn::relu(cache->out_pre);
}

Eigen::MatrixXd conv_block_backward(ConvBlock* block, const Eigen::MatrixXd& dy,
                                    const ConvBlockCache& cache) {
  Eigen::MatrixXd dpre = nn::relu_backward(cache.out_pre, dy);
  Eigen::MatrixXd dsub = block->shortcut.backward(cache.sub, dpre);
  Eigen::MatrixXd db_pre = block->norm_b.backward(dpre, cache.norm_b);
  Eigen::MatrixXd da_act = block->conv_b.backward(cache.a_act, db_pre);
  Eigen::MatrixXd da_normed = nn::relu_backward(cache.a_normed, da_act);
  Eigen::MatrixXd da_pre = block->norm_a.backward(da_normed, cache.norm_a);
  Eigen::MatrixXd dx = block->conv_a.backward(cache.x, da_pre);
  for (long m = 0; m < dsub.rows(); ++m) dx.row(2 * m) += dsub.row(m);
  return dx;
}

}  // namespace

SstModel::SstModel(const ModelConfig& config, uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  blocks_.resize(static_cast<size_t>(config_.conv_blocks));
  long in_ch = config_.n_channels;
  for (auto& block : blocks_) {
    block.setup(in_ch, config_.model_dim, &rng);
    in_ch = config_.model_dim;
  }
  session_embed_.setup(config_.n_sessions, config_.session_dim, &rng);
  session_proj_.setup(config_.session_dim, config_.model_dim, false, &rng);
  layers_.resize(static_cast<size_t>(config_.n_layers));
  for (auto& layer : layers_)
    layer.setup(static_cast<int>(config_.model_dim), config_.n_heads,
                config_.window, config_.ff_hidden, &rng);
  head_feat_.setup(config_.model_dim, config_.n_features, true, &rng);
  head_phone_.setup(config_.model_dim, config_.n_phonemes, true, &rng);
}

ModelOutput SstModel::forward(const Eigen::MatrixXd& samples,
                              const std::vector<int>& sessions,
                              Rng* dropout_rng, ModelCache* cache) const {
  if (samples.rows() == 0) throw InputError("model: empty input");
  if (samples.cols() != config_.n_channels)
    throw InputError("model: input has " + std::to_string(samples.cols()) +
                     " channels, expected " +
                     std::to_string(config_.n_channels));

  cache->conv.resize(blocks_.size());
  Eigen::MatrixXd h = samples;
  for (size_t i = 0; i < blocks_.size(); ++i)
    h = conv_block_forward(blocks_[i], h, &cache->conv[i]);

  if (static_cast<long>(sessions.size()) != h.rows())
    throw InputError("model: " + std::to_string(sessions.size()) +
                     " session ids for " + std::to_string(h.rows()) +
                     " frames");
  for (int s : sessions)
    if (s < 0 || s >= config_.n_sessions)
      throw InputError("model: session id " + std::to_string(s) +
                       " outside table of " +
                       std::to_string(config_.n_sessions));
  cache->sessions = sessions;
  cache->session_vecs = session_embed_.forward(sessions);
  cache->trans_in = h + session_proj_.forward(cache->session_vecs);

  cache->layers.resize(layers_.size());
  Eigen::MatrixXd z = cache->trans_in;
  for (size_t i = 0; i < layers_.size(); ++i)
    z = layers_[i].forward(z, config_.dropout, dropout_rng, &cache->layers[i]);
  cache->trans_out = z;

  ModelOutput out;
  out.features = head_feat_.forward(z);
  out.phone_logits = head_phone_.forward(z);
  return out;
}

ModelOutput SstModel::forward(const Eigen::MatrixXd& samples, int session,
                              Rng* dropout_rng, ModelCache* cache) const {
  long frames =
      (samples.rows() + config_.downsample() - 1) / config_.downsample();
  std::vector<int> sessions(static_cast<size_t>(frames), session);
  return forward(samples, sessions, dropout_rng, cache);
}

Eigen::MatrixXd SstModel::backward(const Eigen::MatrixXd& d_features,
                                   const Eigen::MatrixXd& d_phone_logits,
                                   const ModelCache& cache) {
  Eigen::MatrixXd dz = head_feat_.backward(cache.trans_out, d_features);
  dz += head_phone_.backward(cache.trans_out, d_phone_logits);
  for (size_t i = layers_.size(); i-- > 0;)
    dz = layers_[i].backward(dz, cache.layers[i]);

  Eigen::MatrixXd d_svecs = session_proj_.backward(cache.session_vecs, dz);
  session_embed_.backward(cache.sessions, d_svecs);

  Eigen::MatrixXd dh = dz;
  for (size_t i = blocks_.size(); i-- > 0;)
    dh = conv_block_backward(&blocks_[i], dh, cache.conv[i]);
  return dh;
}

nn::ParamList SstModel::params() {
  nn::ParamList list;
  for (size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].collect("conv" + std::to_string(i), &list);
  session_embed_.collect("session", &list);
  session_proj_.collect("session_proj", &list);
  for (size_t i = 0; i < layers_.size(); ++i)
    layers_[i].collect("layer" + std::to_string(i), &list);
  head_feat_.collect("head_feat", &list);
  head_phone_.collect("head_phone", &list);
  return list;
}

long expected_param_count(const ModelConfig& c) {
  long d = c.model_dim;
  long total = 0;
  long in_ch = c.n_channels;
  for (int i = 0; i < c.conv_blocks; ++i) {
    total += 3 * in_ch * d + d;  // conv_a
    total += 2 * d;              // norm_a
    total += 3 * d * d + d;      // conv_b
    total += 2 * d;              // norm_b
    total += in_ch * d + d;      // shortcut
    in_ch = d;
  }
  total += c.n_sessions * c.session_dim;  // embedding table
  total += c.session_dim * d;             // bias-free projection
  long per_layer = 4 * d * d + 2 * d                    // attention projections
                   + (2L * c.window + 1) * (d / c.n_heads)  // position table
                   + 2 * (2 * d)                        // the two norms
                   + d * c.ff_hidden + c.ff_hidden      // feed forward in
                   + c.ff_hidden * d + d;               // feed forward out
  total += c.n_layers * per_layer;
  total += d * c.n_features + c.n_features;  // feature head
  total += d * c.n_phonemes + c.n_phonemes;  // phoneme head
  return total;
}

namespace {

constexpr char kMagic[4] = {'M', 'P', 'R', 'M'};
constexpr uint16_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, SstModel* model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path);
  out.write(kMagic, 4);
  write_u16(out, kVersion);
  const ModelConfig& c = model->config();
  write_u32(out, static_cast<uint32_t>(c.n_channels));
  write_u32(out, static_cast<uint32_t>(c.n_sessions));
  write_u32(out, static_cast<uint32_t>(c.conv_blocks));
  write_u32(out, static_cast<uint32_t>(c.model_dim));
  write_u32(out, static_cast<uint32_t>(c.n_layers));
  write_u32(out, static_cast<uint32_t>(c.n_heads));
  write_u32(out, static_cast<uint32_t>(c.ff_hidden));
  write_u32(out, static_cast<uint32_t>(c.window));
  write_u32(out, static_cast<uint32_t>(c.n_features));
  write_u32(out, static_cast<uint32_t>(c.n_phonemes));
  write_u32(out, static_cast<uint32_t>(c.session_dim));
  write_f32(out, static_cast<float>(c.dropout));
  for (const auto& ref : model->params()) {
    write_u16(out, static_cast<uint16_t>(ref.name.size()));
    out.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
    out.put(static_cast<char>(2));  // rank
    const Eigen::MatrixXd& v = ref.param->value;
    write_u64(out, static_cast<uint64_t>(v.rows()));
    write_u64(out, static_cast<uint64_t>(v.cols()));
    for (long i = 0; i < v.rows(); ++i)
      for (long j = 0; j < v.cols(); ++j)
        write_f32(out, static_cast<float>(v(i, j)));
  }
  if (!out) throw InputError("write failed for checkpoint " + path);
}

SstModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a model checkpoint: " + path);
  uint16_t version = read_u16(in, path);
  if (version != kVersion)
    throw DataError("unsupported checkpoint version " +
                    std::to_string(version) + " in " + path);
  ModelConfig c;
  c.n_channels = read_u32(in, path);
  c.n_sessions = read_u32(in, path);
  c.conv_blocks = static_cast<int>(read_u32(in, path));
  c.model_dim = read_u32(in, path);
  c.n_layers = static_cast<int>(read_u32(in, path));
  c.n_heads = static_cast<int>(read_u32(in, path));
  c.ff_hidden = read_u32(in, path);
  c.window = static_cast<int>(read_u32(in, path));
  c.n_features = read_u32(in, path);
  c.n_phonemes = read_u32(in, path);
  c.session_dim = read_u32(in, path);
  c.dropout = read_f32(in, path);

  SstModel model(c, 0);
  std::unordered_map<std::string, nn::Param*> by_name;
  for (const auto& ref : model.params()) by_name[ref.name] = ref.param;
  std::unordered_set<std::string> seen;

  while (true) {
    in.peek();
    if (in.eof()) break;
    uint16_t name_len = read_u16(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("truncated read: tensor name in " + path);
    int rank = in.get();
    if (rank != 2)
      throw DataError("tensor " + name + " in " + path + " has rank " +
                      std::to_string(rank) + ", expected 2");
    long rows = static_cast<long>(read_u64(in, path));
    long cols = static_cast<long>(read_u64(in, path));
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw DataError("unknown tensor " + name + " in " + path);
    Eigen::MatrixXd& v = it->second->value;
    if (v.rows() != rows || v.cols() != cols)
      throw DataError("tensor " + name + " in " + path + " is " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected " + std::to_string(v.rows()) + "x" +
                      std::to_string(v.cols()));
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j)
        v(i, j) = read_f32(in, path + " tensor " + name);
    seen.insert(name);
  }
  for (const auto& [name, param] : by_name) {
    (void)param;
    if (seen.find(name) == seen.end())
      throw DataError("checkpoint " + path + " is missing tensor " + name);
  }
  return model;
}

}  // namespace sst
