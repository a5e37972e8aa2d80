// sst/model.h

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

// The transduction model: a stack of strided residual convolution blocks
// downsamples the processed signal from sample rate to frame rate, a session
// embedding is added per frame, a Transformer encoder with relative-position
// attention provides context, and two linear heads emit predicted speech
// features and phoneme logits.

#ifndef SST_MODEL_H_
#define SST_MODEL_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sst/nn.h"

namespace sst {

struct ModelConfig {
  long n_channels = 8;     // electrodes in the processed signal
  long n_sessions = 1;     // rows in the session embedding table
  int conv_blocks = 3;     // each block halves the time axis
  long model_dim = 768;
  int n_layers = 6;
  int n_heads = 8;
  long ff_hidden = 3072;
  int window = 100;        // relative-attention half width, in frames
  double dropout = 0.1;
  long n_features = 26;    // predicted speech feature dimensions
  long n_phonemes = 40;
  long session_dim = 32;

  long downsample() const { return 1L << conv_blocks; }
  void validate() const;  // throws ConfigError
};

// Strided residual block: a width-3 stride-2 convolution and a width-3
// stride-1 convolution on the main path, each followed by channel
// normalization with a ReLU in between, plus a width-1 stride-2 projection
// shortcut.  The sum is passed through a final ReLU.
struct ConvBlock {
  nn::Conv1dSame conv_a;   // stride 2
  nn::ChannelNorm norm_a;
  nn::Conv1dSame conv_b;   // stride 1
  nn::ChannelNorm norm_b;
  nn::Linear shortcut;

  void setup(long in_ch, long out_ch, Rng* rng);
  void collect(const std::string& prefix, nn::ParamList* out);
};

struct ConvBlockCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd a_pre;
  nn::NormCache norm_a;
  Eigen::MatrixXd a_normed;
  Eigen::MatrixXd a_act;
  nn::NormCache norm_b;
  Eigen::MatrixXd sub;
  Eigen::MatrixXd out_pre;
};

struct ModelCache {
  std::vector<ConvBlockCache> conv;
  std::vector<int> sessions;        // one id per output frame
  Eigen::MatrixXd session_vecs;     // embedding rows before projection
  Eigen::MatrixXd trans_in;         // conv output plus session projection
  std::vector<nn::TransformerLayerCache> layers;
  Eigen::MatrixXd trans_out;
};

struct ModelOutput {
  Eigen::MatrixXd features;      // n_frames x n_features
  Eigen::MatrixXd phone_logits;  // n_frames x n_phonemes
};

class SstModel {
 public:
  SstModel() = default;
  // Builds parameters from the seed, deterministically.
  SstModel(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // samples is n_samples x n_channels; sessions holds one id per output
  // frame (n_samples / downsample, rounded up).  Dropout is active only
  // when dropout_rng is non-null.
  ModelOutput forward(const Eigen::MatrixXd& samples,
                      const std::vector<int>& sessions, Rng* dropout_rng,
                      ModelCache* cache) const;
  // Convenience wrapper for a whole utterance from one session.
  ModelOutput forward(const Eigen::MatrixXd& samples, int session,
                      Rng* dropout_rng, ModelCache* cache) const;

  // Accumulates parameter gradients for the forward pass recorded in cache
  // and returns the gradient with respect to the input samples.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& d_features,
                           const Eigen::MatrixXd& d_phone_logits,
                           const ModelCache& cache);

  // Canonical parameter order; stable across runs and checkpoint cycles.
  nn::ParamList params();

 private:
  ModelConfig config_;
  std::vector<ConvBlock> blocks_;
  nn::Embedding session_embed_;
  nn::Linear session_proj_;  // bias free, so session id 0 with a zeroed
                             // table row contributes exactly nothing
  std::vector<nn::TransformerLayer> layers_;
  nn::Linear head_feat_;
  nn::Linear head_phone_;
};

// Closed-form parameter count for a configuration; the unit tests hold this
// equal to the instantiated model.
long expected_param_count(const ModelConfig& config);

// Checkpoint file ("MPRM"): config block, then named f32 tensors until EOF.
void save_checkpoint(const std::string& path, SstModel* model);
SstModel load_checkpoint(const std::string& path);

}  // namespace sst

#endif  // SST_MODEL_H_
