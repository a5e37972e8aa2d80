// sst/nn.h

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

// Neural-network building blocks over Eigen matrices, double precision
// throughout.  Sequences are time-major: row t is the feature vector at
// timestep t.  Every layer implements an explicit backward pass that
// accumulates parameter gradients and returns the gradient with respect to
// its input, so the whole model can be trained and finite-difference
// checked without an autograd framework.

#ifndef SST_NN_H_
#define SST_NN_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sst/common.h"

namespace sst {
namespace nn {

// A tensor together with its gradient accumulator.
struct Param {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  void setup(long rows, long cols) {
    value.setZero(rows, cols);
    grad.setZero(rows, cols);
  }
  void zero_grad() { grad.setZero(); }
  long count() const { return value.size(); }
};

// Named reference to a parameter, used for optimizer updates, checkpoints
// and finite-difference sweeps.  Order is the canonical serialization order.
struct ParamRef {
  std::string name;
  Param* param;
};
using ParamList = std::vector<ParamRef>;

void zero_grads(const ParamList& params);
long count_params(const ParamList& params);

// Uniform(-limit, limit) with limit = sqrt(1 / fan_in).
void init_fan_in(Param* p, long fan_in, Rng* rng);
// Gaussian with standard deviation 0.02, for embedding-style tables.
void init_table(Param* p, Rng* rng);

Eigen::MatrixXd relu(const Eigen::MatrixXd& x);
// pre is the layer input before the nonlinearity.
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& pre,
                              const Eigen::MatrixXd& dy);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);

// Inverted-dropout mask: entries are 0 with probability rate and
// 1 / (1 - rate) otherwise, so that applying the mask preserves the mean.
Eigen::MatrixXd dropout_mask(long rows, long cols, double rate, Rng* rng);

// y = x W + b.
struct Linear {
  Param weight;  // in x out
  Param bias;    // 1 x out; empty when constructed without a bias
  bool has_bias = true;

  void setup(long in, long out, bool with_bias, Rng* rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  // x must be the same matrix that produced dy.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy);
  void collect(const std::string& prefix, ParamList* out);
};

// Width-3 "same" convolution along time with stride 1 or 2.  The three taps
// are stacked row-wise in weight: rows [k*in, (k+1)*in) hold tap k, where
// tap 0 looks one step back, tap 1 at the current step, tap 2 one ahead.
// Output length is ceil(T / stride); samples outside the input are zero.
struct Conv1dSame {
  int stride = 1;
  long in_ch = 0;
  Param weight;  // (3 * in) x out
  Param bias;    // 1 x out

  void setup(long in, long out, int stride, Rng* rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy);
  void collect(const std::string& prefix, ParamList* out);
};

struct NormCache {
  Eigen::MatrixXd xhat;      // normalized input
  Eigen::VectorXd inv_sigma; // 1 / sqrt(var + eps) per row
};

// Per-timestep normalization across channels with learned gain and shift.
// Statistics never mix timesteps, which keeps the stack shift equivariant.
struct ChannelNorm {
  static constexpr double kEps = 1e-5;
  Param gamma;  // 1 x C
  Param beta;   // 1 x C

  void setup(long channels);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, NormCache* cache) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy, const NormCache& cache);
  void collect(const std::string& prefix, ParamList* out);
};

// Lookup table, one row per symbol.
struct Embedding {
  Param table;  // vocab x dim

  void setup(long vocab, long dim, Rng* rng);
  Eigen::MatrixXd forward(const std::vector<int>& ids) const;
  void backward(const std::vector<int>& ids, const Eigen::MatrixXd& dy);
  void collect(const std::string& prefix, ParamList* out);
};

struct AttnCache {
  Eigen::MatrixXd x;                   // layer input, T x d
  Eigen::MatrixXd q, k, v;             // projections, T x d
  std::vector<Eigen::MatrixXd> attn;   // per head, banded T x (2w+1)
  Eigen::MatrixXd concat;              // head outputs before out proj
};

// Multi-head self attention with learned relative-position offsets.  The
// score between query position i and key position j is
//   e_ij = (k_j + p_{j-i})^T q_i / sqrt(head_dim),
// where p is a (2w+1) x head_dim table indexed by the clamped offset and
// shared across heads, and attention is restricted to |i - j| <= w.
// Query and key projections carry no bias so the score is exactly the
// expression above; value and output projections are affine.
struct RelativeAttention {
  int n_heads = 0;
  int window = 0;
  Param wq, wk, wv, wo;  // d x d
  Param bv, bo;          // 1 x d
  Param pos;             // (2 * window + 1) x head_dim

  void setup(int dim, int heads, int window, Rng* rng);
  int head_dim() const { return static_cast<int>(wq.value.cols()) / n_heads; }
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, AttnCache* cache) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy, const AttnCache& cache);
  void collect(const std::string& prefix, ParamList* out);
};

struct FfCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd hidden_pre;
  Eigen::MatrixXd hidden;
};

// Position-wise feed forward: Linear -> ReLU -> Linear.
struct FeedForward {
  Linear lin1, lin2;

  void setup(long dim, long hidden, Rng* rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, FfCache* cache) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy, const FfCache& cache);
  void collect(const std::string& prefix, ParamList* out);
};

struct TransformerLayerCache {
  AttnCache attn;
  Eigen::MatrixXd drop1;  // scaled dropout mask, or empty in eval mode
  NormCache norm1;
  Eigen::MatrixXd a;      // output of first sublayer, input to feed forward
  FfCache ff;
  Eigen::MatrixXd drop2;
  NormCache norm2;
};

// Post-norm encoder layer.  Dropout (when an rng is supplied) is applied to
// each sublayer output before the residual addition and nowhere else.
struct TransformerLayer {
  RelativeAttention attn;
  ChannelNorm norm1;
  FeedForward ff;
  ChannelNorm norm2;

  void setup(int dim, int heads, int window, long ff_hidden, Rng* rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, double dropout,
                          Rng* dropout_rng, TransformerLayerCache* cache) const;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy,
                           const TransformerLayerCache& cache);
  void collect(const std::string& prefix, ParamList* out);
};

}  // namespace nn
}  // namespace sst

#endif  // SST_NN_H_
