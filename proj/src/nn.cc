// src/nn.cc

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

#include "sst/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sst {
namespace nn {

void zero_grads(const ParamList& params) {
  for (const auto& ref : params) ref.param->zero_grad();
}

long count_params(const ParamList& params) {
  long n = 0;
  for (const auto& ref : params) n += ref.param->count();
  return n;
}

void init_fan_in(Param* p, long fan_in, Rng* rng) {
  if (fan_in <= 0) throw InternalError("init_fan_in: fan_in must be positive");
  double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (long i = 0; i < p->value.rows(); ++i)
    for (long j = 0; j < p->value.cols(); ++j)
      p->value(i, j) = rng->uniform(-limit, limit);
}

void init_table(Param* p, Rng* rng) {
  for (long i = 0; i < p->value.rows(); ++i)
    for (long j = 0; j < p->value.cols(); ++j)
      p->value(i, j) = 0.02 * rng->gaussian();
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& x) {
  return x.cwiseMax(0.0);
}

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& pre,
                              const Eigen::MatrixXd& dy) {
  return (pre.array() > 0.0).select(dy, Eigen::MatrixXd::Zero(dy.rows(),
                                                              dy.cols()));
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (long i = 0; i < logits.rows(); ++i) {
    double m = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (long i = 0; i < logits.rows(); ++i) {
    double m = logits.row(i).maxCoeff();
    double lse = std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - m - lse;
  }
  return out;
}

Eigen::MatrixXd dropout_mask(long rows, long cols, double rate, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout rate must lie in [0, 1), got " +
                      std::to_string(rate));
  double keep_scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd mask(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      mask(i, j) = rng->uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

// ---------------------------------------------------------------- Linear

void Linear::setup(long in, long out, bool with_bias, Rng* rng) {
  has_bias = with_bias;
  weight.setup(in, out);
  init_fan_in(&weight, in, rng);
  if (has_bias) bias.setup(1, out);
}

Eigen::MatrixXd Linear::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = x * weight.value;
  if (has_bias) y.rowwise() += bias.value.row(0);
  return y;
}

Eigen::MatrixXd Linear::backward(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& dy) {
  weight.grad.noalias() += x.transpose() * dy;
  if (has_bias) bias.grad.row(0) += dy.colwise().sum();
  return dy * weight.value.transpose();
}

void Linear::collect(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".weight", &weight});
  if (has_bias) out->push_back({prefix + ".bias", &bias});
}

// ------------------------------------------------------------ Conv1dSame

void Conv1dSame::setup(long in, long out, int stride_arg, Rng* rng) {
  if (stride_arg != 1 && stride_arg != 2)
    throw ConfigError("conv stride must be 1 or 2, got " +
                      std::to_string(stride_arg));
  stride = stride_arg;
  in_ch = in;
  weight.setup(3 * in, out);
  init_fan_in(&weight, 3 * in, rng);
  bias.setup(1, out);
}

Eigen::MatrixXd Conv1dSame::forward(const Eigen::MatrixXd& x) const {
  long t_in = x.rows();
  long out_ch = weight.value.cols();
  long t_out = (t_in + stride - 1) / stride;
  Eigen::MatrixXd y(t_out, out_ch);
  y.rowwise() = bias.value.row(0);
  for (long m = 0; m < t_out; ++m) {
    for (int k = 0; k < 3; ++k) {
      long t = stride * m + k - 1;
      if (t < 0 || t >= t_in) continue;
      y.row(m).noalias() +=
          x.row(t) * weight.value.middleRows(k * in_ch, in_ch);
    }
  }
  return y;
}

Eigen::MatrixXd Conv1dSame::backward(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& dy) {
  long t_in = x.rows();
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(t_in, in_ch);
  for (long m = 0; m < dy.rows(); ++m) {
    for (int k = 0; k < 3; ++k) {
      long t = stride * m + k - 1;
      if (t < 0 || t >= t_in) continue;
      weight.grad.middleRows(k * in_ch, in_ch).noalias() +=
          x.row(t).transpose() * dy.row(m);
      dx.row(t).noalias() +=
          dy.row(m) * weight.value.middleRows(k * in_ch, in_ch).transpose();
    }
  }
  bias.grad.row(0) += dy.colwise().sum();
  return dx;
}

void Conv1dSame::collect(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".weight", &weight});
  out->push_back({prefix + ".bias", &bias});
}

// ------------------------------------------------------------ ChannelNorm

void ChannelNorm::setup(long channels) {
  gamma.setup(1, channels);
  gamma.value.setOnes();
  beta.setup(1, channels);
}

Eigen::MatrixXd ChannelNorm::forward(const Eigen::MatrixXd& x,
                                     NormCache* cache) const {
  long t = x.rows(), c = x.cols();
  cache->xhat.resize(t, c);
  cache->inv_sigma.resize(t);
  Eigen::MatrixXd y(t, c);
  for (long i = 0; i < t; ++i) {
    double mu = x.row(i).mean();
    Eigen::ArrayXd centered = x.row(i).array() - mu;
    double var = centered.square().mean();
    double inv_sigma = 1.0 / std::sqrt(var + kEps);
    cache->inv_sigma(i) = inv_sigma;
    cache->xhat.row(i) = (centered * inv_sigma).matrix();
    y.row(i) = cache->xhat.row(i).cwiseProduct(gamma.value.row(0)) +
               beta.value.row(0);
  }
  return y;
}

Eigen::MatrixXd ChannelNorm::backward(const Eigen::MatrixXd& dy,
                                      const NormCache& cache) {
  long t = dy.rows(), c = dy.cols();
  Eigen::MatrixXd dx(t, c);
  for (long i = 0; i < t; ++i) {
    beta.grad.row(0) += dy.row(i);
    gamma.grad.row(0) += dy.row(i).cwiseProduct(cache.xhat.row(i));
    Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(gamma.value.row(0));
    double mean_dxhat = dxhat.mean();
    double mean_dxhat_xhat = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
    dx.row(i) = cache.inv_sigma(i) *
                (dxhat.array() - mean_dxhat -
                 cache.xhat.row(i).array() * mean_dxhat_xhat)
                    .matrix();
  }
  return dx;
}

void ChannelNorm::collect(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".gamma", &gamma});
  out->push_back({prefix + ".beta", &beta});
}

// -------------------------------------------------------------- Embedding

void Embedding::setup(long vocab, long dim, Rng* rng) {
  table.setup(vocab, dim);
  init_table(&table, rng);
}

Eigen::MatrixXd Embedding::forward(const std::vector<int>& ids) const {
  Eigen::MatrixXd out(static_cast<long>(ids.size()), table.value.cols());
  for (long i = 0; i < out.rows(); ++i) {
    int id = ids[static_cast<size_t>(i)];
    if (id < 0 || id >= table.value.rows())
      throw InternalError("embedding id " + std::to_string(id) +
                          " outside table of " +
                          std::to_string(table.value.rows()) + " rows");
    out.row(i) = table.value.row(id);
  }
  return out;
}

void Embedding::backward(const std::vector<int>& ids,
                         const Eigen::MatrixXd& dy) {
  for (long i = 0; i < dy.rows(); ++i)
    table.grad.row(ids[static_cast<size_t>(i)]) += dy.row(i);
}

void Embedding::collect(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".table", &table});
}

// ----------------------------------------------------- RelativeAttention

void RelativeAttention::setup(int dim, int heads, int window_arg, Rng* rng) {
  if (heads <= 0 || dim % heads != 0)
    throw ConfigError("attention dim " + std::to_string(dim) +
                      " not divisible by " + std::to_string(heads) + " heads");
  if (window_arg <= 0)
    throw ConfigError("attention window must be positive, got " +
                      std::to_string(window_arg));
  n_heads = heads;
  window = window_arg;
  wq.setup(dim, dim);
  wk.setup(dim, dim);
  wv.setup(dim, dim);
  wo.setup(dim, dim);
  init_fan_in(&wq, dim, rng);
  init_fan_in(&wk, dim, rng);
  init_fan_in(&wv, dim, rng);
  init_fan_in(&wo, dim, rng);
  bv.setup(1, dim);
  bo.setup(1, dim);
  pos.setup(2L * window + 1, dim / heads);
  init_table(&pos, rng);
}

Eigen::MatrixXd RelativeAttention::forward(const Eigen::MatrixXd& x,
                                           AttnCache* cache) const {
  long t = x.rows();
  long d = wq.value.cols();
  int dh = head_dim();
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache->x = x;
  cache->q.noalias() = x * wq.value;
  cache->k.noalias() = x * wk.value;
  cache->v.noalias() = x * wv.value;
  cache->v.rowwise() += bv.value.row(0);
  cache->attn.assign(static_cast<size_t>(n_heads),
                     Eigen::MatrixXd::Zero(t, 2L * window + 1));
  cache->concat.setZero(t, d);

  Eigen::VectorXd scores(2L * window + 1);
  for (int h = 0; h < n_heads; ++h) {
    auto q = cache->q.middleCols(h * dh, dh);
    auto k = cache->k.middleCols(h * dh, dh);
    auto v = cache->v.middleCols(h * dh, dh);
    Eigen::MatrixXd& attn = cache->attn[static_cast<size_t>(h)];
    for (long i = 0; i < t; ++i) {
      long rlo = std::max(0L, window - i);
      long rhi = std::min(2L * window, t - 1 - i + window);
      double max_score = -std::numeric_limits<double>::infinity();
      for (long r = rlo; r <= rhi; ++r) {
        long j = i + r - window;
        scores(r) = scale * (k.row(j) + pos.value.row(r)).dot(q.row(i));
        max_score = std::max(max_score, scores(r));
      }
      double z = 0.0;
      for (long r = rlo; r <= rhi; ++r) {
        double e = std::exp(scores(r) - max_score);
        attn(i, r) = e;
        z += e;
      }
      for (long r = rlo; r <= rhi; ++r) {
        attn(i, r) /= z;
        long j = i + r - window;
        cache->concat.row(i).segment(h * dh, dh) += attn(i, r) * v.row(j);
      }
    }
  }
  Eigen::MatrixXd y = cache->concat * wo.value;
  y.rowwise() += bo.value.row(0);
  return y;
}

Eigen::MatrixXd RelativeAttention::backward(const Eigen::MatrixXd& dy,
                                            const AttnCache& cache) {
  long t = cache.x.rows();
  long d = wq.value.cols();
  int dh = head_dim();
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  wo.grad.noalias() += cache.concat.transpose() * dy;
  bo.grad.row(0) += dy.colwise().sum();
  Eigen::MatrixXd dconcat = dy * wo.value.transpose();

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(t, d);
  Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(t, d);
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(t, d);

  Eigen::VectorXd dalpha(2L * window + 1);
  for (int h = 0; h < n_heads; ++h) {
    auto q = cache.q.middleCols(h * dh, dh);
    auto k = cache.k.middleCols(h * dh, dh);
    auto v = cache.v.middleCols(h * dh, dh);
    const Eigen::MatrixXd& attn = cache.attn[static_cast<size_t>(h)];
    auto dh_block = dconcat.middleCols(h * dh, dh);
    auto dq_block = dq.middleCols(h * dh, dh);
    auto dk_block = dk.middleCols(h * dh, dh);
    auto dv_block = dv.middleCols(h * dh, dh);
    for (long i = 0; i < t; ++i) {
      long rlo = std::max(0L, window - i);
      long rhi = std::min(2L * window, t - 1 - i + window);
      double weighted_sum = 0.0;
      for (long r = rlo; r <= rhi; ++r) {
        long j = i + r - window;
        dalpha(r) = dh_block.row(i).dot(v.row(j));
        dv_block.row(j) += attn(i, r) * dh_block.row(i);
        weighted_sum += dalpha(r) * attn(i, r);
      }
      for (long r = rlo; r <= rhi; ++r) {
        long j = i + r - window;
        double de = scale * attn(i, r) * (dalpha(r) - weighted_sum);
        dq_block.row(i) += de * (k.row(j) + pos.value.row(r));
        dk_block.row(j) += de * q.row(i);
        pos.grad.row(r) += de * q.row(i);
      }
    }
  }

  wq.grad.noalias() += cache.x.transpose() * dq;
  wk.grad.noalias() += cache.x.transpose() * dk;
  wv.grad.noalias() += cache.x.transpose() * dv;
  bv.grad.row(0) += dv.colwise().sum();
  Eigen::MatrixXd dx = dq * wq.value.transpose();
  dx.noalias() += dk * wk.value.transpose();
  dx.noalias() += dv * wv.value.transpose();
  return dx;
}

void RelativeAttention::collect(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".wq", &wq});
  out->push_back({prefix + ".wk", &wk});
  out->push_back({prefix + ".wv", &wv});
  out->push_back({prefix + ".wo", &wo});
  out->push_back({prefix + ".bv", &bv});
  out->push_back({prefix + ".bo", &bo});
  out->push_back({prefix + ".pos", &pos});
}

// ------------------------------------------------------------ FeedForward

void FeedForward::setup(long dim, long hidden, Rng* rng) {
  lin1.setup(dim, hidden, true, rng);
  lin2.setup(hidden, dim, true, rng);
}

Eigen::MatrixXd FeedForward::forward(const Eigen::MatrixXd& x,
                                     FfCache* cache) const {
  cache->x = x;
  cache->hidden_pre = lin1.forward(x);
  cache->hidden = relu(cache->hidden_pre);
  return lin2.forward(cache->hidden);
}

Eigen::MatrixXd FeedForward::backward(const Eigen::MatrixXd& dy,
                                      const FfCache& cache) {
  Eigen::MatrixXd dhidden = lin2.backward(cache.hidden, dy);
  dhidden = relu_backward(cache.hidden_pre, dhidden);
  return lin1.backward(cache.x, dhidden);
}

void FeedForward::collect(const std::string& prefix, ParamList* out) {
  lin1.collect(prefix + ".lin1", out);
  lin2.collect(prefix + ".lin2", out);
}

// ------------------------------------------------------- TransformerLayer

void TransformerLayer::setup(int dim, int heads, int window, long ff_hidden,
                             Rng* rng) {
  attn.setup(dim, heads, window, rng);
  norm1.setup(dim);
  ff.setup(dim, ff_hidden, rng);
  norm2.setup(dim);
}

Eigen::MatrixXd TransformerLayer::forward(const Eigen::MatrixXd& x,
                                          double dropout, Rng* dropout_rng,
                                          TransformerLayerCache* cache) const {
  Eigen::MatrixXd sub = attn.forward(x, &cache->attn);
  if (dropout_rng != nullptr && dropout > 0.0) {
    cache->drop1 = dropout_mask(sub.rows(), sub.cols(), dropout, dropout_rng);
    sub = sub.cwiseProduct(cache->drop1);
  } else {
    cache->drop1.resize(0, 0);
  }
  cache->a = norm1.forward(x + sub, &cache->norm1);

  Eigen::MatrixXd sub2 = ff.forward(cache->a, &cache->ff);
  if (dropout_rng != nullptr && dropout > 0.0) {
    cache->drop2 =
        dropout_mask(sub2.rows(), sub2.cols(), dropout, dropout_rng);
    sub2 = sub2.cwiseProduct(cache->drop2);
  } else {
    cache->drop2.resize(0, 0);
  }
  return norm2.forward(cache->a + sub2, &cache->norm2);
}

Eigen::MatrixXd TransformerLayer::backward(const Eigen::MatrixXd& dy,
                                           const TransformerLayerCache& cache) {
  Eigen::MatrixXd dres2 = norm2.backward(dy, cache.norm2);
  Eigen::MatrixXd dsub2 = cache.drop2.size() > 0
                              ? dres2.cwiseProduct(cache.drop2).eval()
                              : dres2;
  Eigen::MatrixXd da = dres2 + ff.backward(dsub2, cache.ff);

  Eigen::MatrixXd dres1 = norm1.backward(da, cache.norm1);
  Eigen::MatrixXd dsub1 = cache.drop1.size() > 0
                              ? dres1.cwiseProduct(cache.drop1).eval()
                              : dres1;
  return dres1 + attn.backward(dsub1, cache.attn);
}

void TransformerLayer::collect(const std::string& prefix, ParamList* out) {
  attn.collect(prefix + ".attn", out);
  norm1.collect(prefix + ".norm1", out);
  ff.collect(prefix + ".ff", out);
  norm2.collect(prefix + ".norm2", out);
}

}  // namespace nn
}  // namespace sst
