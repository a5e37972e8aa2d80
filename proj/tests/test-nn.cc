// tests/test-nn.cc

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

// Every layer's hand-derived backward pass is held against central finite
// differences of a scalar probe loss, sum(output .* R) for a fixed random
// R, so dL/doutput = R exactly and any disagreement is the layer's fault.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sst/common.h"
#include "sst/nn.h"
#include "test-util.h"

using namespace sst;
using testing::fd_check;
using testing::random_matrix;

namespace {

// Finite differences through the input matrix; returns the worst
// |analytic - fd| over all entries.
double fd_input(Eigen::MatrixXd* x, const std::function<double()>& loss_fn,
                const Eigen::MatrixXd& dx, double h = 1e-5) {
  double worst = 0.0;
  for (long i = 0; i < x->rows(); ++i)
    for (long j = 0; j < x->cols(); ++j) {
      double saved = (*x)(i, j);
      (*x)(i, j) = saved + h;
      double up = loss_fn();
      (*x)(i, j) = saved - h;
      double down = loss_fn();
      (*x)(i, j) = saved;
      worst = std::max(worst, std::abs(dx(i, j) - (up - down) / (2.0 * h)));
    }
  return worst;
}

}  // namespace

TEST_CASE("relu and its backward agree with the definition") {
  Eigen::MatrixXd x(2, 3);
  x << -1.0, 0.0, 2.0, 3.0, -0.5, 0.25;
  Eigen::MatrixXd y = nn::relu(x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 2) == 2.0);
  Eigen::MatrixXd dy = Eigen::MatrixXd::Ones(2, 3);
  Eigen::MatrixXd dx = nn::relu_backward(x, dy);
  CHECK(dx(0, 0) == 0.0);  // negative input blocks the gradient
  CHECK(dx(0, 1) == 0.0);  // zero is in the flat region
  CHECK(dx(1, 2) == 1.0);
}

TEST_CASE("softmax rows are stable and consistent with log softmax") {
  Eigen::MatrixXd logits(2, 3);
  logits << 1000.0, 999.0, 998.0, -4.0, 0.0, 4.0;
  Eigen::MatrixXd p = nn::softmax_rows(logits);
  Eigen::MatrixXd lp = nn::log_softmax_rows(logits);
  CHECK(p.allFinite());
  CHECK(lp.allFinite());
  for (long i = 0; i < 2; ++i)
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((lp.array().exp().matrix() - p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dropout mask is inverted and mean preserving") {
  Rng rng(3);
  Eigen::MatrixXd m = nn::dropout_mask(400, 50, 0.25, &rng);
  long zeros = 0;
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      if (m(i, j) == 0.0)
        ++zeros;
      else
        CHECK(m(i, j) == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
    }
  double rate = static_cast<double>(zeros) / static_cast<double>(m.size());
  CHECK(rate == doctest::Approx(0.25).epsilon(0.1));
  CHECK(m.mean() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("linear layer gradients match finite differences") {
  Rng rng(17);
  nn::Linear lin;
  lin.setup(4, 3, true, &rng);
  Eigen::MatrixXd x = random_matrix(5, 4, &rng);
  Eigen::MatrixXd probe = random_matrix(5, 3, &rng);
  auto loss = [&]() {
    return (lin.forward(x).array() * probe.array()).sum();
  };

  nn::ParamList params;
  lin.collect("lin", &params);
  nn::zero_grads(params);
  Eigen::MatrixXd dx = lin.backward(x, probe);

  auto report = fd_check(params, loss);
  CHECK(report.failures == 0);
  CHECK(fd_input(&x, loss, dx) < 1e-7);
}

TEST_CASE("bias-free linear exposes no bias parameter") {
  Rng rng(2);
  nn::Linear lin;
  lin.setup(4, 3, false, &rng);
  nn::ParamList params;
  lin.collect("lin", &params);
  CHECK(params.size() == 1);
  CHECK(params[0].name == "lin.weight");
  CHECK(lin.forward(Eigen::MatrixXd::Zero(2, 4)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("width-3 convolution matches an explicit loop") {
  Rng rng(23);
  nn::Conv1dSame conv;
  conv.setup(2, 3, 1, &rng);
  Eigen::MatrixXd x = random_matrix(6, 2, &rng);
  Eigen::MatrixXd y = conv.forward(x);
  REQUIRE(y.rows() == 6);
  for (long t = 0; t < 6; ++t) {
    Eigen::RowVectorXd want = conv.bias.value;
    for (int k = 0; k < 3; ++k) {
      long src = t + k - 1;
      if (src < 0 || src >= 6) continue;
      want += x.row(src) * conv.weight.value.middleRows(2 * k, 2);
    }
    CHECK((y.row(t) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("strided convolution gradients match finite differences") {
  for (int stride : {1, 2}) {
    for (long t : {6L, 7L}) {
      Rng rng(29 + stride);
      nn::Conv1dSame conv;
      conv.setup(3, 4, stride, &rng);
      Eigen::MatrixXd x = random_matrix(t, 3, &rng);
      long t_out = (t + stride - 1) / stride;
      Eigen::MatrixXd probe = random_matrix(t_out, 4, &rng);
      auto loss = [&]() {
        return (conv.forward(x).array() * probe.array()).sum();
      };

      nn::ParamList params;
      conv.collect("conv", &params);
      nn::zero_grads(params);
      Eigen::MatrixXd dx = conv.backward(x, probe);

      INFO("stride ", stride, ", length ", t);
      auto report = fd_check(params, loss);
      CHECK(report.failures == 0);
      CHECK(fd_input(&x, loss, dx) < 1e-7);
    }
  }
}

TEST_CASE("channel norm normalizes each timestep") {
  Rng rng(31);
  nn::ChannelNorm norm;
  norm.setup(6);
  Eigen::MatrixXd x = random_matrix(4, 6, &rng, 3.0);
  nn::NormCache cache;
  Eigen::MatrixXd y = norm.forward(x, &cache);
  // gamma starts at one and beta at zero, so rows come out standardized
  for (long i = 0; i < y.rows(); ++i) {
    CHECK(std::abs(y.row(i).mean()) < 1e-12);
    double var = y.row(i).squaredNorm() / 6.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("channel norm gradients match finite differences") {
  Rng rng(37);
  nn::ChannelNorm norm;
  norm.setup(5);
  // shift the affine parameters off their setup values
  norm.gamma.value = random_matrix(1, 5, &rng, 0.5).array() + 1.0;
  norm.beta.value = random_matrix(1, 5, &rng, 0.5);
  Eigen::MatrixXd x = random_matrix(7, 5, &rng);
  Eigen::MatrixXd probe = random_matrix(7, 5, &rng);
  auto loss = [&]() {
    nn::NormCache c;
    return (norm.forward(x, &c).array() * probe.array()).sum();
  };

  nn::ParamList params;
  norm.collect("norm", &params);
  nn::zero_grads(params);
  nn::NormCache cache;
  norm.forward(x, &cache);
  Eigen::MatrixXd dx = norm.backward(probe, cache);

  auto report = fd_check(params, loss);
  CHECK(report.failures == 0);
  CHECK(fd_input(&x, loss, dx) < 1e-7);
}

TEST_CASE("embedding gathers rows and scatters gradients") {
  Rng rng(41);
  nn::Embedding emb;
  emb.setup(5, 3, &rng);
  std::vector<int> ids = {4, 0, 4, 2};
  Eigen::MatrixXd y = emb.forward(ids);
  REQUIRE(y.rows() == 4);
  CHECK((y.row(0) - emb.table.value.row(4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((y.row(2) - emb.table.value.row(4)).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd probe = random_matrix(4, 3, &rng);
  nn::ParamList params;
  emb.collect("emb", &params);
  nn::zero_grads(params);
  emb.backward(ids, probe);
  auto loss = [&]() {
    return (emb.forward(ids).array() * probe.array()).sum();
  };
  auto report = fd_check(params, loss);
  CHECK(report.failures == 0);
  // row 4 is used twice, so its gradient is the sum of both probe rows
  CHECK((emb.table.grad.row(4) - (probe.row(0) + probe.row(2)))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(emb.table.grad.row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relative attention stays inside its window") {
  Rng rng(43);
  nn::RelativeAttention attn;
  attn.setup(8, 2, 2, &rng);
  Eigen::MatrixXd x = random_matrix(12, 8, &rng);
  nn::AttnCache cache;
  Eigen::MatrixXd y = attn.forward(x, &cache);

  // Banded attention rows are distributions over the visible offsets.
  for (const auto& head : cache.attn)
    for (long i = 0; i < head.rows(); ++i)
      CHECK(head.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));

  // Perturbing a frame beyond the window cannot move the output.
  Eigen::MatrixXd x2 = x;
  x2.row(9).array() += 10.0;
  nn::AttnCache cache2;
  Eigen::MatrixXd y2 = attn.forward(x2, &cache2);
  for (long i = 0; i < 12; ++i) {
    double diff = (y2.row(i) - y.row(i)).cwiseAbs().maxCoeff();
    if (std::abs(i - 9L) <= 2)
      continue;  // inside the window the row may legitimately change
    INFO("row ", i);
    CHECK(diff == 0.0);
  }
  CHECK((y2.row(9) - y.row(9)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("relative attention gradients match finite differences") {
  // The window is both smaller and larger than the sequence to exercise
  // the clamped offsets at the band edges.
  for (int window : {2, 16}) {
    Rng rng(47 + window);
    nn::RelativeAttention attn;
    attn.setup(6, 3, window, &rng);
    Eigen::MatrixXd x = random_matrix(9, 6, &rng);
    Eigen::MatrixXd probe = random_matrix(9, 6, &rng);
    auto loss = [&]() {
      nn::AttnCache c;
      return (attn.forward(x, &c).array() * probe.array()).sum();
    };

    nn::ParamList params;
    attn.collect("attn", &params);
    nn::zero_grads(params);
    nn::AttnCache cache;
    attn.forward(x, &cache);
    Eigen::MatrixXd dx = attn.backward(probe, cache);

    INFO("window ", window);
    auto report = fd_check(params, loss);
    INFO("worst parameter ", report.worst, " rel ", report.max_rel);
    CHECK(report.failures == 0);
    CHECK(fd_input(&x, loss, dx) < 1e-7);
  }
}

TEST_CASE("feed forward gradients match finite differences") {
  Rng rng(53);
  nn::FeedForward ff;
  ff.setup(5, 11, &rng);
  Eigen::MatrixXd x = random_matrix(6, 5, &rng);
  Eigen::MatrixXd probe = random_matrix(6, 5, &rng);
  auto loss = [&]() {
    nn::FfCache c;
    return (ff.forward(x, &c).array() * probe.array()).sum();
  };

  nn::ParamList params;
  ff.collect("ff", &params);
  nn::zero_grads(params);
  nn::FfCache cache;
  ff.forward(x, &cache);
  Eigen::MatrixXd dx = ff.backward(probe, cache);

  auto report = fd_check(params, loss);
  CHECK(report.failures == 0);
  CHECK(fd_input(&x, loss, dx) < 1e-7);
}

TEST_CASE("transformer layer gradients match finite differences") {
  Rng rng(59);
  nn::TransformerLayer layer;
  layer.setup(6, 2, 3, 13, &rng);
  Eigen::MatrixXd x = random_matrix(8, 6, &rng);
  Eigen::MatrixXd probe = random_matrix(8, 6, &rng);
  auto loss = [&]() {
    nn::TransformerLayerCache c;
    return (layer.forward(x, 0.0, nullptr, &c).array() * probe.array()).sum();
  };

  nn::ParamList params;
  layer.collect("layer", &params);
  nn::zero_grads(params);
  nn::TransformerLayerCache cache;
  layer.forward(x, 0.0, nullptr, &cache);
  Eigen::MatrixXd dx = layer.backward(probe, cache);

  auto report = fd_check(params, loss);
  INFO("worst parameter ", report.worst, " rel ", report.max_rel);
  CHECK(report.failures == 0);
  CHECK(fd_input(&x, loss, dx) < 1e-7);
}

TEST_CASE("transformer layer dropout is reproducible from the rng seed") {
  Rng init(61);
  nn::TransformerLayer layer;
  layer.setup(6, 2, 3, 13, &init);
  Eigen::MatrixXd x = random_matrix(8, 6, &init);

  Rng d1(99), d2(99), d3(100);
  nn::TransformerLayerCache c1, c2, c3;
  Eigen::MatrixXd y1 = layer.forward(x, 0.5, &d1, &c1);
  Eigen::MatrixXd y2 = layer.forward(x, 0.5, &d2, &c2);
  Eigen::MatrixXd y3 = layer.forward(x, 0.5, &d3, &c3);
  CHECK((y1 - y2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((y1 - y3).cwiseAbs().maxCoeff() > 0.0);

  // Without an rng the caches carry no masks and the pass is deterministic.
  nn::TransformerLayerCache ce;
  layer.forward(x, 0.5, nullptr, &ce);
  CHECK(ce.drop1.size() == 0);
  CHECK(ce.drop2.size() == 0);
}

TEST_CASE("parameter initialization is seed deterministic") {
  Rng a(7), b(7), c(8);
  nn::Linear la, lb, lc;
  la.setup(6, 6, true, &a);
  lb.setup(6, 6, true, &b);
  lc.setup(6, 6, true, &c);
  CHECK((la.weight.value - lb.weight.value).cwiseAbs().maxCoeff() == 0.0);
  CHECK((la.weight.value - lc.weight.value).cwiseAbs().maxCoeff() > 0.0);

  // fan-in scaling keeps the uniform bound at 1/sqrt(in)
  CHECK(la.weight.value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
}
