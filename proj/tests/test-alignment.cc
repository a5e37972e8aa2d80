// tests/test-alignment.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sst/alignment.h"
#include "sst/common.h"
#include "sst/phoneme.h"
#include "test-util.h"

using namespace sst;
using testing::brute_dtw;
using testing::random_matrix;

namespace {

// Scalar log softmax written independently of the library's version.
double ref_log_softmax(const Eigen::RowVectorXd& logits, long k) {
  double mx = logits.maxCoeff();
  double sum = 0.0;
  for (long j = 0; j < logits.size(); ++j) sum += std::exp(logits[j] - mx);
  return logits[k] - mx - std::log(sum);
}

bool valid_dtw_path(const std::vector<std::pair<long, long>>& path, long n,
                    long m) {
  if (path.empty()) return false;
  if (path.front() != std::make_pair(0L, 0L)) return false;
  if (path.back() != std::make_pair(n - 1, m - 1)) return false;
  for (size_t k = 1; k < path.size(); ++k) {
    long di = path[k].first - path[k - 1].first;
    long dj = path[k].second - path[k - 1].second;
    if (di < 0 || dj < 0 || di > 1 || dj > 1 || (di == 0 && dj == 0))
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pairwise distance is the row-wise euclidean norm") {
  Eigen::MatrixXd t(2, 2), p(3, 2);
  t << 0.0, 0.0, 3.0, 4.0;
  p << 0.0, 0.0, 3.0, 4.0, 0.0, 1.0;
  Eigen::MatrixXd d = pairwise_distance(t, p);
  REQUIRE(d.rows() == 2);
  REQUIRE(d.cols() == 3);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == doctest::Approx(5.0));
  CHECK(d(1, 0) == doctest::Approx(5.0));
  CHECK(d(1, 2) == doctest::Approx(std::sqrt(9.0 + 9.0)));

  Eigen::MatrixXd wrong(2, 3);
  CHECK_THROWS_AS(pairwise_distance(t, wrong), InputError);
}

TEST_CASE("dtw cost equals brute-force enumeration") {
  Rng rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    long n = 1 + static_cast<long>(rng.randint(7));
    long m = 1 + static_cast<long>(rng.randint(7));
    Eigen::MatrixXd cost(n, m);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < m; ++j)
        // every third trial allows negative entries
        cost(i, j) = trial % 3 == 0 ? rng.uniform(-1.0, 1.0) : rng.uniform();
    DtwResult got = dtw(cost);
    INFO("trial ", trial, ": ", n, "x", m);
    CHECK(got.total_cost == doctest::Approx(brute_dtw(cost)).epsilon(1e-12));
    CHECK(valid_dtw_path(got.path, n, m));

    // The path visits each cell once, so its cost re-adds to the total,
    // and map[i] is the first column the path holds at row i.
    double sum = 0.0;
    for (const auto& [i, j] : got.path) sum += cost(i, j);
    CHECK(sum == doctest::Approx(got.total_cost).epsilon(1e-12));
    std::vector<long> first(static_cast<size_t>(n), -1);
    for (const auto& [i, j] : got.path)
      if (first[static_cast<size_t>(i)] < 0) first[static_cast<size_t>(i)] = j;
    CHECK(got.map == first);
  }
}

TEST_CASE("dtw breaks ties toward the diagonal") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(3, 3);
  DtwResult r = dtw(flat);
  REQUIRE(r.path.size() == 3);
  CHECK(r.path[1] == std::make_pair(1L, 1L));
  CHECK(r.map == std::vector<long>{0, 1, 2});

  // With more columns than rows the leftover moves go through (0,1) steps,
  // but only after the diagonal is exhausted by the backtrace.
  DtwResult wide = dtw(Eigen::MatrixXd::Zero(2, 3));
  CHECK(wide.path.size() == 3);
  CHECK(wide.map == std::vector<long>{0, 2});

  CHECK_THROWS_AS(dtw(Eigen::MatrixXd(0, 0)), InputError);
}

TEST_CASE("aligned loss vanishes on a perfect prediction") {
  Rng rng(73);
  long n = 9, dims = 5, phones = 6;
  Eigen::MatrixXd feats = random_matrix(n, dims, &rng);
  std::vector<int> labels;
  for (long i = 0; i < n; ++i)
    labels.push_back(static_cast<int>(rng.randint(phones)));
  Eigen::MatrixXd post = one_hot_rows(labels, phones);
  Eigen::MatrixXd logits = 40.0 * post;

  AlignmentLoss loss = aligned_loss(feats, post, feats, logits, 0.1, false);
  CHECK(std::abs(loss.total) < 1e-9);
  CHECK(std::abs(loss.feature) < 1e-9);
  CHECK(std::abs(loss.phoneme) < 1e-9);
  for (long i = 0; i < n; ++i) CHECK(loss.map[static_cast<size_t>(i)] == i);
}

TEST_CASE("loss arithmetic matches a scalar recomputation") {
  Rng rng(79);
  long nt = 6, np = 8, dims = 4, phones = 5;
  double lambda = 0.1;
  Eigen::MatrixXd tf = random_matrix(nt, dims, &rng);
  Eigen::MatrixXd pf = random_matrix(np, dims, &rng);
  Eigen::MatrixXd post = one_hot_rows({0, 1, 2, 3, 4, 0}, phones);
  Eigen::MatrixXd logits = random_matrix(np, phones, &rng);

  AlignmentLoss loss = aligned_loss(tf, post, pf, logits, lambda, false);

  // Rebuild the combined cost entry by entry and check the mapped total.
  double feature = 0.0, phoneme = 0.0;
  for (long i = 0; i < nt; ++i) {
    long j = loss.map[static_cast<size_t>(i)];
    double dist = (tf.row(i) - pf.row(j)).norm();
    double cross = 0.0;
    for (long k = 0; k < phones; ++k)
      cross +=
          post(i, k) * std::max(ref_log_softmax(logits.row(j), k), -20.0);
    feature += dist / static_cast<double>(nt);
    phoneme += -lambda * cross / static_cast<double>(nt);
    CHECK(loss.per_frame(i) ==
          doctest::Approx(dist - lambda * cross).epsilon(1e-10));
  }
  CHECK(loss.feature == doctest::Approx(feature).epsilon(1e-10));
  CHECK(loss.phoneme == doctest::Approx(phoneme).epsilon(1e-10));
  CHECK(loss.total == doctest::Approx(feature + phoneme).epsilon(1e-10));

  // The warping path it chose is optimal for the full cost matrix.
  Eigen::MatrixXd cost(nt, np);
  for (long i = 0; i < nt; ++i)
    for (long j = 0; j < np; ++j) {
      double cross = 0.0;
      for (long k = 0; k < phones; ++k)
        cross +=
            post(i, k) * std::max(ref_log_softmax(logits.row(j), k), -20.0);
      cost(i, j) = (tf.row(i) - pf.row(j)).norm() - lambda * cross;
    }
  CHECK(dtw(cost).total_cost ==
        doctest::Approx(brute_dtw(cost)).epsilon(1e-12));
}

TEST_CASE("direct loss gradients match finite differences") {
  Rng rng(83);
  long n = 7, dims = 4, phones = 5;
  double lambda = 0.1;
  Eigen::MatrixXd tf = random_matrix(n, dims, &rng);
  Eigen::MatrixXd pf = random_matrix(n, dims, &rng);
  std::vector<int> labels;
  for (long i = 0; i < n; ++i)
    labels.push_back(static_cast<int>(rng.randint(phones)));
  Eigen::MatrixXd post = one_hot_rows(labels, phones);
  Eigen::MatrixXd logits = random_matrix(n, phones, &rng);

  AlignmentLoss loss = direct_loss(tf, post, pf, logits, lambda, true);
  REQUIRE(loss.d_features.rows() == n);
  REQUIRE(loss.d_logits.rows() == n);

  double h = 1e-6, worst = 0.0;
  auto eval = [&]() {
    return direct_loss(tf, post, pf, logits, lambda, false).total;
  };
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < dims; ++j) {
      double saved = pf(i, j);
      pf(i, j) = saved + h;
      double up = eval();
      pf(i, j) = saved - h;
      double down = eval();
      pf(i, j) = saved;
      worst = std::max(
          worst, std::abs(loss.d_features(i, j) - (up - down) / (2.0 * h)));
    }
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < phones; ++j) {
      double saved = logits(i, j);
      logits(i, j) = saved + h;
      double up = eval();
      logits(i, j) = saved - h;
      double down = eval();
      logits(i, j) = saved;
      worst = std::max(
          worst, std::abs(loss.d_logits(i, j) - (up - down) / (2.0 * h)));
    }
  CHECK(worst < 1e-7);
}

TEST_CASE("aligned loss gradients match finite differences on a stable path") {
  // Well-separated reference rows keep the warping path fixed under the
  // probe perturbations, so the frozen-path gradient is the true one.
  long nt = 5, np = 7, dims = 3, phones = 4;
  double lambda = 0.1;
  Eigen::MatrixXd tf(nt, dims);
  tf << 0, 0, 0, 5, 0, 0, 0, 5, 0, 0, 0, 5, 5, 5, 0;
  Eigen::MatrixXd pf(np, dims);
  pf << 0.1, -0.1, 0.2, 0.2, 0.1, 0, 5.1, 0.1, -0.1, 0.1, 4.9, 0.1, -0.1,
      5.2, 0.1, 0, 0.1, 5.1, 5.1, 4.9, 0.2;
  Eigen::MatrixXd post = one_hot_rows({0, 1, 2, 3, 0}, phones);
  Rng rng(89);
  Eigen::MatrixXd logits = random_matrix(np, phones, &rng);

  AlignmentLoss loss = aligned_loss(tf, post, pf, logits, lambda, true);
  auto eval = [&]() {
    AlignmentLoss l = aligned_loss(tf, post, pf, logits, lambda, false);
    REQUIRE(l.map == loss.map);  // the path must not flip mid-probe
    return l.total;
  };

  double h = 1e-6, worst = 0.0;
  for (long i = 0; i < np; ++i)
    for (long j = 0; j < dims; ++j) {
      double saved = pf(i, j);
      pf(i, j) = saved + h;
      double up = eval();
      pf(i, j) = saved - h;
      double down = eval();
      pf(i, j) = saved;
      worst = std::max(
          worst, std::abs(loss.d_features(i, j) - (up - down) / (2.0 * h)));
    }
  for (long i = 0; i < np; ++i)
    for (long j = 0; j < phones; ++j) {
      double saved = logits(i, j);
      logits(i, j) = saved + h;
      double up = eval();
      logits(i, j) = saved - h;
      double down = eval();
      logits(i, j) = saved;
      worst = std::max(
          worst, std::abs(loss.d_logits(i, j) - (up - down) / (2.0 * h)));
    }
  CHECK(worst < 1e-7);
}

TEST_CASE("log probabilities pinned at the floor stop their gradient") {
  long phones = 4;
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(1, 2);
  Eigen::MatrixXd pf = Eigen::MatrixXd::Zero(1, 2);
  Eigen::MatrixXd post = one_hot_rows({2}, phones);
  Eigen::MatrixXd logits(1, phones);
  logits << 30.0, 0.0, -30.0, 0.0;  // class 2 sits far below the floor

  AlignmentLoss loss = direct_loss(tf, post, pf, logits, 1.0, true);
  // The clamp contributes the constant -(-20) to the loss...
  CHECK(loss.phoneme == doctest::Approx(20.0).epsilon(1e-9));
  // ...and a constant has no logit gradient.
  CHECK(loss.d_logits.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("direct loss tolerates two frames of length mismatch") {
  Rng rng(97);
  long dims = 3, phones = 4;
  Eigen::MatrixXd tf = random_matrix(10, dims, &rng);
  Eigen::MatrixXd post = one_hot_rows({0, 1, 2, 3, 0, 1, 2, 3, 0, 1}, phones);
  Eigen::MatrixXd pf = random_matrix(8, dims, &rng);
  Eigen::MatrixXd logits = random_matrix(8, phones, &rng);

  AlignmentLoss loss = direct_loss(tf, post, pf, logits, 0.1, false);
  CHECK(loss.map.size() == 8);

  Eigen::MatrixXd pf7 = random_matrix(7, dims, &rng);
  Eigen::MatrixXd lg7 = random_matrix(7, phones, &rng);
  CHECK_THROWS_AS(direct_loss(tf, post, pf7, lg7, 0.1, false), DataError);
}

TEST_CASE("alignment rejects inconsistent shapes") {
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(3, 4);
  Eigen::MatrixXd pf = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(3, 4);
  CHECK_THROWS_AS(aligned_loss(Eigen::MatrixXd(0, 2), post, pf, logits, 0.1,
                               false),
                  InputError);
  CHECK_THROWS_AS(aligned_loss(tf, Eigen::MatrixXd::Zero(2, 4), pf, logits,
                               0.1, false),
                  InputError);
  CHECK_THROWS_AS(aligned_loss(tf, post, Eigen::MatrixXd::Zero(3, 3), logits,
                               0.1, false),
                  InputError);
  CHECK_THROWS_AS(aligned_loss(tf, post, pf, Eigen::MatrixXd::Zero(3, 5), 0.1,
                               false),
                  InputError);
}

TEST_CASE("alignment files carry one line per reference frame") {
  testing::TempDir tmp("align");
  Rng rng(101);
  Eigen::MatrixXd tf = random_matrix(4, 2, &rng);
  Eigen::MatrixXd pf = random_matrix(5, 2, &rng);
  Eigen::MatrixXd post = one_hot_rows({0, 1, 0, 1}, 3);
  Eigen::MatrixXd logits = random_matrix(5, 3, &rng);
  AlignmentLoss loss = aligned_loss(tf, post, pf, logits, 0.1, false);

  std::string path = tmp.file("utt.align");
  write_alignment(path, loss);
  std::ifstream in(path);
  std::string line;
  long lines = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    long i, j;
    double cost;
    bool parsed = static_cast<bool>(row >> i >> j >> cost);
    REQUIRE(parsed);
    CHECK(i == lines);
    CHECK(j == loss.map[static_cast<size_t>(lines)]);
    ++lines;
  }
  CHECK(lines == 4);
}
