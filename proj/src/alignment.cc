// src/alignment.cc

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

#include "sst/alignment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sst/common.h"
#include "sst/nn.h"

namespace sst {

namespace {

constexpr double kLogFloor = -20.0;

void check_pair_dims(const Eigen::MatrixXd& target_feats,
                     const Eigen::MatrixXd& target_post,
                     const Eigen::MatrixXd& pred_feats,
                     const Eigen::MatrixXd& pred_logits) {
  if (target_feats.rows() == 0 || pred_feats.rows() == 0)
    throw InputError("alignment: empty frame sequence");
  if (target_post.rows() != target_feats.rows())
    throw InputError("alignment: " + std::to_string(target_post.rows()) +
                     " posterior rows for " +
                     std::to_string(target_feats.rows()) + " feature rows");
  if (pred_logits.rows() != pred_feats.rows())
    throw InputError("alignment: " + std::to_string(pred_logits.rows()) +
                     " logit rows for " + std::to_string(pred_feats.rows()) +
                     " feature rows");
  if (target_feats.cols() != pred_feats.cols())
    throw InputError("alignment: feature dims differ, " +
                     std::to_string(target_feats.cols()) + " vs " +
                     std::to_string(pred_feats.cols()));
  if (target_post.cols() != pred_logits.cols())
    throw InputError("alignment: phoneme dims differ, " +
                     std::to_string(target_post.cols()) + " vs " +
                     std::to_string(pred_logits.cols()));
}

// Shared accumulation over a fixed set of (target, predicted) frame pairs.
AlignmentLoss accumulate(const Eigen::MatrixXd& target_feats,
                         const Eigen::MatrixXd& target_post,
                         const Eigen::MatrixXd& pred_feats,
                         const Eigen::MatrixXd& pred_logits, double lambda,
                         bool with_grad, std::vector<long> map) {
  Eigen::MatrixXd log_probs = nn::log_softmax_rows(pred_logits);
  Eigen::MatrixXd probs = log_probs.array().exp().matrix();
  Eigen::MatrixXd clamped = log_probs.cwiseMax(kLogFloor);

  long n = static_cast<long>(map.size());
  double inv_n = 1.0 / static_cast<double>(n);
  AlignmentLoss out;
  out.per_frame.setZero(n);
  if (with_grad) {
    out.d_features.setZero(pred_feats.rows(), pred_feats.cols());
    out.d_logits.setZero(pred_logits.rows(), pred_logits.cols());
  }
  for (long i = 0; i < n; ++i) {
    long j = map[static_cast<size_t>(i)];
    Eigen::RowVectorXd diff = pred_feats.row(j) - target_feats.row(i);
    double dist = diff.norm();
    double cross = target_post.row(i).dot(clamped.row(j));
    out.feature += inv_n * dist;
    out.phoneme += inv_n * lambda * (-cross);
    out.per_frame(i) = dist - lambda * cross;
    if (!with_grad) continue;
    if (dist > 1e-12) out.d_features.row(j) += (inv_n / dist) * diff;
    // Entries pinned at the floor contribute a constant, so their
    // gradient with respect to the logits vanishes.
    Eigen::RowVectorXd mask =
        (log_probs.row(j).array() > kLogFloor).cast<double>().matrix();
    Eigen::RowVectorXd w = target_post.row(i).cwiseProduct(mask);
    out.d_logits.row(j) +=
        (-lambda * inv_n) * (w - w.sum() * probs.row(j));
  }
  out.total = out.feature + out.phoneme;
  out.map = std::move(map);
  return out;
}

}  // namespace

Eigen::MatrixXd pairwise_distance(const Eigen::MatrixXd& target_feats,
                                  const Eigen::MatrixXd& pred_feats) {
  if (target_feats.cols() != pred_feats.cols())
    throw InputError("pairwise_distance: dims differ, " +
                     std::to_string(target_feats.cols()) + " vs " +
                     std::to_string(pred_feats.cols()));
  Eigen::MatrixXd delta(target_feats.rows(), pred_feats.rows());
  for (long i = 0; i < target_feats.rows(); ++i)
    for (long j = 0; j < pred_feats.rows(); ++j)
      delta(i, j) = (target_feats.row(i) - pred_feats.row(j)).norm();
  return delta;
}

DtwResult dtw(const Eigen::MatrixXd& cost) {
  long n = cost.rows(), m = cost.cols();
  if (n == 0 || m == 0) throw InputError("dtw: empty cost matrix");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc(n, m);
  // Predecessor codes: 0 diagonal, 1 step in i, 2 step in j.
  Eigen::Matrix<int8_t, Eigen::Dynamic, Eigen::Dynamic> from(n, m);
  acc(0, 0) = cost(0, 0);
  from(0, 0) = -1;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < m; ++j) {
      if (i == 0 && j == 0) continue;
      double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : kInf;
      double up = i > 0 ? acc(i - 1, j) : kInf;
      double left = j > 0 ? acc(i, j - 1) : kInf;
      double best = diag;
      int8_t step = 0;
      if (up < best) {
        best = up;
        step = 1;
      }
      if (left < best) {
        best = left;
        step = 2;
      }
      acc(i, j) = cost(i, j) + best;
      from(i, j) = step;
    }
  }

  DtwResult result;
  result.total_cost = acc(n - 1, m - 1);
  long i = n - 1, j = m - 1;
  while (true) {
    result.path.emplace_back(i, j);
    if (i == 0 && j == 0) break;
    switch (from(i, j)) {
      case 0: --i; --j; break;
      case 1: --i; break;
      default: --j; break;
    }
  }
  std::reverse(result.path.begin(), result.path.end());

  result.map.assign(static_cast<size_t>(n), -1);
  for (const auto& [pi, pj] : result.path)
    if (result.map[static_cast<size_t>(pi)] < 0)
      result.map[static_cast<size_t>(pi)] = pj;
  return result;
}

AlignmentLoss aligned_loss(const Eigen::MatrixXd& target_feats,
                           const Eigen::MatrixXd& target_post,
                           const Eigen::MatrixXd& pred_feats,
                           const Eigen::MatrixXd& pred_logits, double lambda,
                           bool with_grad) {
  check_pair_dims(target_feats, target_post, pred_feats, pred_logits);
  Eigen::MatrixXd delta = pairwise_distance(target_feats, pred_feats);
  Eigen::MatrixXd clamped =
      nn::log_softmax_rows(pred_logits).cwiseMax(kLogFloor);
  Eigen::MatrixXd cost = delta - lambda * (target_post * clamped.transpose());
  DtwResult warp = dtw(cost);
  return accumulate(target_feats, target_post, pred_feats, pred_logits,
                    lambda, with_grad, std::move(warp.map));
}

AlignmentLoss direct_loss(const Eigen::MatrixXd& target_feats,
                          const Eigen::MatrixXd& target_post,
                          const Eigen::MatrixXd& pred_feats,
                          const Eigen::MatrixXd& pred_logits, double lambda,
                          bool with_grad) {
  check_pair_dims(target_feats, target_post, pred_feats, pred_logits);
  long nt = target_feats.rows(), np = pred_feats.rows();
  if (std::abs(nt - np) > 2)
    throw DataError("direct loss: frame counts differ by " +
                    std::to_string(std::abs(nt - np)) + " (" +
                    std::to_string(nt) + " vs " + std::to_string(np) +
                    "), more than the 2 allowed");
  long n = std::min(nt, np);
  std::vector<long> map(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) map[static_cast<size_t>(i)] = i;
  return accumulate(target_feats.topRows(n), target_post.topRows(n),
                    pred_feats, pred_logits, lambda, with_grad,
                    std::move(map));
}

void write_alignment(const std::string& path, const AlignmentLoss& loss) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write alignment file " + path);
  for (size_t i = 0; i < loss.map.size(); ++i)
    out << i << '\t' << loss.map[i] << '\t'
        << loss.per_frame(static_cast<long>(i)) << '\n';
  if (!out) throw InputError("write failed for alignment file " + path);
}

}  // namespace sst
