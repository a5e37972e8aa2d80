// sst/alignment.h

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

// Alignment loss between a vocalized reference and a silent prediction.
// The cost between reference frame i and predicted frame j combines the
// Euclidean feature distance with a phoneme cross-entropy term,
//   cost[i,j] = ||T_i - P_j||  -  lambda * post_i . max(log softmax(L_j), -20),
// and dynamic time warping over that cost yields a monotone frame map a[i].
// Gradients treat the warping path as a constant.

#ifndef SST_ALIGNMENT_H_
#define SST_ALIGNMENT_H_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sst {

// Euclidean distances, delta(i, j) = ||target row i - pred row j||.
Eigen::MatrixXd pairwise_distance(const Eigen::MatrixXd& target_feats,
                                  const Eigen::MatrixXd& pred_feats);

// Minimum-cost monotone path through a cost matrix from (0,0) to the
// opposite corner with steps (1,0), (0,1) and (1,1); every visited cell
// contributes its cost exactly once.  Backtrace ties prefer the diagonal
// step, then (1,0), then (0,1).
struct DtwResult {
  std::vector<std::pair<long, long>> path;  // (i, j), corner to corner
  std::vector<long> map;                    // a[i]: first j on the path at row i
  double total_cost = 0.0;
};
DtwResult dtw(const Eigen::MatrixXd& cost);

// Loss value with its two components and, optionally, gradients with
// respect to the predicted frames.  total = feature + phoneme, where
// phoneme already carries the lambda weight.
struct AlignmentLoss {
  double total = 0.0;
  double feature = 0.0;
  double phoneme = 0.0;
  std::vector<long> map;        // matched predicted frame per target frame
  Eigen::VectorXd per_frame;    // combined cost at (i, map[i])
  Eigen::MatrixXd d_features;   // n_pred x n_feature_dims; empty without grad
  Eigen::MatrixXd d_logits;     // n_pred x n_phonemes
};

// Silent utterances: DTW-align the reference to the prediction, then
// average the combined cost over reference frames along the frozen path.
AlignmentLoss aligned_loss(const Eigen::MatrixXd& target_feats,
                           const Eigen::MatrixXd& target_post,
                           const Eigen::MatrixXd& pred_feats,
                           const Eigen::MatrixXd& pred_logits, double lambda,
                           bool with_grad);

// Vocalized utterances: frames pair up directly.  Length mismatches up to
// two frames are truncated to the shorter side; larger ones raise DataError.
AlignmentLoss direct_loss(const Eigen::MatrixXd& target_feats,
                          const Eigen::MatrixXd& target_post,
                          const Eigen::MatrixXd& pred_feats,
                          const Eigen::MatrixXd& pred_logits, double lambda,
                          bool with_grad);

// Writes "i\ta[i]\tcost" lines, one per target frame.
void write_alignment(const std::string& path, const AlignmentLoss& loss);

}  // namespace sst

#endif  // SST_ALIGNMENT_H_
