// sst/analysis.h

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

// Phoneme error analysis: pairwise confusion statistics over aligned
// frames, forced-choice accuracy within articulatory confusion sets, a
// majority-class floor, a learned context baseline fed only collapsed
// predictions, and phoneme error rates from edit distance.

#ifndef SST_ANALYSIS_H_
#define SST_ANALYSIS_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sst/model.h"
#include "sst/phoneme.h"
#include "sst/training.h"

namespace sst {

// Frame counts for one phoneme pair: e11 counts frames whose reference is
// phoneme 1 predicted as phoneme 1, e12 reference 1 predicted 2, and so
// on; f1 and f2 count all frames of each reference phoneme.
struct ConfusionCounts {
  long e11 = 0, e12 = 0, e21 = 0, e22 = 0;
  long f1 = 0, f2 = 0;

  double confusion() const {
    return f1 + f2 > 0
               ? static_cast<double>(e12 + e21) / static_cast<double>(f1 + f2)
               : 0.0;
  }
  double accuracy() const {
    return f1 + f2 > 0
               ? static_cast<double>(e11 + e22) / static_cast<double>(f1 + f2)
               : 0.0;
  }
};

ConfusionCounts pair_counts(const std::vector<int>& truth,
                            const std::vector<int>& pred, int p1, int p2);

// Reference frames matched with predicted frames, concatenated across
// utterances and also kept per utterance.
struct AlignedEval {
  std::vector<int> truth;
  std::vector<int> pred_labels;
  Eigen::MatrixXd posteriors;  // one softmax row per reference frame
  std::vector<std::vector<int>> utt_truth;
  std::vector<std::vector<int>> utt_pred;
};

// Runs the model on each utterance and pairs every reference frame with a
// predicted frame: through the warping path for silent utterances,
// one-to-one for vocalized ones.
AlignedEval align_predictions(const SstModel& model,
                              const std::vector<PreparedUtterance>& utts,
                              double lambda);

// Fraction of frames whose reference phoneme lies in one of the sets and
// whose restricted argmax over that set hits the reference.
double forced_choice_accuracy(const std::vector<int>& truth,
                              const Eigen::MatrixXd& posteriors,
                              const std::vector<std::vector<int>>& sets);

// Always answering each set's most frequent reference member (ties go to
// the lowest id) over the same frames.
double majority_class_accuracy(const std::vector<int>& truth,
                               const std::vector<std::vector<int>>& sets);

// Merges consecutive repeats and drops `drop` (pass a negative id to keep
// everything), turning frame streams into token sequences.
std::vector<int> collapse_runs(const std::vector<int>& labels, int drop);

long edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp);

// Corpus-level error rate: total edit distance over total reference tokens.
double token_error_rate(const std::vector<std::vector<int>>& refs,
                        const std::vector<std::vector<int>>& hyps);

// A small sequence model trained to recover the reference phonemes from
// collapsed predictions alone; its forced-choice accuracy shows how much
// of a feature can be filled in from context.
struct ContextBaselineConfig {
  int epochs = 30;
  double lr = 1e-3;
  uint64_t seed = 7;
};

double context_baseline_accuracy(
    const ModelConfig& mc, const std::vector<std::vector<int>>& train_inputs,
    const std::vector<std::vector<int>>& train_truth,
    const std::vector<std::vector<int>>& eval_inputs,
    const std::vector<std::vector<int>>& eval_truth,
    const std::vector<std::vector<int>>& sets, long vocab, long n_classes,
    const ContextBaselineConfig& cbc);

// Pairwise report over all unordered non-silence pairs seen in the
// reference, sorted by descending confusion.
struct PairReportRow {
  int p1 = 0, p2 = 0;
  double confusion = 0.0, accuracy = 0.0;
};
std::vector<PairReportRow> pairwise_confusions(const std::vector<int>& truth,
                                               const std::vector<int>& pred,
                                               int n_phonemes,
                                               int silence_id);

void write_confusion_csv(const std::string& path,
                         const std::vector<PairReportRow>& rows,
                         const PhonemeInventory& inv);

struct FeatureReportRow {
  std::string feature;
  double majority = 0.0, context_baseline = 0.0, full_model = 0.0;
};
void write_feature_csv(const std::string& path,
                       const std::vector<FeatureReportRow>& rows);

}  // namespace sst

#endif  // SST_ANALYSIS_H_
