// sst/training.h

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

// Batch packing, the AdamW optimizer, the learning-rate schedule and the
// training loop.  Utterances are concatenated and cut into fixed-length
// rows that the model processes independently; predicted frames are
// unpacked back into utterances before the loss, and the loss gradients
// are scattered back into rows for the backward pass.

#ifndef SST_TRAINING_H_
#define SST_TRAINING_H_

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sst/data-io.h"
#include "sst/model.h"

namespace sst {

struct TrainConfig {
  long pack_len = 1600;        // samples per packed row
  long batch_samples = 204800; // greedy budget per batch
  double peak_lr = 1e-3;
  long warmup_steps = 500;
  double weight_decay = 1e-7;
  int epochs = 80;
  double lambda = 0.1;         // phoneme term weight
  int patience = 5;            // stale epochs before the rate halves
  uint64_t seed = 0;
  std::string out_dir = "run";

  void validate() const;
};

// A batch of utterances packed into equal-length rows.  Utterance sample
// counts and pack_len must be multiples of downsample so every utterance
// boundary lands on a frame boundary.
struct Packed {
  long pack_len = 0;
  long downsample = 0;
  long n_channels = 0;
  long total_samples = 0;              // before padding
  std::vector<Eigen::MatrixXd> rows;   // each pack_len x channels
  std::vector<std::vector<int>> frame_sessions;  // per row, padding gets 0
  std::vector<long> offsets;           // utterance start in the joined stream
  std::vector<long> lengths;

  long n_rows() const { return static_cast<long>(rows.size()); }
  long frames_per_row() const { return pack_len / downsample; }
};

Packed pack_batch(const std::vector<const Eigen::MatrixXd*>& signals,
                  const std::vector<int>& sessions, long pack_len,
                  long downsample);

// Splits per-row frame matrices back into one matrix per utterance.
std::vector<Eigen::MatrixXd> unpack_frames(
    const Packed& packed, const std::vector<Eigen::MatrixXd>& row_frames);

// Inverse scatter for gradients: per-utterance frame gradients into
// per-row matrices, zeros at padding.
std::vector<Eigen::MatrixXd> repack_frame_grads(
    const Packed& packed, const std::vector<Eigen::MatrixXd>& utt_grads);

// Greedy fill in the given order; a new batch starts whenever adding the
// next utterance would push the sample total past max_samples.
std::vector<std::vector<size_t>> make_batches(
    const std::vector<size_t>& order, const std::vector<long>& lengths,
    long max_samples);

// Decoupled weight decay, bias-corrected moments.
struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  long step = 0;
  std::vector<Eigen::ArrayXXd> m, v;

  void setup(const nn::ParamList& params);
  // Applies one update from the accumulated gradients.  Throws
  // InternalError naming the parameter if a gradient is not finite.
  void apply(const nn::ParamList& params, double lr);
};

// Linear warmup to the peak rate, then halving each time validation fails
// to improve for `patience` consecutive epochs.
struct LrSchedule {
  double peak = 1e-3;
  long warmup = 500;
  int patience = 5;
  int halvings = 0;
  int stale = 0;
  double best = std::numeric_limits<double>::infinity();

  double at(long step) const;
  // Reports one validation value per epoch; returns true when the rate
  // was halved in response.
  bool observe(double val);
};

// An utterance ready for the loss: preprocessed signal plus the reference
// features and one-hot phoneme posteriors (from the vocalized partner when
// the utterance is silent).
struct PreparedUtterance {
  size_t index = 0;  // position in the dataset
  Eigen::MatrixXd signal;
  Eigen::MatrixXd target_feats;
  Eigen::MatrixXd target_post;
  std::vector<int> labels;  // reference phoneme ids, one per target frame
  bool aligned = false;  // DTW loss instead of frame-by-frame
  int session = 0;
};

// Picks utterances of one split (and mode, unless empty), preprocessing
// raw signals in place as needed.
std::vector<PreparedUtterance> prepare_utterances(Dataset* data,
                                                  const std::string& split,
                                                  const std::string& mode,
                                                  long n_phonemes,
                                                  long downsample);

struct ValScore {
  double total = 0.0;
  double feature = 0.0;
  double phoneme = 0.0;  // lambda-weighted
  long n_utts = 0;
};

// Sum of per-utterance alignment losses, dropout off.
ValScore validate_model(const SstModel& model,
                        const std::vector<PreparedUtterance>& utts,
                        double lambda);

struct TrainResult {
  double initial_val = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> val_history;
  std::string best_path, last_path, log_path;
};

// Runs the full loop: per-epoch shuffling and batching, packed forward
// and backward passes, AdamW updates under the schedule, validation on
// held-out silent utterances, a CSV log, and last/best checkpoints.
TrainResult train(SstModel* model, Dataset* data, const TrainConfig& cfg);

}  // namespace sst

#endif  // SST_TRAINING_H_
