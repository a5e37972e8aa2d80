// sst/data-io.h

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

// On-disk corpus layout and the synthetic corpus generator.  A dataset
// directory holds manifest.json plus emg/, feat/ and phone/ subdirectories;
// signals are stored in a small binary container ("EMGR"), feature frames
// in another ("FEAT"), and frame labels as one phoneme symbol per line.

#ifndef SST_DATA_IO_H_
#define SST_DATA_IO_H_

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "sst/phoneme.h"
#include "sst/signal.h"

namespace sst {

struct Utterance {
  std::string id;
  int session = 0;
  std::string mode;       // "vocalized" or "silent"
  std::string paired_id;  // vocalized partner of a silent utterance
  std::string split;      // "train" or "val"
  RawSignal emg;
  ProcessedSignal processed;   // filled by preprocess_utterance
  FeatureSequence features;    // target speech features; empty for silent
  PhonemeSequence phones;      // frame labels; may be empty
};

struct Dataset {
  std::vector<Utterance> utterances;
  int n_sessions = 0;
  std::unordered_map<std::string, size_t> by_id;

  const Utterance& at(const std::string& id) const;
  void reindex();  // rebuilds by_id and n_sessions
};

// Binary signal container: magic "EMGR", version, channel count, sample
// rate, length, then sample-major interleaved f32 data.
void write_emgr(const std::string& path, const RawSignal& signal);
RawSignal read_emgr(const std::string& path);

// Feature frames: magic "FEAT", frame count, dimension, row-major f32.
void write_feat(const std::string& path, const Eigen::MatrixXd& frames);
Eigen::MatrixXd read_feat(const std::string& path);

// One phoneme symbol per line, one line per 10 ms frame.
void write_phones(const std::string& path, const std::vector<int>& labels,
                  const PhonemeInventory& inv);
std::vector<int> read_phones(const std::string& path,
                             const PhonemeInventory& inv);

// Reads manifest.json and every file it references.
Dataset load_dataset(const std::string& dir);
// Writes all utterance files plus the manifest under dir.
void save_dataset(const std::string& dir, const Dataset& data);

// Runs the preprocessing chain on the raw signal and truncates the result
// so the sample count is a multiple of factor.
void preprocess_utterance(Utterance* utt, long factor);

// Synthetic corpus: paired vocalized and silent utterances rendered from
// smooth per-phoneme articulator trajectories.  The vocalized features are
// a fixed linear image of the trajectory, and the signal carries the same
// trajectory through amplitude-modulated carriers that survive the
// preprocessing chain, so the corpus is learnable end to end.  Silent
// renditions re-render the trajectory under a piecewise-linear time warp.
struct SynthConfig {
  int n_pairs = 100;
  int n_sessions = 2;
  long n_channels = 4;
  long n_features = 26;
  double min_seconds = 1.0;
  double max_seconds = 2.5;
  double noise = 0.01;
  double val_fraction = 0.2;
  uint64_t seed = 1234;
};
Dataset synth_dataset(const SynthConfig& cfg);

}  // namespace sst

#endif  // SST_DATA_IO_H_
