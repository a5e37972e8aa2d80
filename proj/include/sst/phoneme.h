// sst/phoneme.h

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

#ifndef SST_PHONEME_H_
#define SST_PHONEME_H_

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace sst {

// ARPAbet phoneme inventory: the 39-phone set plus a trailing silence
// symbol "SIL".
class PhonemeInventory {
 public:
  static const PhonemeInventory& standard();

  int size() const { return static_cast<int>(symbols_.size()); }
  int silence_id() const { return size() - 1; }

  // Throws InputError on unknown symbols.
  int id(const std::string& symbol) const;
  const std::string& symbol(int id) const;

 private:
  explicit PhonemeInventory(std::vector<std::string> symbols);
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Frame-level phoneme labels (ids into an inventory).
struct PhonemeSequence {
  std::vector<int> labels;

  long n_frames() const { return static_cast<long>(labels.size()); }
};

// Frame-level predicted phoneme distributions; rows lie on the simplex.
struct PhonemePosterior {
  Eigen::MatrixXd probs;  // n_frames x phoneme_count

  long n_frames() const { return probs.rows(); }
  // Throws InputError if any row deviates from sum 1 by more than 1e-6.
  void validate() const;
};

// Confusion sets for one articulatory feature: disjoint groups of phonemes
// identical in every other feature.
struct ConfusionSetTable {
  std::vector<std::pair<std::string, std::vector<std::vector<int>>>> features;

  const std::vector<std::vector<int>>& sets(const std::string& feature) const;

  // The four consonant features (place, oral_manner, nasality, voicing)
  // with their full set listings.
  static ConfusionSetTable standard(const PhonemeInventory& inv);
};

// Replaces every member of set s with the fresh symbol inventory_size + s;
// ids outside all sets pass through unchanged.  Idempotent.
std::vector<int> collapse_phonemes(const std::vector<int>& seq,
                                   const std::vector<std::vector<int>>& sets,
                                   int inventory_size);

// One row per label, a single 1 in the label's column.
Eigen::MatrixXd one_hot_rows(const std::vector<int>& labels, long n_classes);

}  // namespace sst

#endif  // SST_PHONEME_H_
