// src/phoneme.cc

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

#include "sst/phoneme.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "sst/common.h"

namespace sst {

PhonemeInventory::PhonemeInventory(std::vector<std::string> symbols)
    : symbols_(std::move(symbols)) {
  for (int i = 0; i < static_cast<int>(symbols_.size()); ++i)
    index_.emplace(symbols_[i], i);
}

const PhonemeInventory& PhonemeInventory::standard() {
  static const PhonemeInventory inv({
      "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH",
      "EH", "ER", "EY", "F",  "G",  "HH", "IH", "IY", "JH", "K",
      "L",  "M",  "N",  "NG", "OW", "OY", "P",  "R",  "S",  "SH",
      "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH", "SIL",
  });
  return inv;
}

int PhonemeInventory::id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end())
    throw InputError("unknown phoneme symbol \"" + symbol + "\"");
  return it->second;
}

const std::string& PhonemeInventory::symbol(int id) const {
  if (id < 0 || id >= size())
    throw InputError("phoneme id " + std::to_string(id) +
                     " outside inventory of size " + std::to_string(size()));
  return symbols_[id];
}

void PhonemePosterior::validate() const {
  for (long i = 0; i < probs.rows(); ++i) {
    double s = probs.row(i).sum();
    if (!std::isfinite(s) || std::abs(s - 1.0) > 1e-6)
      throw InputError("posterior row " + std::to_string(i) +
                       " sums to " + std::to_string(s) + ", expected 1");
    if ((probs.row(i).array() < 0.0).any())
      throw InputError("posterior row " + std::to_string(i) +
                       " has a negative entry");
  }
}

const std::vector<std::vector<int>>& ConfusionSetTable::sets(
    const std::string& feature) const {
  for (const auto& [name, groups] : features)
    if (name == feature) return groups;
  throw InputError("unknown articulatory feature \"" + feature + "\"");
}

ConfusionSetTable ConfusionSetTable::standard(const PhonemeInventory& inv) {
  auto ids = [&inv](const std::vector<std::string>& syms) {
    std::vector<int> out;
    out.reserve(syms.size());
    for (const auto& s : syms) out.push_back(inv.id(s));
    return out;
  };
  ConfusionSetTable table;
  table.features.emplace_back(
      "place",
      std::vector<std::vector<int>>{
          ids({"P", "T", "K"}),
          ids({"B", "D", "G"}),
          ids({"M", "N", "NG"}),
          ids({"F", "TH", "S", "SH", "HH"}),
          ids({"V", "DH", "Z", "ZH"}),
      });
  table.features.emplace_back(
      "oral_manner",
      std::vector<std::vector<int>>{
          ids({"T", "S"}),
          ids({"D", "Z", "L", "R"}),
          ids({"SH", "CH"}),
          ids({"ZH", "JH"}),
      });
  table.features.emplace_back(
      "nasality",
      std::vector<std::vector<int>>{
          ids({"B", "M"}),
          ids({"D", "N"}),
          ids({"G", "NG"}),
      });
  table.features.emplace_back(
      "voicing",
      std::vector<std::vector<int>>{
          ids({"P", "B"}),
          ids({"T", "D"}),
          ids({"K", "G"}),
          ids({"F", "V"}),
          ids({"TH", "DH"}),
          ids({"S", "Z"}),
          ids({"SH", "ZH"}),
          ids({"CH", "JH"}),
      });
  return table;
}

Eigen::MatrixXd one_hot_rows(const std::vector<int>& labels, long n_classes) {
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(static_cast<long>(labels.size()), n_classes);
  for (long i = 0; i < out.rows(); ++i) {
    int p = labels[static_cast<size_t>(i)];
    if (p < 0 || p >= n_classes)
      throw InputError("label " + std::to_string(p) + " outside " +
                       std::to_string(n_classes) + " classes");
    out(i, p) = 1.0;
  }
  return out;
}

std::vector<int> collapse_phonemes(const std::vector<int>& seq,
                                   const std::vector<std::vector<int>>& sets,
                                   int inventory_size) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (int p : seq) {
    int mapped = p;
    for (int s = 0; s < static_cast<int>(sets.size()); ++s) {
      if (std::find(sets[s].begin(), sets[s].end(), p) != sets[s].end()) {
        mapped = inventory_size + s;
        break;
      }
    }
    out.push_back(mapped);
  }
  return out;
}

}  // namespace sst
