// src/analysis.cc

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

#include "sst/analysis.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "sst/alignment.h"

namespace sst {

ConfusionCounts pair_counts(const std::vector<int>& truth,
                            const std::vector<int>& pred, int p1, int p2) {
  if (truth.size() != pred.size())
    throw InputError("pair_counts: " + std::to_string(truth.size()) +
                     " reference frames vs " + std::to_string(pred.size()) +
                     " predictions");
  ConfusionCounts c;
  for (size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i], p = pred[i];
    if (t == p1) {
      ++c.f1;
      if (p == p1) ++c.e11;
      if (p == p2) ++c.e12;
    } else if (t == p2) {
      ++c.f2;
      if (p == p1) ++c.e21;
      if (p == p2) ++c.e22;
    }
  }
  return c;
}

AlignedEval align_predictions(const SstModel& model,
                              const std::vector<PreparedUtterance>& utts,
                              double lambda) {
  AlignedEval eval;
  std::vector<Eigen::RowVectorXd> rows;
  for (const PreparedUtterance& prep : utts) {
    ModelCache cache;
    ModelOutput out = model.forward(prep.signal, prep.session, nullptr,
                                    &cache);
    AlignmentLoss loss =
        prep.aligned
            ? aligned_loss(prep.target_feats, prep.target_post, out.features,
                           out.phone_logits, lambda, false)
            : direct_loss(prep.target_feats, prep.target_post, out.features,
                          out.phone_logits, lambda, false);
    Eigen::MatrixXd post = nn::softmax_rows(out.phone_logits);
    std::vector<int> utt_truth, utt_pred;
    for (size_t i = 0; i < loss.map.size(); ++i) {
      long j = loss.map[i];
      int t = prep.labels[i];
      Eigen::Index argmax;
      post.row(j).maxCoeff(&argmax);
      utt_truth.push_back(t);
      utt_pred.push_back(static_cast<int>(argmax));
      eval.truth.push_back(t);
      eval.pred_labels.push_back(static_cast<int>(argmax));
      rows.push_back(post.row(j));
    }
    eval.utt_truth.push_back(std::move(utt_truth));
    eval.utt_pred.push_back(std::move(utt_pred));
  }
  eval.posteriors.resize(static_cast<long>(rows.size()),
                         rows.empty() ? 0 : rows[0].cols());
  for (size_t i = 0; i < rows.size(); ++i)
    eval.posteriors.row(static_cast<long>(i)) = rows[i];
  return eval;
}

double forced_choice_accuracy(const std::vector<int>& truth,
                              const Eigen::MatrixXd& posteriors,
                              const std::vector<std::vector<int>>& sets) {
  if (posteriors.rows() != static_cast<long>(truth.size()))
    throw InputError("forced_choice: " + std::to_string(truth.size()) +
                     " frames vs " + std::to_string(posteriors.rows()) +
                     " posterior rows");
  long total = 0, correct = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i];
    const std::vector<int>* home = nullptr;
    for (const auto& set : sets)
      if (std::find(set.begin(), set.end(), t) != set.end()) {
        home = &set;
        break;
      }
    if (home == nullptr) continue;
    int best = -1;
    double best_p = -1.0;
    for (int p : *home) {
      double v = posteriors(static_cast<long>(i), p);
      if (v > best_p) {
        best_p = v;
        best = p;
      }
    }
    ++total;
    if (best == t) ++correct;
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total)
                   : 0.0;
}

double majority_class_accuracy(const std::vector<int>& truth,
                               const std::vector<std::vector<int>>& sets) {
  long total = 0, correct = 0;
  for (const auto& set : sets) {
    long set_total = 0;
    long best_count = 0;
    // Scanning in set order and keeping strict improvements resolves
    // count ties toward the lowest id.
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    for (int p : sorted) {
      long count = static_cast<long>(
          std::count(truth.begin(), truth.end(), p));
      set_total += count;
      if (count > best_count) best_count = count;
    }
    total += set_total;
    correct += best_count;
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total)
                   : 0.0;
}

std::vector<int> collapse_runs(const std::vector<int>& labels, int drop) {
  std::vector<int> out;
  for (int p : labels) {
    if (p == drop) continue;
    if (out.empty() || out.back() != p) out.push_back(p);
  }
  return out;
}

long edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp) {
  size_t n = ref.size(), m = hyp.size();
  std::vector<long> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<long>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<long>(i);
    for (size_t j = 1; j <= m; ++j) {
      long sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double token_error_rate(const std::vector<std::vector<int>>& refs,
                        const std::vector<std::vector<int>>& hyps) {
  if (refs.size() != hyps.size())
    throw InputError("token_error_rate: " + std::to_string(refs.size()) +
                     " references vs " + std::to_string(hyps.size()) +
                     " hypotheses");
  long errors = 0, tokens = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]);
    tokens += static_cast<long>(refs[i].size());
  }
  if (tokens == 0) throw InputError("token_error_rate: empty references");
  return static_cast<double>(errors) / static_cast<double>(tokens);
}

// ------------------------------------------------------- context baseline

namespace {

struct ContextModel {
  nn::Embedding embed;
  std::vector<nn::TransformerLayer> layers;
  nn::Linear head;

  nn::ParamList params() {
    nn::ParamList list;
    embed.collect("embed", &list);
    for (size_t i = 0; i < layers.size(); ++i)
      layers[i].collect("layer" + std::to_string(i), &list);
    head.collect("head", &list);
    return list;
  }

  Eigen::MatrixXd logits(const std::vector<int>& tokens,
                         std::vector<nn::TransformerLayerCache>* caches,
                         Eigen::MatrixXd* embedded,
                         Eigen::MatrixXd* trans_out) {
    *embedded = embed.forward(tokens);
    caches->resize(layers.size());
    Eigen::MatrixXd z = *embedded;
    for (size_t i = 0; i < layers.size(); ++i)
      z = layers[i].forward(z, 0.0, nullptr, &(*caches)[i]);
    *trans_out = z;
    return head.forward(z);
  }
};

}  // namespace

double context_baseline_accuracy(
    const ModelConfig& mc, const std::vector<std::vector<int>>& train_inputs,
    const std::vector<std::vector<int>>& train_truth,
    const std::vector<std::vector<int>>& eval_inputs,
    const std::vector<std::vector<int>>& eval_truth,
    const std::vector<std::vector<int>>& sets, long vocab, long n_classes,
    const ContextBaselineConfig& cbc) {
  if (train_inputs.size() != train_truth.size() ||
      eval_inputs.size() != eval_truth.size())
    throw InputError("context baseline: input and truth counts differ");

  Rng rng(cbc.seed);
  ContextModel model;
  model.embed.setup(vocab, mc.model_dim, &rng);
  model.layers.resize(static_cast<size_t>(mc.n_layers));
  for (auto& layer : model.layers)
    layer.setup(static_cast<int>(mc.model_dim), mc.n_heads, mc.window,
                mc.ff_hidden, &rng);
  model.head.setup(mc.model_dim, n_classes, true, &rng);

  nn::ParamList params = model.params();
  AdamW opt;
  opt.setup(params);

  std::vector<size_t> order;
  for (size_t i = 0; i < train_inputs.size(); ++i)
    if (!train_inputs[i].empty()) order.push_back(i);
  if (order.empty()) throw InputError("context baseline: no training data");

  for (int epoch = 0; epoch < cbc.epochs; ++epoch) {
    rng.shuffle(&order);
    for (size_t idx : order) {
      const std::vector<int>& tokens = train_inputs[idx];
      const std::vector<int>& truth = train_truth[idx];
      if (tokens.size() != truth.size())
        throw InputError("context baseline: sequence length mismatch");
      std::vector<nn::TransformerLayerCache> caches;
      Eigen::MatrixXd embedded, trans_out;
      Eigen::MatrixXd logits =
          model.logits(tokens, &caches, &embedded, &trans_out);
      Eigen::MatrixXd probs = nn::softmax_rows(logits);
      Eigen::MatrixXd dlogits = probs;
      double inv_n = 1.0 / static_cast<double>(tokens.size());
      for (long i = 0; i < dlogits.rows(); ++i)
        dlogits(i, truth[static_cast<size_t>(i)]) -= 1.0;
      dlogits *= inv_n;

      nn::zero_grads(params);
      Eigen::MatrixXd dz = model.head.backward(trans_out, dlogits);
      for (size_t l = model.layers.size(); l-- > 0;)
        dz = model.layers[l].backward(dz, caches[l]);
      model.embed.backward(tokens, dz);
      opt.apply(params, cbc.lr);
    }
  }

  std::vector<int> all_truth;
  std::vector<Eigen::MatrixXd> posterior_blocks;
  long total_rows = 0;
  for (size_t i = 0; i < eval_inputs.size(); ++i) {
    if (eval_inputs[i].empty()) continue;
    std::vector<nn::TransformerLayerCache> caches;
    Eigen::MatrixXd embedded, trans_out;
    Eigen::MatrixXd logits =
        model.logits(eval_inputs[i], &caches, &embedded, &trans_out);
    posterior_blocks.push_back(nn::softmax_rows(logits));
    total_rows += posterior_blocks.back().rows();
    all_truth.insert(all_truth.end(), eval_truth[i].begin(),
                     eval_truth[i].end());
  }
  Eigen::MatrixXd posteriors(total_rows, n_classes);
  long at = 0;
  for (const auto& block : posterior_blocks) {
    posteriors.middleRows(at, block.rows()) = block;
    at += block.rows();
  }
  return forced_choice_accuracy(all_truth, posteriors, sets);
}

// ----------------------------------------------------------------- report

std::vector<PairReportRow> pairwise_confusions(const std::vector<int>& truth,
                                               const std::vector<int>& pred,
                                               int n_phonemes,
                                               int silence_id) {
  if (truth.size() != pred.size())
    throw InputError("pairwise_confusions: length mismatch");
  Eigen::MatrixXi joint = Eigen::MatrixXi::Zero(n_phonemes, n_phonemes);
  std::vector<long> totals(static_cast<size_t>(n_phonemes), 0);
  for (size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i], p = pred[i];
    if (t == silence_id) continue;
    if (t < 0 || t >= n_phonemes || p < 0 || p >= n_phonemes)
      throw InputError("pairwise_confusions: label outside inventory");
    ++totals[static_cast<size_t>(t)];
    joint(t, p) += 1;
  }
  std::vector<PairReportRow> rows;
  for (int p1 = 0; p1 < n_phonemes; ++p1) {
    if (p1 == silence_id) continue;
    for (int p2 = p1 + 1; p2 < n_phonemes; ++p2) {
      if (p2 == silence_id) continue;
      long f1 = totals[static_cast<size_t>(p1)];
      long f2 = totals[static_cast<size_t>(p2)];
      if (f1 + f2 == 0) continue;
      PairReportRow row;
      row.p1 = p1;
      row.p2 = p2;
      double denom = static_cast<double>(f1 + f2);
      row.confusion = (joint(p1, p2) + joint(p2, p1)) / denom;
      row.accuracy = (joint(p1, p1) + joint(p2, p2)) / denom;
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const PairReportRow& a, const PairReportRow& b) {
              if (a.confusion != b.confusion) return a.confusion > b.confusion;
              if (a.p1 != b.p1) return a.p1 < b.p1;
              return a.p2 < b.p2;
            });
  return rows;
}

void write_confusion_csv(const std::string& path,
                         const std::vector<PairReportRow>& rows,
                         const PhonemeInventory& inv) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "phoneme1,phoneme2,confusion,accuracy\n" << std::setprecision(6)
      << std::fixed;
  for (const auto& row : rows)
    out << inv.symbol(row.p1) << ',' << inv.symbol(row.p2) << ','
        << row.confusion << ',' << row.accuracy << '\n';
  if (!out) throw InputError("write failed for " + path);
}

void write_feature_csv(const std::string& path,
                       const std::vector<FeatureReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "feature,majority,context_baseline,full_model\n"
      << std::setprecision(6) << std::fixed;
  for (const auto& row : rows)
    out << row.feature << ',' << row.majority << ',' << row.context_baseline
        << ',' << row.full_model << '\n';
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace sst
