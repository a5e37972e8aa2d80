// src/training.cc

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

#include "sst/training.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "sst/alignment.h"

namespace sst {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (pack_len <= 0) throw ConfigError("train: pack_len must be positive");
  if (batch_samples < pack_len)
    throw ConfigError("train: batch_samples below pack_len");
  if (peak_lr <= 0.0) throw ConfigError("train: peak_lr must be positive");
  if (warmup_steps < 0) throw ConfigError("train: negative warmup_steps");
  if (weight_decay < 0.0) throw ConfigError("train: negative weight_decay");
  if (epochs < 1) throw ConfigError("train: epochs must be positive");
  if (lambda < 0.0) throw ConfigError("train: negative lambda");
  if (patience < 1) throw ConfigError("train: patience must be positive");
  if (out_dir.empty()) throw ConfigError("train: out_dir is empty");
}

// ---------------------------------------------------------------- packing

Packed pack_batch(const std::vector<const Eigen::MatrixXd*>& signals,
                  const std::vector<int>& sessions, long pack_len,
                  long downsample) {
  if (signals.empty()) throw InputError("pack: empty batch");
  if (signals.size() != sessions.size())
    throw InputError("pack: session count mismatch");
  if (pack_len <= 0 || downsample <= 0 || pack_len % downsample != 0)
    throw ConfigError("pack: pack_len " + std::to_string(pack_len) +
                      " is not a multiple of downsample " +
                      std::to_string(downsample));

  Packed out;
  out.pack_len = pack_len;
  out.downsample = downsample;
  out.n_channels = signals[0]->cols();
  for (size_t k = 0; k < signals.size(); ++k) {
    const Eigen::MatrixXd& sig = *signals[k];
    if (sig.cols() != out.n_channels)
      throw InputError("pack: signal " + std::to_string(k) + " has " +
                       std::to_string(sig.cols()) + " channels, expected " +
                       std::to_string(out.n_channels));
    if (sig.rows() == 0 || sig.rows() % downsample != 0)
      throw InputError("pack: signal " + std::to_string(k) + " length " +
                       std::to_string(sig.rows()) + " is not a positive " +
                       "multiple of " + std::to_string(downsample));
    out.offsets.push_back(out.total_samples);
    out.lengths.push_back(sig.rows());
    out.total_samples += sig.rows();
  }

  long n_rows = (out.total_samples + pack_len - 1) / pack_len;
  long padded = n_rows * pack_len;
  Eigen::MatrixXd joined = Eigen::MatrixXd::Zero(padded, out.n_channels);
  for (size_t k = 0; k < signals.size(); ++k)
    joined.middleRows(out.offsets[k], out.lengths[k]) = *signals[k];

  long fpr = pack_len / downsample;
  std::vector<int> frame_session(static_cast<size_t>(padded / downsample), 0);
  for (size_t k = 0; k < signals.size(); ++k) {
    long fstart = out.offsets[k] / downsample;
    long fcount = out.lengths[k] / downsample;
    for (long f = 0; f < fcount; ++f)
      frame_session[static_cast<size_t>(fstart + f)] = sessions[k];
  }

  for (long r = 0; r < n_rows; ++r) {
    out.rows.push_back(joined.middleRows(r * pack_len, pack_len));
    out.frame_sessions.emplace_back(
        frame_session.begin() + r * fpr,
        frame_session.begin() + (r + 1) * fpr);
  }
  return out;
}

std::vector<Eigen::MatrixXd> unpack_frames(
    const Packed& packed, const std::vector<Eigen::MatrixXd>& row_frames) {
  if (static_cast<long>(row_frames.size()) != packed.n_rows())
    throw InternalError("unpack: row count mismatch");
  long fpr = packed.frames_per_row();
  long dims = row_frames.empty() ? 0 : row_frames[0].cols();
  Eigen::MatrixXd joined(packed.n_rows() * fpr, dims);
  for (long r = 0; r < packed.n_rows(); ++r) {
    const Eigen::MatrixXd& rf = row_frames[static_cast<size_t>(r)];
    if (rf.rows() != fpr || rf.cols() != dims)
      throw InternalError("unpack: row " + std::to_string(r) +
                          " has unexpected shape");
    joined.middleRows(r * fpr, fpr) = rf;
  }
  std::vector<Eigen::MatrixXd> out;
  for (size_t k = 0; k < packed.offsets.size(); ++k)
    out.push_back(joined.middleRows(packed.offsets[k] / packed.downsample,
                                    packed.lengths[k] / packed.downsample));
  return out;
}

std::vector<Eigen::MatrixXd> repack_frame_grads(
    const Packed& packed, const std::vector<Eigen::MatrixXd>& utt_grads) {
  if (utt_grads.size() != packed.offsets.size())
    throw InternalError("repack: utterance count mismatch");
  long fpr = packed.frames_per_row();
  long dims = utt_grads.empty() ? 0 : utt_grads[0].cols();
  std::vector<Eigen::MatrixXd> rows(
      static_cast<size_t>(packed.n_rows()),
      Eigen::MatrixXd::Zero(fpr, dims));
  for (size_t k = 0; k < utt_grads.size(); ++k) {
    const Eigen::MatrixXd& g = utt_grads[k];
    if (g.rows() != packed.lengths[k] / packed.downsample)
      throw InternalError("repack: utterance " + std::to_string(k) +
                          " gradient has " + std::to_string(g.rows()) +
                          " frames, expected " +
                          std::to_string(packed.lengths[k] /
                                         packed.downsample));
    long fstart = packed.offsets[k] / packed.downsample;
    for (long f = 0; f < g.rows(); ++f) {
      long global = fstart + f;
      rows[static_cast<size_t>(global / fpr)].row(global % fpr) += g.row(f);
    }
  }
  return rows;
}

std::vector<std::vector<size_t>> make_batches(
    const std::vector<size_t>& order, const std::vector<long>& lengths,
    long max_samples) {
  std::vector<std::vector<size_t>> batches;
  std::vector<size_t> current;
  long current_total = 0;
  for (size_t idx : order) {
    long len = lengths[idx];
    if (len > max_samples)
      throw DataError("utterance " + std::to_string(idx) + " has " +
                      std::to_string(len) +
                      " samples, above the batch budget of " +
                      std::to_string(max_samples));
    if (current_total + len > max_samples && !current.empty()) {
      batches.push_back(std::move(current));
      current.clear();
      current_total = 0;
    }
    current.push_back(idx);
    current_total += len;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

// -------------------------------------------------------------- optimizer

void AdamW::setup(const nn::ParamList& params) {
  step = 0;
  m.clear();
  v.clear();
  for (const auto& ref : params) {
    m.emplace_back(
        Eigen::ArrayXXd::Zero(ref.param->value.rows(),
                              ref.param->value.cols()));
    v.emplace_back(
        Eigen::ArrayXXd::Zero(ref.param->value.rows(),
                              ref.param->value.cols()));
  }
}

void AdamW::apply(const nn::ParamList& params, double lr) {
  if (m.size() != params.size())
    throw InternalError("optimizer state does not match the parameter list");
  ++step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (size_t k = 0; k < params.size(); ++k) {
    nn::Param& p = *params[k].param;
    if (!p.grad.allFinite())
      throw InternalError("non-finite gradient in " + params[k].name +
                          " at step " + std::to_string(step));
    Eigen::ArrayXXd g = p.grad.array();
    m[k] = beta1 * m[k] + (1.0 - beta1) * g;
    v[k] = beta2 * v[k] + (1.0 - beta2) * g.square();
    Eigen::ArrayXXd mhat = m[k] / bc1;
    Eigen::ArrayXXd vhat = v[k] / bc2;
    p.value.array() -=
        lr * (mhat / (vhat.sqrt() + eps) + weight_decay * p.value.array());
  }
}

double LrSchedule::at(long step) const {
  double warm = warmup > 0
                    ? std::min(1.0, static_cast<double>(step) /
                                        static_cast<double>(warmup))
                    : 1.0;
  return peak * warm * std::pow(0.5, halvings);
}

bool LrSchedule::observe(double val) {
  if (val < best) {
    best = val;
    stale = 0;
    return false;
  }
  ++stale;
  if (stale >= patience) {
    ++halvings;
    stale = 0;
    return true;
  }
  return false;
}

// ------------------------------------------------------------ preparation

std::vector<PreparedUtterance> prepare_utterances(Dataset* data,
                                                  const std::string& split,
                                                  const std::string& mode,
                                                  long n_phonemes,
                                                  long downsample) {
  std::vector<PreparedUtterance> out;
  for (size_t i = 0; i < data->utterances.size(); ++i) {
    Utterance& utt = data->utterances[i];
    if (utt.split != split) continue;
    if (!mode.empty() && utt.mode != mode) continue;
    if (utt.processed.samples.rows() == 0)
      preprocess_utterance(&utt, downsample);

    const Utterance& ref =
        utt.mode == "silent" ? data->at(utt.paired_id) : utt;
    if (ref.features.n_frames() == 0)
      throw DataError("utterance " + utt.id + " has no reference features" +
                      (utt.mode == "silent" ? " (from " + ref.id + ")" : ""));
    if (ref.phones.labels.empty())
      throw DataError("utterance " + utt.id + " has no reference phones" +
                      (utt.mode == "silent" ? " (from " + ref.id + ")" : ""));

    long n_feat = ref.features.n_frames();
    long n_phone = ref.phones.n_frames();
    if (std::abs(n_feat - n_phone) > 2)
      throw DataError("utterance " + ref.id + ": " + std::to_string(n_feat) +
                      " feature frames vs " + std::to_string(n_phone) +
                      " phone frames");
    long n = std::min(n_feat, n_phone);

    PreparedUtterance prep;
    prep.index = i;
    prep.signal = utt.processed.samples;
    prep.target_feats = ref.features.frames.topRows(n);
    std::vector<int> labels(ref.phones.labels.begin(),
                            ref.phones.labels.begin() + n);
    prep.target_post = one_hot_rows(labels, n_phonemes);
    prep.labels = std::move(labels);
    prep.aligned = utt.mode == "silent";
    prep.session = utt.session;
    out.push_back(std::move(prep));
  }
  return out;
}

ValScore validate_model(const SstModel& model,
                        const std::vector<PreparedUtterance>& utts,
                        double lambda) {
  ValScore score;
  for (const PreparedUtterance& prep : utts) {
    ModelCache cache;
    ModelOutput pred =
        model.forward(prep.signal, prep.session, nullptr, &cache);
    AlignmentLoss loss =
        prep.aligned
            ? aligned_loss(prep.target_feats, prep.target_post, pred.features,
                           pred.phone_logits, lambda, false)
            : direct_loss(prep.target_feats, prep.target_post, pred.features,
                          pred.phone_logits, lambda, false);
    score.total += loss.total;
    score.feature += loss.feature;
    score.phoneme += loss.phoneme;
    ++score.n_utts;
  }
  return score;
}

// -------------------------------------------------------------- the loop

namespace {

void write_row(std::ostream& out, int epoch, long step, double lr,
               double train_loss, bool has_train, const ValScore* val) {
  out << epoch << ',' << step << ',' << lr << ',';
  if (has_train) out << train_loss;
  out << ',';
  if (val != nullptr)
    out << val->total << ',' << val->feature << ',' << val->phoneme;
  else
    out << ",,";
  out << '\n';
}

}  // namespace

TrainResult train(SstModel* model, Dataset* data, const TrainConfig& cfg) {
  cfg.validate();
  const ModelConfig& mc = model->config();
  long ds = mc.downsample();
  if (cfg.pack_len % ds != 0)
    throw ConfigError("train: pack_len " + std::to_string(cfg.pack_len) +
                      " is not a multiple of the model downsample " +
                      std::to_string(ds));

  std::vector<PreparedUtterance> train_utts =
      prepare_utterances(data, "train", "", mc.n_phonemes, ds);
  std::vector<PreparedUtterance> val_utts =
      prepare_utterances(data, "val", "silent", mc.n_phonemes, ds);
  if (train_utts.empty()) throw DataError("no training utterances");
  if (val_utts.empty()) throw DataError("no validation utterances");

  fs::create_directories(cfg.out_dir);
  TrainResult result;
  result.log_path = (fs::path(cfg.out_dir) / "train_log.csv").string();
  result.last_path = (fs::path(cfg.out_dir) / "last.mprm").string();
  result.best_path = (fs::path(cfg.out_dir) / "best.mprm").string();
  std::ofstream log(result.log_path);
  if (!log) throw InputError("cannot write " + result.log_path);
  log << std::setprecision(12);
  log << "epoch,step,lr,train_loss,val_loss,val_feature_loss,"
         "val_phoneme_loss\n";

  nn::ParamList params = model->params();
  AdamW opt;
  opt.weight_decay = cfg.weight_decay;
  opt.setup(params);
  LrSchedule schedule;
  schedule.peak = cfg.peak_lr;
  schedule.warmup = cfg.warmup_steps;
  schedule.patience = cfg.patience;

  Rng shuffle_rng(mix64(cfg.seed + 1));
  uint64_t dropout_base = mix64(cfg.seed + 2);

  ValScore val0 = validate_model(*model, val_utts, cfg.lambda);
  result.initial_val = val0.total;
  write_row(log, 0, 0, 0.0, 0.0, false, &val0);
  log.flush();

  std::vector<long> lengths;
  for (const auto& prep : train_utts) lengths.push_back(prep.signal.rows());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<size_t> order(train_utts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(&order);
    auto batches = make_batches(order, lengths, cfg.batch_samples);

    for (size_t b = 0; b < batches.size(); ++b) {
      const std::vector<size_t>& batch = batches[b];
      std::vector<const Eigen::MatrixXd*> signals;
      std::vector<int> sessions;
      for (size_t idx : batch) {
        signals.push_back(&train_utts[idx].signal);
        sessions.push_back(train_utts[idx].session);
      }
      Packed packed = pack_batch(signals, sessions, cfg.pack_len, ds);

      long n_rows = packed.n_rows();
      std::vector<ModelCache> caches(static_cast<size_t>(n_rows));
      std::vector<Eigen::MatrixXd> row_feats, row_logits;
      for (long r = 0; r < n_rows; ++r) {
        uint64_t drop_seed = hash_combine(
            hash_combine(hash_combine(dropout_base,
                                      static_cast<uint64_t>(epoch)),
                         static_cast<uint64_t>(b)),
            static_cast<uint64_t>(r));
        Rng drop_rng(drop_seed);
        ModelOutput out = model->forward(packed.rows[static_cast<size_t>(r)],
                                         packed.frame_sessions[
                                             static_cast<size_t>(r)],
                                         &drop_rng,
                                         &caches[static_cast<size_t>(r)]);
        row_feats.push_back(std::move(out.features));
        row_logits.push_back(std::move(out.phone_logits));
      }

      std::vector<Eigen::MatrixXd> utt_feats =
          unpack_frames(packed, row_feats);
      std::vector<Eigen::MatrixXd> utt_logits =
          unpack_frames(packed, row_logits);

      double inv_b = 1.0 / static_cast<double>(batch.size());
      double batch_loss = 0.0;
      std::vector<Eigen::MatrixXd> utt_dfeats, utt_dlogits;
      for (size_t k = 0; k < batch.size(); ++k) {
        const PreparedUtterance& prep = train_utts[batch[k]];
        AlignmentLoss loss =
            prep.aligned
                ? aligned_loss(prep.target_feats, prep.target_post,
                               utt_feats[k], utt_logits[k], cfg.lambda, true)
                : direct_loss(prep.target_feats, prep.target_post,
                              utt_feats[k], utt_logits[k], cfg.lambda, true);
        batch_loss += inv_b * loss.total;
        utt_dfeats.push_back(inv_b * loss.d_features);
        utt_dlogits.push_back(inv_b * loss.d_logits);
      }
      if (!std::isfinite(batch_loss)) {
        save_checkpoint(result.last_path, model);
        throw InternalError("non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(b));
      }

      std::vector<Eigen::MatrixXd> row_dfeats =
          repack_frame_grads(packed, utt_dfeats);
      std::vector<Eigen::MatrixXd> row_dlogits =
          repack_frame_grads(packed, utt_dlogits);

      nn::zero_grads(params);
      for (long r = 0; r < n_rows; ++r)
        model->backward(row_dfeats[static_cast<size_t>(r)],
                        row_dlogits[static_cast<size_t>(r)],
                        caches[static_cast<size_t>(r)]);

      double lr = schedule.at(opt.step + 1);
      try {
        opt.apply(params, lr);
      } catch (const InternalError&) {
        save_checkpoint(result.last_path, model);
        throw;
      }
      write_row(log, epoch, opt.step, lr, batch_loss, true, nullptr);
    }

    ValScore val = validate_model(*model, val_utts, cfg.lambda);
    result.val_history.push_back(val.total);
    write_row(log, epoch, opt.step, schedule.at(opt.step), 0.0, false, &val);
    log.flush();

    save_checkpoint(result.last_path, model);
    if (val.total < result.best_val) {
      result.best_val = val.total;
      save_checkpoint(result.best_path, model);
    }
    schedule.observe(val.total);
  }
  return result;
}

}  // namespace sst
