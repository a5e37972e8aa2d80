// tools/sst-main.cc

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

// Command-line entry point.  Subcommands: synth, preprocess, train, eval,
// analyze.  Exit status is 0 on success, 2 on configuration problems and
// 1 on any other failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "sst/alignment.h"
#include "sst/analysis.h"
#include "sst/common.h"
#include "sst/data-io.h"
#include "sst/dsp.h"
#include "sst/model.h"
#include "sst/run-config.h"
#include "sst/training.h"

namespace fs = std::filesystem;

namespace {

sst::RunConfig resolve_config(const std::string& config_path, bool have_seed,
                              uint64_t seed, const std::string& data_dir,
                              const std::string& out_dir) {
  sst::RunConfig cfg = config_path.empty()
                           ? sst::RunConfig()
                           : sst::RunConfig::from_file(config_path);
  if (have_seed) {
    cfg.seed = seed;
    cfg.train.seed = seed;
    cfg.synth.seed = sst::mix64(seed + 0x5eed);
  }
  if (!data_dir.empty()) cfg.data_dir = data_dir;
  if (!out_dir.empty()) cfg.train.out_dir = out_dir;
  return cfg;
}

int run_synth(const sst::RunConfig& cfg, const std::string& out_dir) {
  sst::Dataset data = sst::synth_dataset(cfg.synth);
  sst::save_dataset(out_dir, data);
  std::cout << "wrote " << data.utterances.size() << " utterances ("
            << cfg.synth.n_pairs << " pairs, " << data.n_sessions
            << " sessions) to " << out_dir << "\n";
  return 0;
}

int run_preprocess(const sst::RunConfig& cfg, const std::string& out_dir) {
  sst::Dataset data = sst::load_dataset(cfg.data_dir);
  fs::create_directories(out_dir);
  for (auto& utt : data.utterances) {
    sst::preprocess_utterance(&utt, 8);
    sst::RawSignal processed;
    processed.samples = utt.processed.samples;
    processed.sample_rate = sst::ProcessedSignal::kRate;
    sst::write_emgr((fs::path(out_dir) / (utt.id + ".emgr")).string(),
                    processed);
  }
  std::cout << "preprocessed " << data.utterances.size() << " utterances to "
            << out_dir << "\n";
  return 0;
}

int run_train(sst::RunConfig cfg) {
  sst::Dataset data = sst::load_dataset(cfg.data_dir);
  cfg.model.n_sessions = std::max<long>(cfg.model.n_sessions,
                                        data.n_sessions);
  std::cout << cfg.to_json() << "\n";
  sst::SstModel model(cfg.model, cfg.seed);
  sst::TrainResult result = sst::train(&model, &data, cfg.train);
  std::cout << "initial validation loss " << result.initial_val
            << ", best " << result.best_val << "\n"
            << "log: " << result.log_path << "\n"
            << "checkpoints: " << result.best_path << ", "
            << result.last_path << "\n";
  return 0;
}

int run_eval(const sst::RunConfig& cfg, const std::string& checkpoint,
             const std::string& out_dir, const std::string& hyp_path) {
  sst::SstModel model = sst::load_checkpoint(checkpoint);
  sst::Dataset data = sst::load_dataset(cfg.data_dir);
  const sst::ModelConfig& mc = model.config();
  std::vector<sst::PreparedUtterance> utts = sst::prepare_utterances(
      &data, "val", "silent", mc.n_phonemes, mc.downsample());
  if (utts.empty()) throw sst::DataError("no held-out silent utterances");

  const sst::PhonemeInventory& inv = sst::PhonemeInventory::standard();
  if (!out_dir.empty()) fs::create_directories(out_dir);
  std::ofstream hyp;
  if (!hyp_path.empty()) {
    hyp.open(hyp_path);
    if (!hyp) throw sst::InputError("cannot write " + hyp_path);
  }

  sst::ValScore score;
  for (const auto& prep : utts) {
    sst::ModelCache cache;
    sst::ModelOutput out =
        model.forward(prep.signal, prep.session, nullptr, &cache);
    sst::AlignmentLoss loss =
        sst::aligned_loss(prep.target_feats, prep.target_post, out.features,
                          out.phone_logits, cfg.train.lambda, false);
    score.total += loss.total;
    score.feature += loss.feature;
    score.phoneme += loss.phoneme;
    ++score.n_utts;
    const std::string& id = data.utterances[prep.index].id;
    if (!out_dir.empty())
      sst::write_alignment((fs::path(out_dir) / (id + ".align")).string(),
                           loss);
    if (hyp.is_open()) {
      std::vector<int> frame_labels;
      for (long f = 0; f < out.phone_logits.rows(); ++f) {
        Eigen::Index argmax;
        out.phone_logits.row(f).maxCoeff(&argmax);
        frame_labels.push_back(static_cast<int>(argmax));
      }
      hyp << id;
      for (int p : sst::collapse_runs(frame_labels, inv.silence_id()))
        hyp << ' ' << inv.symbol(p);
      hyp << '\n';
    }
  }
  std::cout << "utterances: " << score.n_utts << "\n"
            << "validation loss: " << score.total << " (feature "
            << score.feature << ", phoneme " << score.phoneme << ")\n";
  return 0;
}

int run_analyze(const sst::RunConfig& cfg, const std::string& checkpoint,
                const std::string& out_dir) {
  sst::SstModel model = sst::load_checkpoint(checkpoint);
  sst::Dataset data = sst::load_dataset(cfg.data_dir);
  const sst::ModelConfig& mc = model.config();
  const sst::PhonemeInventory& inv = sst::PhonemeInventory::standard();

  std::vector<sst::PreparedUtterance> train_utts = sst::prepare_utterances(
      &data, "train", "silent", mc.n_phonemes, mc.downsample());
  std::vector<sst::PreparedUtterance> val_utts = sst::prepare_utterances(
      &data, "val", "silent", mc.n_phonemes, mc.downsample());
  if (val_utts.empty()) throw sst::DataError("no held-out silent utterances");

  sst::AlignedEval train_eval =
      sst::align_predictions(model, train_utts, cfg.train.lambda);
  sst::AlignedEval val_eval =
      sst::align_predictions(model, val_utts, cfg.train.lambda);

  fs::create_directories(out_dir);
  auto rows = sst::pairwise_confusions(val_eval.truth, val_eval.pred_labels,
                                       static_cast<int>(mc.n_phonemes),
                                       inv.silence_id());
  std::string confusion_path =
      (fs::path(out_dir) / "confusion.csv").string();
  sst::write_confusion_csv(confusion_path, rows, inv);

  sst::ConfusionSetTable table = sst::ConfusionSetTable::standard(inv);
  std::vector<sst::FeatureReportRow> feature_rows;
  for (const auto& [feature, sets] : table.features) {
    sst::FeatureReportRow row;
    row.feature = feature;
    row.majority = sst::majority_class_accuracy(val_eval.truth, sets);
    row.full_model = sst::forced_choice_accuracy(val_eval.truth,
                                                 val_eval.posteriors, sets);
    std::vector<std::vector<int>> train_inputs, eval_inputs;
    for (const auto& seq : train_eval.utt_pred)
      train_inputs.push_back(
          sst::collapse_phonemes(seq, sets, static_cast<int>(mc.n_phonemes)));
    for (const auto& seq : val_eval.utt_pred)
      eval_inputs.push_back(
          sst::collapse_phonemes(seq, sets, static_cast<int>(mc.n_phonemes)));
    row.context_baseline = sst::context_baseline_accuracy(
        mc, train_inputs, train_eval.utt_truth, eval_inputs,
        val_eval.utt_truth, sets,
        mc.n_phonemes + static_cast<long>(sets.size()), mc.n_phonemes,
        sst::ContextBaselineConfig());
    feature_rows.push_back(row);
    std::cout << feature << ": majority " << row.majority
              << ", context " << row.context_baseline << ", model "
              << row.full_model << "\n";
  }
  std::string features_path = (fs::path(out_dir) / "features.csv").string();
  sst::write_feature_csv(features_path, feature_rows);

  std::vector<std::vector<int>> refs, hyps;
  for (size_t u = 0; u < val_eval.utt_truth.size(); ++u) {
    refs.push_back(sst::collapse_runs(val_eval.utt_truth[u],
                                      inv.silence_id()));
    hyps.push_back(sst::collapse_runs(val_eval.utt_pred[u],
                                      inv.silence_id()));
  }
  std::cout << "phoneme token error rate: "
            << sst::token_error_rate(refs, hyps) << "\n"
            << "reports: " << confusion_path << ", " << features_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"silent speech transduction pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, checkpoint, hyp_path;
  uint64_t seed = 0;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--config", config_path, "run configuration (JSON)");
  synth->add_option("--out", out_dir, "output dataset directory")->required();
  CLI::Option* synth_seed = synth->add_option("--seed", seed, "random seed");

  CLI::App* preprocess = app.add_subcommand(
      "preprocess", "run the signal chain over a dataset");
  preprocess->add_option("--config", config_path, "run configuration (JSON)");
  preprocess->add_option("--data", data_dir, "dataset directory");
  preprocess->add_option("--out", out_dir, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "run configuration (JSON)");
  train->add_option("--data", data_dir, "dataset directory");
  train->add_option("--out", out_dir, "checkpoint and log directory");
  CLI::Option* train_seed = train->add_option("--seed", seed, "random seed");

  CLI::App* eval = app.add_subcommand("eval", "score held-out utterances");
  eval->add_option("--config", config_path, "run configuration (JSON)");
  eval->add_option("--data", data_dir, "dataset directory");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("--out", out_dir, "alignment dump directory");
  eval->add_option("--hypotheses", hyp_path, "predicted token output file");

  CLI::App* analyze = app.add_subcommand("analyze", "phoneme error analysis");
  analyze->add_option("--config", config_path, "run configuration (JSON)");
  analyze->add_option("--data", data_dir, "dataset directory");
  analyze->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  analyze->add_option("--out", out_dir, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(synth)) {
      sst::RunConfig cfg = resolve_config(config_path, !!*synth_seed, seed,
                                          data_dir, "");
      return run_synth(cfg, out_dir);
    }
    if (app.got_subcommand(preprocess)) {
      sst::RunConfig cfg = resolve_config(config_path, false, 0, data_dir,
                                          "");
      return run_preprocess(cfg, out_dir);
    }
    if (app.got_subcommand(train)) {
      sst::RunConfig cfg = resolve_config(config_path, !!*train_seed, seed,
                                          data_dir, out_dir);
      return run_train(cfg);
    }
    if (app.got_subcommand(eval)) {
      sst::RunConfig cfg = resolve_config(config_path, false, 0, data_dir,
                                          "");
      return run_eval(cfg, checkpoint, out_dir, hyp_path);
    }
    if (app.got_subcommand(analyze)) {
      sst::RunConfig cfg = resolve_config(config_path, false, 0, data_dir,
                                          "");
      return run_analyze(cfg, checkpoint, out_dir);
    }
  } catch (const sst::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
