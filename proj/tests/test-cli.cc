// tests/test-cli.cc

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

// Drives the installed binary end to end over a small synthetic corpus:
// synth, preprocess, train, eval and analyze, plus the exit-code contract.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "sst/data-io.h"
#include "test-util.h"

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(SST_CLI_PATH) + " " + args +
                    " > /dev/null 2> /dev/null";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("the pipeline runs end to end from the command line") {
  sst::testing::TempDir tmp("cli");
  std::string cfg_path = tmp.file("run.json");
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({
      "seed": 21,
      "model": {"n_channels": 3, "n_sessions": 2, "conv_blocks": 3,
                "model_dim": 16, "n_layers": 1, "n_heads": 4,
                "ff_hidden": 32, "window": 8, "dropout": 0.1,
                "n_features": 6, "n_phonemes": 40},
      "train": {"pack_len": 320, "batch_samples": 3200, "peak_lr": 2e-3,
                "warmup_steps": 2, "epochs": 2},
      "synth": {"n_pairs": 6, "n_sessions": 2, "n_channels": 3,
                "n_features": 6, "min_seconds": 0.5, "max_seconds": 0.8,
                "val_fraction": 0.34}
    })";
  }
  std::string data = (tmp.path / "data").string();
  std::string run = (tmp.path / "run").string();
  std::string report = (tmp.path / "report").string();
  std::string hyp = tmp.file("hyp.txt");

  CHECK(run_cli("synth --config " + cfg_path + " --out " + data) == 0);
  CHECK(first_line(data + "/manifest.json") == "{");
  sst::Dataset corpus = sst::load_dataset(data);
  CHECK(corpus.utterances.size() == 12);

  std::string pre = (tmp.path / "pre").string();
  CHECK(run_cli("preprocess --data " + data + " --out " + pre) == 0);
  sst::RawSignal processed = sst::read_emgr(pre + "/v0000.emgr");
  CHECK(processed.sample_rate == 800.0);
  CHECK(processed.channels() == 3);

  CHECK(run_cli("train --config " + cfg_path + " --data " + data + " --out " +
                run) == 0);
  CHECK(first_line(run + "/train_log.csv") ==
        "epoch,step,lr,train_loss,val_loss,val_feature_loss,val_phoneme_loss");
  CHECK(std::ifstream(run + "/best.mprm").good());
  CHECK(std::ifstream(run + "/last.mprm").good());

  CHECK(run_cli("eval --config " + cfg_path + " --data " + data +
                " --checkpoint " + run + "/best.mprm --hypotheses " + hyp) ==
        0);
  // One hypothesis line per held-out silent utterance, id first.
  std::ifstream hyp_in(hyp);
  std::string line;
  int hyp_lines = 0;
  while (std::getline(hyp_in, line)) {
    ++hyp_lines;
    CHECK(line.rfind("s0", 0) == 0);
  }
  CHECK(hyp_lines == 2);

  CHECK(run_cli("analyze --config " + cfg_path + " --data " + data +
                " --checkpoint " + run + "/best.mprm --out " + report) == 0);
  CHECK(first_line(report + "/confusion.csv") ==
        "phoneme1,phoneme2,confusion,accuracy");
  CHECK(first_line(report + "/features.csv") ==
        "feature,majority,context_baseline,full_model");
}

TEST_CASE("exit codes distinguish config errors from failures") {
  sst::testing::TempDir tmp("cli-err");
  std::string bad = tmp.file("bad.json");
  {
    std::ofstream out(bad);
    out << R"({"train": {"lr": 0.1}})";  // unknown key
  }
  CHECK(run_cli("synth --config " + bad + " --out " +
                (tmp.path / "d").string()) == 2);

  // A missing dataset is an input failure, not a config problem.
  CHECK(run_cli("train --data " + (tmp.path / "absent").string() + " --out " +
                (tmp.path / "r").string()) == 1);

  // And the parser rejects a missing subcommand outright.
  CHECK(run_cli("") != 0);
}
