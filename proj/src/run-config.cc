// src/run-config.cc

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

#include "sst/run-config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sst/common.h"

namespace sst {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (known.find(key) == known.end())
      throw ConfigError("unknown key \"" + key + "\" in " + section);
  }
}

template <typename T>
void fetch(const json& obj, const std::string& section, const char* key,
           T* out) {
  if (!obj.contains(key)) return;
  try {
    *out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for \"" + std::string(key) + "\" in " +
                      section);
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object())
    throw ConfigError(origin + ": top level must be an object");
  reject_unknown(doc, origin,
                 {"seed", "data_dir", "model", "train", "synth"});

  RunConfig cfg;
  fetch(doc, origin, "seed", &cfg.seed);
  fetch(doc, origin, "data_dir", &cfg.data_dir);

  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (!m.is_object()) throw ConfigError(origin + ": model must be an object");
    std::string sec = origin + " model";
    reject_unknown(m, sec,
                   {"n_channels", "n_sessions", "conv_blocks", "model_dim",
                    "n_layers", "n_heads", "ff_hidden", "window", "dropout",
                    "n_features", "n_phonemes", "session_dim"});
    fetch(m, sec, "n_channels", &cfg.model.n_channels);
    fetch(m, sec, "n_sessions", &cfg.model.n_sessions);
    fetch(m, sec, "conv_blocks", &cfg.model.conv_blocks);
    fetch(m, sec, "model_dim", &cfg.model.model_dim);
    fetch(m, sec, "n_layers", &cfg.model.n_layers);
    fetch(m, sec, "n_heads", &cfg.model.n_heads);
    fetch(m, sec, "ff_hidden", &cfg.model.ff_hidden);
    fetch(m, sec, "window", &cfg.model.window);
    fetch(m, sec, "dropout", &cfg.model.dropout);
    fetch(m, sec, "n_features", &cfg.model.n_features);
    fetch(m, sec, "n_phonemes", &cfg.model.n_phonemes);
    fetch(m, sec, "session_dim", &cfg.model.session_dim);
  }

  cfg.train.seed = cfg.seed;
  if (doc.contains("train")) {
    const json& t = doc["train"];
    if (!t.is_object()) throw ConfigError(origin + ": train must be an object");
    std::string sec = origin + " train";
    reject_unknown(t, sec,
                   {"pack_len", "batch_samples", "peak_lr", "warmup_steps",
                    "weight_decay", "epochs", "lambda", "patience", "seed",
                    "out_dir"});
    fetch(t, sec, "pack_len", &cfg.train.pack_len);
    fetch(t, sec, "batch_samples", &cfg.train.batch_samples);
    fetch(t, sec, "peak_lr", &cfg.train.peak_lr);
    fetch(t, sec, "warmup_steps", &cfg.train.warmup_steps);
    fetch(t, sec, "weight_decay", &cfg.train.weight_decay);
    fetch(t, sec, "epochs", &cfg.train.epochs);
    fetch(t, sec, "lambda", &cfg.train.lambda);
    fetch(t, sec, "patience", &cfg.train.patience);
    fetch(t, sec, "seed", &cfg.train.seed);
    fetch(t, sec, "out_dir", &cfg.train.out_dir);
  }

  cfg.synth.seed = mix64(cfg.seed + 0x5eed);
  if (doc.contains("synth")) {
    const json& s = doc["synth"];
    if (!s.is_object()) throw ConfigError(origin + ": synth must be an object");
    std::string sec = origin + " synth";
    reject_unknown(s, sec,
                   {"n_pairs", "n_sessions", "n_channels", "n_features",
                    "min_seconds", "max_seconds", "noise", "val_fraction",
                    "seed"});
    fetch(s, sec, "n_pairs", &cfg.synth.n_pairs);
    fetch(s, sec, "n_sessions", &cfg.synth.n_sessions);
    fetch(s, sec, "n_channels", &cfg.synth.n_channels);
    fetch(s, sec, "n_features", &cfg.synth.n_features);
    fetch(s, sec, "min_seconds", &cfg.synth.min_seconds);
    fetch(s, sec, "max_seconds", &cfg.synth.max_seconds);
    fetch(s, sec, "noise", &cfg.synth.noise);
    fetch(s, sec, "val_fraction", &cfg.synth.val_fraction);
    fetch(s, sec, "seed", &cfg.synth.seed);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str(), path);
}

std::string RunConfig::to_json() const {
  json doc = {
      {"seed", seed},
      {"data_dir", data_dir},
      {"model",
       {{"n_channels", model.n_channels},
        {"n_sessions", model.n_sessions},
        {"conv_blocks", model.conv_blocks},
        {"model_dim", model.model_dim},
        {"n_layers", model.n_layers},
        {"n_heads", model.n_heads},
        {"ff_hidden", model.ff_hidden},
        {"window", model.window},
        {"dropout", model.dropout},
        {"n_features", model.n_features},
        {"n_phonemes", model.n_phonemes},
        {"session_dim", model.session_dim}}},
      {"train",
       {{"pack_len", train.pack_len},
        {"batch_samples", train.batch_samples},
        {"peak_lr", train.peak_lr},
        {"warmup_steps", train.warmup_steps},
        {"weight_decay", train.weight_decay},
        {"epochs", train.epochs},
        {"lambda", train.lambda},
        {"patience", train.patience},
        {"seed", train.seed},
        {"out_dir", train.out_dir}}},
      {"synth",
       {{"n_pairs", synth.n_pairs},
        {"n_sessions", synth.n_sessions},
        {"n_channels", synth.n_channels},
        {"n_features", synth.n_features},
        {"min_seconds", synth.min_seconds},
        {"max_seconds", synth.max_seconds},
        {"noise", synth.noise},
        {"val_fraction", synth.val_fraction},
        {"seed", synth.seed}}}};
  return doc.dump(2);
}

}  // namespace sst
