// sst/run-config.h

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

#ifndef SST_RUN_CONFIG_H_
#define SST_RUN_CONFIG_H_

#include <string>

#include "sst/data-io.h"
#include "sst/model.h"
#include "sst/training.h"

namespace sst {

// One JSON file configuring a whole run: model, training, synthesis and
// paths.  Every key is optional and falls back to the defaults below;
// unknown keys are rejected so typos cannot silently change a run.  The
// top-level seed feeds the train and synth seeds unless a section sets
// its own.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SynthConfig synth;
  std::string data_dir = "data";
  uint64_t seed = 0;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text,
                                  const std::string& origin);

  // The effective configuration, serialized back out.
  std::string to_json() const;
};

}  // namespace sst

#endif  // SST_RUN_CONFIG_H_
