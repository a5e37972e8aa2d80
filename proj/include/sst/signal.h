// sst/signal.h

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

#ifndef SST_SIGNAL_H_
#define SST_SIGNAL_H_

#include <Eigen/Core>

namespace sst {

// Multichannel signal, time-major: samples(t, c).
struct RawSignal {
  Eigen::MatrixXd samples;
  double sample_rate = 0.0;

  long length() const { return samples.rows(); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

// Output of the preprocessing chain; always at 800 Hz.
struct ProcessedSignal {
  static constexpr double kRate = 800.0;

  Eigen::MatrixXd samples;  // time x channels
  bool scale_applied = false;

  long length() const { return samples.rows(); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

// Speech feature frames at 100 Hz; the pipeline uses 26 columns.
struct FeatureSequence {
  static constexpr double kFrameRate = 100.0;

  Eigen::MatrixXd frames;  // n_frames x dims

  long n_frames() const { return frames.rows(); }
  int dims() const { return static_cast<int>(frames.cols()); }
};

}  // namespace sst

#endif  // SST_SIGNAL_H_
