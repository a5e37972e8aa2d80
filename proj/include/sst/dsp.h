// sst/dsp.h

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

#ifndef SST_DSP_H_
#define SST_DSP_H_

#include "sst/signal.h"

namespace sst {

// Cascade of second-order IIR notch filters at base_freq, 2*base_freq, ...,
// max_harmonic*base_freq, each with quality factor Q = 30, applied in a
// single forward pass with zero initial state.  Every harmonic must lie
// strictly below Nyquist.
RawSignal notch_filter_bank(const RawSignal& signal, double base_freq = 60.0,
                            int max_harmonic = 7);

// 4th-order Butterworth high-pass (two biquad sections), applied
// forward-backward for zero phase so downstream time alignment is not skewed
// by group delay.
RawSignal highpass_filter(const RawSignal& signal, double cutoff = 2.0);

// Rational 4/5 polyphase resampler, 1000 Hz -> 800 Hz.  Windowed-sinc
// anti-aliasing kernel (Kaiser beta 8.0, 161 taps at the 4 kHz intermediate
// rate), centered for zero phase, polyphase branches normalized and edges
// handled by endpoint replication so DC is preserved exactly.  Output length
// is round(0.8 * input length).
RawSignal resample_1000_to_800(const RawSignal& signal);

// Divides every sample by divisor.
RawSignal scale_signal(const RawSignal& signal, double divisor = 10.0);

// Full preprocessing chain: notch bank -> high-pass -> resample -> scale.
// Input must be at 1000 Hz.
ProcessedSignal preprocess_emg(const RawSignal& raw);

struct MfccConfig {
  int n_coeffs = 26;       // coefficient 0 is log frame energy
  int n_mel = 40;
  double frame_len_s = 0.025;
  double frame_hop_s = 0.010;
};

// MFCC extraction for mono audio at >= 8 kHz.  Hamming window, power
// spectrum, 40 triangular mel filters spanning 0..Nyquist (HTK mel scale),
// log with a 1e-10 floor, orthonormal-scale DCT-II; coefficient 0 is
// replaced by log frame energy.  Audio shorter than one window yields an
// empty sequence.
FeatureSequence extract_mfcc(const RawSignal& audio, const MfccConfig& cfg = {});

}  // namespace sst

#endif  // SST_DSP_H_
