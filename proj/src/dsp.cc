// sst/dsp.cc

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

#include "sst/dsp.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "sst/common.h"

namespace sst {

namespace {

// Direct-form-II biquad, zero initial state.
struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1

  void apply_forward(Eigen::Ref<Eigen::VectorXd> x) const {
    double w1 = 0.0, w2 = 0.0;
    for (long n = 0; n < x.size(); ++n) {
      double w0 = x[n] - a1 * w1 - a2 * w2;
      x[n] = b0 * w0 + b1 * w1 + b2 * w2;
      w2 = w1;
      w1 = w0;
    }
  }
};

// RBJ cookbook notch.
Biquad design_notch(double freq, double sample_rate, double q) {
  double w0 = 2.0 * M_PI * freq / sample_rate;
  double alpha = std::sin(w0) / (2.0 * q);
  double a0 = 1.0 + alpha;
  return Biquad{1.0 / a0, -2.0 * std::cos(w0) / a0, 1.0 / a0,
                -2.0 * std::cos(w0) / a0, (1.0 - alpha) / a0};
}

// RBJ cookbook high-pass with the given section Q.
Biquad design_highpass(double freq, double sample_rate, double q) {
  double w0 = 2.0 * M_PI * freq / sample_rate;
  double cw = std::cos(w0);
  double alpha = std::sin(w0) / (2.0 * q);
  double a0 = 1.0 + alpha;
  return Biquad{(1.0 + cw) / (2.0 * a0), -(1.0 + cw) / a0, (1.0 + cw) / (2.0 * a0),
                -2.0 * cw / a0, (1.0 - alpha) / a0};
}

void check_finite(const RawSignal& s, const char* op) {
  if (!s.samples.allFinite())
    throw InputError(std::string(op) + ": input contains non-finite samples");
}

double bessel_i0(double x) {
  // power series; converges quickly for the beta values used here
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

}  // namespace

RawSignal notch_filter_bank(const RawSignal& signal, double base_freq,
                            int max_harmonic) {
  if (signal.length() == 0) throw InputError("notch_filter_bank: empty signal");
  if (base_freq <= 0.0 || max_harmonic < 1)
    throw ConfigError("notch_filter_bank: base_freq and max_harmonic must be positive");
  double nyquist = signal.sample_rate / 2.0;
  if (base_freq * max_harmonic >= nyquist)
    throw ConfigError("notch_filter_bank: harmonic at or above Nyquist");
  check_finite(signal, "notch_filter_bank");

  constexpr double kNotchQ = 30.0;
  RawSignal out = signal;
  for (int h = 1; h <= max_harmonic; ++h) {
    Biquad bq = design_notch(base_freq * h, signal.sample_rate, kNotchQ);
    for (int c = 0; c < out.channels(); ++c) bq.apply_forward(out.samples.col(c));
  }
  return out;
}

RawSignal highpass_filter(const RawSignal& signal, double cutoff) {
  if (cutoff <= 0.0) throw ConfigError("highpass_filter: non-positive cutoff");
  if (cutoff >= signal.sample_rate / 2.0)
    throw ConfigError("highpass_filter: cutoff at or above Nyquist");
  check_finite(signal, "highpass_filter");

  // Butterworth order-4 section Qs: 1/(2 cos(pi/8)), 1/(2 cos(3 pi/8))
  const double q1 = 0.5 / std::cos(M_PI / 8.0);
  const double q2 = 0.5 / std::cos(3.0 * M_PI / 8.0);
  Biquad s1 = design_highpass(cutoff, signal.sample_rate, q1);
  Biquad s2 = design_highpass(cutoff, signal.sample_rate, q2);

  RawSignal out = signal;
  for (int c = 0; c < out.channels(); ++c) {
    auto col = out.samples.col(c);
    s1.apply_forward(col);
    s2.apply_forward(col);
    col.reverseInPlace();
    s1.apply_forward(col);
    s2.apply_forward(col);
    col.reverseInPlace();
  }
  return out;
}

RawSignal resample_1000_to_800(const RawSignal& signal) {
  if (signal.sample_rate != 1000.0)
    throw ConfigError("resample_1000_to_800: input must be at 1000 Hz");
  check_finite(signal, "resample_1000_to_800");

  constexpr int kUp = 4;
  constexpr int kDown = 5;
  constexpr int kTaps = 161;  // at the 4 kHz intermediate rate
  constexpr int kCenter = (kTaps - 1) / 2;
  constexpr double kBeta = 8.0;

  // Windowed sinc with cutoff pi/5 (the 400 Hz target Nyquist).
  static const std::vector<double> kernel = [] {
    std::vector<double> h(kTaps);
    double i0b = bessel_i0(kBeta);
    for (int j = 0; j < kTaps; ++j) {
      double t = (j - kCenter) / static_cast<double>(kDown);
      double sinc = t == 0.0 ? 1.0 : std::sin(M_PI * t) / (M_PI * t);
      double r = (j - kCenter) / static_cast<double>(kCenter);
      double w = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
      h[j] = sinc * w;
    }
    return h;
  }();
  // Per-branch sums; dividing by these preserves DC exactly.
  static const std::vector<double> branch_sum = [] {
    std::vector<double> s(kUp, 0.0);
    for (int j = 0; j < kTaps; ++j) s[j % kUp] += kernel[j];
    return s;
  }();

  const long n_in = signal.length();
  const long n_out = std::lround(0.8 * static_cast<double>(n_in));
  RawSignal out;
  out.sample_rate = 800.0;
  out.samples.setZero(n_out, signal.channels());

  for (long m = 0; m < n_out; ++m) {
    long pos = kDown * m + kCenter;  // intermediate-rate index of tap 0
    int phase = static_cast<int>(pos % kUp);
    for (long j = phase; j < kTaps; j += kUp) {
      long src = (pos - j) / kUp;  // exact: j == pos (mod kUp)
      src = std::clamp<long>(src, 0, n_in - 1);
      out.samples.row(m) += kernel[j] * signal.samples.row(src);
    }
    out.samples.row(m) /= branch_sum[phase];
  }
  return out;
}

RawSignal scale_signal(const RawSignal& signal, double divisor) {
  if (divisor == 0.0) throw ConfigError("scale_signal: divisor must be nonzero");
  RawSignal out = signal;
  out.samples /= divisor;
  return out;
}

ProcessedSignal preprocess_emg(const RawSignal& raw) {
  RawSignal x = notch_filter_bank(raw);
  x = highpass_filter(x);
  x = resample_1000_to_800(x);
  x = scale_signal(x);
  ProcessedSignal out;
  out.samples = std::move(x.samples);
  out.scale_applied = true;
  return out;
}

namespace {

void fft_radix2(std::vector<std::complex<double>>* a) {
  const size_t n = a->size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap((*a)[i], (*a)[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = (*a)[i + k];
        std::complex<double> v = (*a)[i + k + len / 2] * w;
        (*a)[i + k] = u + v;
        (*a)[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

FeatureSequence extract_mfcc(const RawSignal& audio, const MfccConfig& cfg) {
  if (audio.channels() != 1) throw ConfigError("extract_mfcc: audio must be mono");
  if (audio.sample_rate < 8000.0)
    throw ConfigError("extract_mfcc: sample rate must be >= 8 kHz");
  if (cfg.n_coeffs < 1 || cfg.n_coeffs > cfg.n_mel)
    throw ConfigError("extract_mfcc: need 1 <= n_coeffs <= n_mel");
  check_finite(audio, "extract_mfcc");

  const double sr = audio.sample_rate;
  const long frame_len = std::lround(cfg.frame_len_s * sr);
  const long hop = std::lround(cfg.frame_hop_s * sr);
  const long n = audio.length();

  FeatureSequence out;
  if (n < frame_len) {
    out.frames.resize(0, cfg.n_coeffs);
    return out;
  }
  const long n_frames = (n - frame_len) / hop + 1;

  size_t nfft = 1;
  while (static_cast<long>(nfft) < frame_len) nfft <<= 1;
  const size_t n_bins = nfft / 2 + 1;

  // Triangular mel bank over 0..Nyquist.
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sr / 2.0);
  std::vector<double> centers(cfg.n_mel + 2);
  for (int m = 0; m < cfg.n_mel + 2; ++m)
    centers[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mel + 1));
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(cfg.n_mel, n_bins);
  for (int m = 0; m < cfg.n_mel; ++m) {
    double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (size_t b = 0; b < n_bins; ++b) {
      double f = sr * static_cast<double>(b) / static_cast<double>(nfft);
      if (f > lo && f < mid)
        bank(m, b) = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        bank(m, b) = (hi - f) / (hi - mid);
    }
  }

  Eigen::VectorXd window(frame_len);
  for (long i = 0; i < frame_len; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (frame_len - 1));

  out.frames.resize(n_frames, cfg.n_coeffs);
  std::vector<std::complex<double>> buf(nfft);
  const double dct_scale = std::sqrt(2.0 / cfg.n_mel);
  for (long fr = 0; fr < n_frames; ++fr) {
    auto frame = audio.samples.col(0).segment(fr * hop, frame_len);
    double energy = frame.squaredNorm();
    for (size_t i = 0; i < nfft; ++i)
      buf[i] = i < static_cast<size_t>(frame_len)
                   ? std::complex<double>(frame[i] * window[i], 0.0)
                   : std::complex<double>(0.0, 0.0);
    fft_radix2(&buf);
    Eigen::VectorXd power(n_bins);
    for (size_t b = 0; b < n_bins; ++b) power[b] = std::norm(buf[b]);
    Eigen::VectorXd logmel = (bank * power).array().max(1e-10).log();
    out.frames(fr, 0) = std::log(std::max(energy, 1e-10));
    for (int k = 1; k < cfg.n_coeffs; ++k) {
      double acc = 0.0;
      for (int m = 0; m < cfg.n_mel; ++m)
        acc += logmel[m] * std::cos(M_PI * k * (m + 0.5) / cfg.n_mel);
      out.frames(fr, k) = dct_scale * acc;
    }
  }
  return out;
}

}  // namespace sst
