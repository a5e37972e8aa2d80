// src/data-io.cc

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

#include "sst/data-io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "sst/common.h"
#include "sst/dsp.h"

namespace sst {

namespace fs = std::filesystem;
using nlohmann::json;

const Utterance& Dataset::at(const std::string& id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw InputError("no utterance with id " + id);
  return utterances[it->second];
}

void Dataset::reindex() {
  by_id.clear();
  n_sessions = 0;
  for (size_t i = 0; i < utterances.size(); ++i) {
    const Utterance& u = utterances[i];
    if (!by_id.emplace(u.id, i).second)
      throw DataError("duplicate utterance id " + u.id);
    n_sessions = std::max(n_sessions, u.session + 1);
  }
}

// ------------------------------------------------------------ EMGR files

namespace {
constexpr char kEmgrMagic[4] = {'E', 'M', 'G', 'R'};
constexpr char kFeatMagic[4] = {'F', 'E', 'A', 'T'};
}  // namespace

void write_emgr(const std::string& path, const RawSignal& signal) {
  long n = signal.length(), c = signal.channels();
  if (n == 0 || c == 0) throw InputError("refusing to write empty signal");
  if (c > 65535) throw InputError("too many channels for " + path);
  double rate = signal.sample_rate;
  if (rate <= 0.0 || rate != std::floor(rate))
    throw InputError("signal rate " + std::to_string(rate) +
                     " is not a positive integer");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(kEmgrMagic, 4);
  write_u16(out, 1);
  write_u16(out, static_cast<uint16_t>(c));
  write_u32(out, static_cast<uint32_t>(rate));
  write_u64(out, static_cast<uint64_t>(n));
  for (long t = 0; t < n; ++t)
    for (long ch = 0; ch < c; ++ch)
      write_f32(out, static_cast<float>(signal.samples(t, ch)));
  if (!out) throw InputError("write failed for " + path);
}

RawSignal read_emgr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kEmgrMagic, 4) != 0)
    throw DataError(path + " is not a signal file");
  uint16_t version = read_u16(in, path);
  if (version != 1)
    throw DataError(path + " has unsupported version " +
                    std::to_string(version));
  long c = read_u16(in, path);
  uint32_t rate = read_u32(in, path);
  long n = static_cast<long>(read_u64(in, path));
  if (c == 0 || rate == 0 || n == 0)
    throw DataError(path + " has an empty header field");
  RawSignal signal;
  signal.sample_rate = rate;
  signal.samples.resize(n, c);
  for (long t = 0; t < n; ++t)
    for (long ch = 0; ch < c; ++ch)
      signal.samples(t, ch) = read_f32(in, path);
  return signal;
}

// ------------------------------------------------------------ FEAT files

void write_feat(const std::string& path, const Eigen::MatrixXd& frames) {
  if (frames.cols() > 65535) throw InputError("too many dims for " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(kFeatMagic, 4);
  write_u64(out, static_cast<uint64_t>(frames.rows()));
  write_u16(out, static_cast<uint16_t>(frames.cols()));
  for (long i = 0; i < frames.rows(); ++i)
    for (long j = 0; j < frames.cols(); ++j)
      write_f32(out, static_cast<float>(frames(i, j)));
  if (!out) throw InputError("write failed for " + path);
}

Eigen::MatrixXd read_feat(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFeatMagic, 4) != 0)
    throw DataError(path + " is not a feature file");
  long n = static_cast<long>(read_u64(in, path));
  long d = read_u16(in, path);
  Eigen::MatrixXd frames(n, d);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < d; ++j) frames(i, j) = read_f32(in, path);
  return frames;
}

// ------------------------------------------------------------ phone files

void write_phones(const std::string& path, const std::vector<int>& labels,
                  const PhonemeInventory& inv) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (int p : labels) out << inv.symbol(p) << '\n';
  if (!out) throw InputError("write failed for " + path);
}

std::vector<int> read_phones(const std::string& path,
                             const PhonemeInventory& inv) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    try {
      labels.push_back(inv.id(line));
    } catch (const InputError&) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown phoneme symbol \"" + line + "\"");
    }
  }
  return labels;
}

// -------------------------------------------------------------- manifest

Dataset load_dataset(const std::string& dir) {
  fs::path root(dir);
  fs::path manifest = root / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open " + manifest.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("utterances") ||
      !doc["utterances"].is_array())
    throw DataError(manifest.string() + ": expected an utterances array");

  const PhonemeInventory& inv = PhonemeInventory::standard();
  Dataset data;
  for (const auto& entry : doc["utterances"]) {
    Utterance utt;
    try {
      utt.id = entry.at("id").get<std::string>();
      utt.session = entry.at("session").get<int>();
      utt.mode = entry.at("mode").get<std::string>();
      utt.paired_id = entry.value("paired_id", std::string());
      utt.split = entry.at("split").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(manifest.string() + ": bad utterance entry: " +
                      e.what());
    }
    if (utt.mode != "vocalized" && utt.mode != "silent")
      throw DataError(manifest.string() + ": utterance " + utt.id +
                      " has unknown mode \"" + utt.mode + "\"");
    if (utt.split != "train" && utt.split != "val")
      throw DataError(manifest.string() + ": utterance " + utt.id +
                      " has unknown split \"" + utt.split + "\"");
    if (utt.session < 0)
      throw DataError(manifest.string() + ": utterance " + utt.id +
                      " has negative session");
    const auto& files = entry.at("files");
    utt.emg = read_emgr((root / files.at("emg").get<std::string>()).string());
    if (files.contains("feat"))
      utt.features.frames =
          read_feat((root / files["feat"].get<std::string>()).string());
    if (files.contains("phone"))
      utt.phones.labels =
          read_phones((root / files["phone"].get<std::string>()).string(), inv);
    data.utterances.push_back(std::move(utt));
  }
  data.reindex();
  if (doc.contains("n_sessions") && doc["n_sessions"].is_number_integer())
    data.n_sessions = std::max(data.n_sessions, doc["n_sessions"].get<int>());
  for (const Utterance& u : data.utterances) {
    if (u.paired_id.empty()) continue;
    const Utterance& pair = data.at(u.paired_id);
    if (u.mode == "silent" && pair.mode != "vocalized")
      throw DataError("silent utterance " + u.id +
                      " is paired with non-vocalized " + pair.id);
  }
  return data;
}

void save_dataset(const std::string& dir, const Dataset& data) {
  fs::path root(dir);
  fs::create_directories(root / "emg");
  fs::create_directories(root / "feat");
  fs::create_directories(root / "phone");
  const PhonemeInventory& inv = PhonemeInventory::standard();

  json entries = json::array();
  for (const Utterance& u : data.utterances) {
    json files;
    std::string emg_rel = "emg/" + u.id + ".emgr";
    write_emgr((root / emg_rel).string(), u.emg);
    files["emg"] = emg_rel;
    if (u.features.n_frames() > 0) {
      std::string feat_rel = "feat/" + u.id + ".feat";
      write_feat((root / feat_rel).string(), u.features.frames);
      files["feat"] = feat_rel;
    }
    if (!u.phones.labels.empty()) {
      std::string phone_rel = "phone/" + u.id + ".txt";
      write_phones((root / phone_rel).string(), u.phones.labels, inv);
      files["phone"] = phone_rel;
    }
    entries.push_back({{"id", u.id},
                       {"session", u.session},
                       {"mode", u.mode},
                       {"paired_id", u.paired_id},
                       {"split", u.split},
                       {"files", files}});
  }
  json doc = {{"n_sessions", data.n_sessions}, {"utterances", entries}};
  fs::path manifest = root / "manifest.json";
  std::ofstream out(manifest);
  if (!out) throw InputError("cannot write " + manifest.string());
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("write failed for " + manifest.string());
}

void preprocess_utterance(Utterance* utt, long factor) {
  utt->processed = preprocess_emg(utt->emg);
  long n = utt->processed.samples.rows();
  long keep = n - n % factor;
  if (keep == 0)
    throw DataError("utterance " + utt->id + " is too short: " +
                    std::to_string(n) + " processed samples");
  if (keep != n) utt->processed.samples.conservativeResize(keep, Eigen::NoChange);
}

// ------------------------------------------------------------- generator

namespace {

// Fixed rates of the corpus: raw signals at 1000 Hz, 10 samples per frame.
constexpr long kSamplesPerFrame = 10;
constexpr double kRawRate = 1000.0;
constexpr int kArtDim = 6;
constexpr int kPadFrames = 10;  // silence padding on each side

struct Segment {
  int phone = 0;
  long start = 0;  // frame offset inside the content region
  long dur = 0;
};

struct SessionMix {
  Eigen::MatrixXd m0, m1, m2;  // channels x articulators
};

// Binomial smoothing along time with clamped edges.
Eigen::MatrixXd smooth_rows(const Eigen::MatrixXd& x) {
  static const double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                    1.0 / 16};
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (long f = 0; f < x.rows(); ++f)
    for (int k = 0; k < 5; ++k) {
      long src = std::clamp<long>(f + k - 2, 0, x.rows() - 1);
      y.row(f) += kKernel[k] * x.row(src);
    }
  return y;
}

Eigen::RowVectorXd interp_row(const Eigen::MatrixXd& x, double pos) {
  long i0 = static_cast<long>(std::floor(pos));
  i0 = std::clamp<long>(i0, 0, x.rows() - 1);
  long i1 = std::min<long>(i0 + 1, x.rows() - 1);
  double frac = std::clamp(pos - static_cast<double>(i0), 0.0, 1.0);
  return (1.0 - frac) * x.row(i0) + frac * x.row(i1);
}

// The signal carries the articulator trajectory in amplitude-modulated
// carriers at 100 and 200 Hz.  Both avoid the mains harmonics removed by
// the notch bank, sit well inside the resampler passband, and complete a
// whole number of cycles per frame, so every frame of the processed signal
// is the same carrier pattern scaled by the local articulator values.
Eigen::MatrixXd render_emg(const Eigen::MatrixXd& art, const SessionMix& mix,
                           double noise, Rng* rng) {
  long frames = art.rows();
  long n = frames * kSamplesPerFrame;
  long channels = mix.m0.rows();
  Eigen::MatrixXd emg(n, channels);
  for (long s = 0; s < n; ++s) {
    long f = s / kSamplesPerFrame;
    double t = static_cast<double>(s) / kRawRate;
    Eigen::RowVectorXd u = art.row(f);
    Eigen::RowVectorXd base = u * mix.m0.transpose();
    Eigen::RowVectorXd am1 = u * mix.m1.transpose();
    Eigen::RowVectorXd am2 = u * mix.m2.transpose();
    double c1 = std::cos(2.0 * M_PI * 100.0 * t);
    double c2 = std::cos(2.0 * M_PI * 200.0 * t + 0.7);
    for (long ch = 0; ch < channels; ++ch)
      emg(s, ch) = 10.0 * (0.3 * base(ch) + c1 * am1(ch) + c2 * am2(ch) +
                           noise * rng->gaussian());
  }
  return emg;
}

Eigen::MatrixXd random_matrix(long rows, long cols, double scale, Rng* rng) {
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = scale * rng->uniform(-1.0, 1.0);
  return m;
}

}  // namespace

Dataset synth_dataset(const SynthConfig& cfg) {
  if (cfg.n_pairs < 1) throw ConfigError("synth: n_pairs must be positive");
  if (cfg.n_sessions < 1)
    throw ConfigError("synth: n_sessions must be positive");
  if (cfg.n_channels < 1)
    throw ConfigError("synth: n_channels must be positive");
  if (cfg.n_features < 1)
    throw ConfigError("synth: n_features must be positive");
  if (cfg.min_seconds <= 0.0 || cfg.max_seconds < cfg.min_seconds)
    throw ConfigError("synth: bad duration range");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
    throw ConfigError("synth: val_fraction must lie in [0, 1)");

  const PhonemeInventory& inv = PhonemeInventory::standard();
  const std::vector<std::string> subset_syms = {"P", "B", "T", "D", "K",
                                                "G", "M", "N", "S", "Z"};
  std::vector<int> subset;
  for (const auto& s : subset_syms) subset.push_back(inv.id(s));
  int sil = inv.silence_id();

  Rng rng(cfg.seed);

  // Per-phoneme articulator targets; silence rests at the origin.
  std::vector<Eigen::RowVectorXd> targets(
      static_cast<size_t>(inv.size()),
      Eigen::RowVectorXd::Zero(kArtDim));
  for (int p : subset) {
    Eigen::RowVectorXd v(kArtDim);
    for (int a = 0; a < kArtDim; ++a) v(a) = rng.uniform(-1.0, 1.0);
    targets[static_cast<size_t>(p)] = v;
  }

  // Feature map shared by every utterance.
  Eigen::MatrixXd feat_map = random_matrix(cfg.n_features, kArtDim,
                                           1.0 / std::sqrt(1.0 * kArtDim),
                                           &rng);

  // Session-specific electrode mixings, perturbations of a common base.
  Eigen::MatrixXd base0 = random_matrix(cfg.n_channels, kArtDim, 1.0, &rng);
  Eigen::MatrixXd base1 = random_matrix(cfg.n_channels, kArtDim, 1.0, &rng);
  Eigen::MatrixXd base2 = random_matrix(cfg.n_channels, kArtDim, 1.0, &rng);
  std::vector<SessionMix> mixes;
  for (int s = 0; s < cfg.n_sessions; ++s) {
    SessionMix mix;
    mix.m0 = base0.cwiseProduct(
        random_matrix(cfg.n_channels, kArtDim, 0.15, &rng).array().exp()
            .matrix());
    mix.m1 = base1.cwiseProduct(
        random_matrix(cfg.n_channels, kArtDim, 0.15, &rng).array().exp()
            .matrix());
    mix.m2 = base2.cwiseProduct(
        random_matrix(cfg.n_channels, kArtDim, 0.15, &rng).array().exp()
            .matrix());
    mixes.push_back(std::move(mix));
  }

  // Which pairs are held out.
  std::vector<int> pair_split(static_cast<size_t>(cfg.n_pairs), 0);
  {
    std::vector<size_t> order(static_cast<size_t>(cfg.n_pairs));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(&order);
    long n_val = std::lround(cfg.val_fraction * cfg.n_pairs);
    for (long i = 0; i < n_val; ++i) pair_split[order[static_cast<size_t>(i)]] = 1;
  }

  Dataset data;
  char id_buf[16];
  for (int pair = 0; pair < cfg.n_pairs; ++pair) {
    int session = pair % cfg.n_sessions;
    std::string split = pair_split[static_cast<size_t>(pair)] ? "val" : "train";
    std::snprintf(id_buf, sizeof(id_buf), "%04d", pair);
    std::string vid = std::string("v") + id_buf;
    std::string sid = std::string("s") + id_buf;

    // Content segments.
    double seconds = rng.uniform(cfg.min_seconds, cfg.max_seconds);
    long content = std::lround(seconds * 100.0);
    std::vector<Segment> segments;
    long used = 0;
    while (used < content) {
      Segment seg;
      seg.phone = subset[rng.randint(subset.size())];
      seg.start = used;
      seg.dur = std::min<long>(8 + static_cast<long>(rng.randint(13)),
                               content - used);
      segments.push_back(seg);
      used += seg.dur;
    }

    // Vocalized trajectory and labels.
    long frames = content + 2 * kPadFrames;
    Eigen::MatrixXd art = Eigen::MatrixXd::Zero(frames, kArtDim);
    std::vector<int> labels(static_cast<size_t>(frames), sil);
    for (const Segment& seg : segments)
      for (long f = 0; f < seg.dur; ++f) {
        long row = kPadFrames + seg.start + f;
        art.row(row) = targets[static_cast<size_t>(seg.phone)];
        labels[static_cast<size_t>(row)] = seg.phone;
      }
    Eigen::MatrixXd art_sm = smooth_rows(art);

    Utterance voc;
    voc.id = vid;
    voc.session = session;
    voc.mode = "vocalized";
    voc.paired_id = sid;
    voc.split = split;
    voc.emg.sample_rate = kRawRate;
    voc.emg.samples = render_emg(art_sm, mixes[static_cast<size_t>(session)],
                                 cfg.noise, &rng);
    voc.features.frames = art_sm * feat_map.transpose();
    for (long i = 0; i < voc.features.frames.rows(); ++i)
      for (long j = 0; j < voc.features.frames.cols(); ++j)
        voc.features.frames(i, j) += 0.1 * cfg.noise * rng.gaussian();
    voc.phones.labels = labels;

    // Silent rendition: the content region is re-timed segment by segment
    // with slopes in [0.7, 1.4] and re-rendered through the same mixing.
    std::vector<long> warped_durs;
    long warped_content = 0;
    for (const Segment& seg : segments) {
      double slope = rng.uniform(0.7, 1.4);
      long d = std::max<long>(1, std::lround(slope * seg.dur));
      warped_durs.push_back(d);
      warped_content += d;
    }
    long sframes = warped_content + 2 * kPadFrames;
    Eigen::MatrixXd sart(sframes, kArtDim);
    std::vector<int> slabels(static_cast<size_t>(sframes), sil);
    for (int f = 0; f < kPadFrames; ++f) {
      sart.row(f) = art_sm.row(f);
      sart.row(sframes - 1 - f) = art_sm.row(frames - 1 - f);
    }
    long out_f = kPadFrames;
    for (size_t k = 0; k < segments.size(); ++k) {
      const Segment& seg = segments[k];
      long d = warped_durs[k];
      for (long f = 0; f < d; ++f) {
        double rel = (static_cast<double>(f) + 0.5) / static_cast<double>(d);
        double src = kPadFrames + seg.start + rel * seg.dur - 0.5;
        sart.row(out_f) = interp_row(art_sm, src);
        slabels[static_cast<size_t>(out_f)] = seg.phone;
        ++out_f;
      }
    }

    Utterance sil_utt;
    sil_utt.id = sid;
    sil_utt.session = session;
    sil_utt.mode = "silent";
    sil_utt.paired_id = vid;
    sil_utt.split = split;
    sil_utt.emg.sample_rate = kRawRate;
    sil_utt.emg.samples = render_emg(
        sart, mixes[static_cast<size_t>(session)], cfg.noise, &rng);
    sil_utt.phones.labels = slabels;

    data.utterances.push_back(std::move(voc));
    data.utterances.push_back(std::move(sil_utt));
  }
  data.reindex();
  data.n_sessions = std::max(data.n_sessions, cfg.n_sessions);
  return data;
}

}  // namespace sst
