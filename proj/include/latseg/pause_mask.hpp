// latseg/pause_mask.hpp
//
// Per-frame speech/non-speech mask for the pause-based segmenters.
//
// Text format: one interval per line, "start_ms<TAB>end_ms<TAB>label" with
// label speech|nonspeech, intervals covering the stream without gaps.
// Binary sidecar: magic "CTCM", u32 version, u64 frames, f64 frame_ms,
// then one 0/1 byte per frame.

// Copyright 2026  latseg authors

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

#ifndef LATSEG_PAUSE_MASK_HPP_
#define LATSEG_PAUSE_MASK_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/lattice_io.hpp"

namespace latseg {

inline constexpr char kMaskMagic[4] = {'C', 'T', 'C', 'M'};
inline constexpr std::uint32_t kMaskVersion = 1;

struct PauseMask {
  std::vector<std::uint8_t> speech;  // 1 = speech, 0 = non-speech
  double frame_duration_ms = kDefaultFrameMs;

  std::size_t frames() const { return speech.size(); }
  double duration_ms() const { return static_cast<double>(frames()) * frame_duration_ms; }
  bool is_speech(std::size_t f) const {
    if (f >= frames()) throw BoundsError("pause mask: frame out of range");
    return speech[f] != 0;
  }
};

// Maximal non-speech runs [start, end) of at least `min_frames` frames.
inline std::vector<std::pair<std::size_t, std::size_t>> nonspeech_runs(
    const PauseMask& mask, std::size_t min_frames) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t start = 0;
  bool in_run = false;
  for (std::size_t f = 0; f < mask.frames(); ++f) {
    if (!mask.speech[f]) {
      if (!in_run) {
        in_run = true;
        start = f;
      }
    } else if (in_run) {
      in_run = false;
      if (f - start >= min_frames) runs.emplace_back(start, f);
    }
  }
  if (in_run && mask.frames() - start >= min_frames)
    runs.emplace_back(start, mask.frames());
  return runs;
}

inline PauseMask load_pause_mask_tsv(const std::string& path, double frame_duration_ms) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  if (!(frame_duration_ms > 0.0))
    throw ValidationError("pause mask: frame duration must be positive");
  struct Interval {
    double start, end;
    bool speech;
  };
  std::vector<Interval> intervals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, label;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') ||
        !std::getline(ss, label, '\t'))
      throw FormatError("'" + path + "' line " + std::to_string(lineno) +
                        ": expected start<TAB>end<TAB>label");
    Interval iv{};
    try {
      iv.start = std::stod(a);
      iv.end = std::stod(b);
    } catch (const std::exception&) {
      throw FormatError("'" + path + "' line " + std::to_string(lineno) +
                        ": bad number");
    }
    if (label == "speech")
      iv.speech = true;
    else if (label == "nonspeech")
      iv.speech = false;
    else
      throw FormatError("'" + path + "' line " + std::to_string(lineno) +
                        ": label must be speech|nonspeech");
    if (!(iv.end > iv.start))
      throw FormatError("'" + path + "' line " + std::to_string(lineno) +
                        ": empty interval");
    intervals.push_back(iv);
  }
  if (intervals.empty()) throw FormatError("'" + path + "': no intervals");
  double cursor = 0.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (std::abs(intervals[i].start - cursor) > 1e-6)
      throw FormatError("'" + path + "': interval " + std::to_string(i) +
                        " starts at " + std::to_string(intervals[i].start) +
                        ", expected " + std::to_string(cursor) + " (gap or overlap)");
    cursor = intervals[i].end;
  }
  PauseMask mask;
  mask.frame_duration_ms = frame_duration_ms;
  const std::size_t frames =
      static_cast<std::size_t>(std::llround(cursor / frame_duration_ms));
  mask.speech.resize(frames, 0);
  std::size_t iv = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    // Sample at the frame center so interval edges need not be frame-aligned.
    const double center = (static_cast<double>(f) + 0.5) * frame_duration_ms;
    while (iv + 1 < intervals.size() && center >= intervals[iv].end) ++iv;
    mask.speech[f] = intervals[iv].speech ? 1 : 0;
  }
  return mask;
}

inline void save_pause_mask_tsv(const std::string& path, const PauseMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  std::size_t f = 0;
  while (f < mask.frames()) {
    std::size_t e = f;
    while (e < mask.frames() && mask.speech[e] == mask.speech[f]) ++e;
    out << static_cast<long long>(std::llround(f * mask.frame_duration_ms)) << '\t'
        << static_cast<long long>(std::llround(e * mask.frame_duration_ms)) << '\t'
        << (mask.speech[f] ? "speech" : "nonspeech") << '\n';
    f = e;
  }
}

inline void save_pause_mask_sidecar(const std::string& path, const PauseMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  out.write(kMaskMagic, 4);
  detail::write_pod<std::uint32_t>(out, kMaskVersion);
  detail::write_pod<std::uint64_t>(out, mask.frames());
  detail::write_pod<double>(out, mask.frame_duration_ms);
  for (std::uint8_t b : mask.speech)
    out.write(reinterpret_cast<const char*>(&b), 1);
}

inline PauseMask load_pause_mask_sidecar(const std::string& path) {
  auto buf = detail::read_file_bytes(path);
  std::size_t off = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kMaskMagic, 4) != 0)
    throw FormatError("'" + path + "': bad magic (expected CTCM)");
  off = 4;
  auto version = detail::read_pod<std::uint32_t>(buf, off, path);
  if (version != kMaskVersion)
    throw FormatError("'" + path + "': unsupported mask version");
  auto frames = detail::read_pod<std::uint64_t>(buf, off, path);
  auto frame_ms = detail::read_pod<double>(buf, off, path);
  if (buf.size() - off != frames)
    throw FormatError("'" + path + "': truncated at byte " + std::to_string(off) +
                      ": header says " + std::to_string(frames) + " frames, have " +
                      std::to_string(buf.size() - off));
  PauseMask mask;
  mask.frame_duration_ms = frame_ms;
  mask.speech.resize(frames);
  for (std::uint64_t f = 0; f < frames; ++f)
    mask.speech[f] = buf[off + f] ? 1 : 0;
  return mask;
}

}  // namespace latseg

#endif  // LATSEG_PAUSE_MASK_HPP_
