// latseg/lattice.hpp
//
// Frame-synchronous CTC posterior lattice plus the small value types used for
// stream bookkeeping (speech blocks, segment boundaries).

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

#ifndef LATSEG_LATTICE_HPP_
#define LATSEG_LATTICE_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latseg/error.hpp"
#include "latseg/logmath.hpp"

namespace latseg {

inline constexpr double kDefaultFrameMs = 40.0;
// |logsumexp(row)| tolerance; wide enough for rows serialized as 32-bit
// floats, tight enough to reject anything that is not a distribution.
inline constexpr double kRowNormTolerance = 1e-6;

// T x (V + 1) matrix of per-frame log posteriors over tokens + blank.
// Rows must be normalized; offending inputs are rejected, never re-scaled.
class CtcLattice {
 public:
  CtcLattice() = default;

  static CtcLattice empty(int width, double frame_duration_ms = kDefaultFrameMs) {
    if (width <= 0) throw ValidationError("lattice: width must be positive");
    if (!(frame_duration_ms > 0.0))
      throw ValidationError("lattice: frame duration must be positive");
    CtcLattice l;
    l.width_ = width;
    l.frame_ms_ = frame_duration_ms;
    return l;
  }

  static CtcLattice from_rows(std::vector<double> row_major, std::size_t frames,
                              int width, double frame_duration_ms = kDefaultFrameMs) {
    CtcLattice l = empty(width, frame_duration_ms);
    if (row_major.size() != frames * static_cast<std::size_t>(width))
      throw ValidationError("lattice: data size does not match frames*width");
    l.data_ = std::move(row_major);
    for (std::size_t t = 0; t < frames; ++t) l.check_row(t);
    return l;
  }

  std::size_t frames() const {
    return width_ == 0 ? 0 : data_.size() / static_cast<std::size_t>(width_);
  }
  int width() const { return width_; }
  double frame_duration_ms() const { return frame_ms_; }
  double duration_ms() const { return static_cast<double>(frames()) * frame_ms_; }

  std::span<const double> row(std::size_t t) const {
    if (t >= frames()) throw BoundsError("lattice: row index out of range");
    return {data_.data() + t * width_, static_cast<std::size_t>(width_)};
  }

  double at(std::size_t t, int v) const {
    if (t >= frames()) throw BoundsError("lattice: row index out of range");
    if (v < 0 || v >= width_) throw BoundsError("lattice: column index out of range");
    return data_[t * width_ + v];
  }

  // Appends one normalized row; used by incremental builders.  The lattice is
  // single-owner while growing and treated as immutable once shared.  The row
  // is validated before insertion so a failed append leaves the lattice
  // unchanged.
  void append_row(std::span<const double> row_values) {
    if (width_ == 0) throw ValidationError("lattice: append to width-0 lattice");
    if (row_values.size() != static_cast<std::size_t>(width_))
      throw ValidationError("lattice: appended row has wrong width");
    const double lse = log_sum_exp(row_values);
    if (!(std::abs(lse) <= kRowNormTolerance))
      throw ValidationError("lattice: appended row is not normalized (logsumexp=" +
                            std::to_string(lse) + ")");
    data_.insert(data_.end(), row_values.begin(), row_values.end());
  }

  void append_rows(const CtcLattice& other) {
    if (other.frames() == 0) return;
    if (width_ == 0) {
      *this = other;
      return;
    }
    if (other.width_ != width_)
      throw ValidationError("lattice: append width mismatch");
    if (std::abs(other.frame_ms_ - frame_ms_) > 1e-9)
      throw ValidationError("lattice: append frame-duration mismatch");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  }

  bool operator==(const CtcLattice& o) const {
    return width_ == o.width_ && frame_ms_ == o.frame_ms_ && data_ == o.data_;
  }

 private:
  void check_row(std::size_t t) const {
    double lse = log_sum_exp(
        std::span<const double>(data_.data() + t * width_, width_));
    if (!(std::abs(lse) <= kRowNormTolerance))
      throw ValidationError("lattice: row " + std::to_string(t) +
                            " is not normalized (logsumexp=" + std::to_string(lse) + ")");
  }

  std::vector<double> data_;
  int width_ = 0;
  double frame_ms_ = kDefaultFrameMs;
};

// Half-open frame range [from, to); preserves width and frame duration.
inline CtcLattice lattice_slice(const CtcLattice& lat, std::size_t from, std::size_t to) {
  if (from > to || to > lat.frames())
    throw BoundsError("lattice_slice: range [" + std::to_string(from) + ", " +
                      std::to_string(to) + ") out of bounds for " +
                      std::to_string(lat.frames()) + " frames");
  CtcLattice out = CtcLattice::empty(lat.width(), lat.frame_duration_ms());
  for (std::size_t t = from; t < to; ++t) out.append_row(lat.row(t));
  return out;
}

inline CtcLattice append_lattice(const CtcLattice& a, const CtcLattice& b) {
  if (a.frames() == 0 && a.width() == 0) return b;
  CtcLattice out = a;
  out.append_rows(b);
  return out;
}

// One contiguous chunk of source audio.  Frame counts are in encoder frames
// (feature extraction is abstracted away); source times are global stream
// milliseconds.
struct SpeechBlock {
  std::size_t block_index = 0;
  std::size_t feature_frames = 0;
  double source_start_ms = 0.0;
  double source_end_ms = 0.0;

  void validate(double frame_duration_ms) const {
    double expect = static_cast<double>(feature_frames) * frame_duration_ms;
    if (std::abs((source_end_ms - source_start_ms) - expect) > 1e-6)
      throw ValidationError("speech block " + std::to_string(block_index) +
                            ": span does not match frames * frame_duration");
  }
};

enum class Trigger { greedy_punct, align_punct, pause, fixed, forced_max_len };

inline const char* trigger_name(Trigger t) {
  switch (t) {
    case Trigger::greedy_punct: return "greedy_punct";
    case Trigger::align_punct: return "align_punct";
    case Trigger::pause: return "pause";
    case Trigger::fixed: return "fixed";
    case Trigger::forced_max_len: return "forced_max_len";
  }
  return "?";
}

inline Trigger trigger_from_name(const std::string& s) {
  if (s == "greedy_punct") return Trigger::greedy_punct;
  if (s == "align_punct") return Trigger::align_punct;
  if (s == "pause") return Trigger::pause;
  if (s == "fixed") return Trigger::fixed;
  if (s == "forced_max_len") return Trigger::forced_max_len;
  throw ValidationError("unknown trigger '" + s + "'");
}

// Segment end in global stream coordinates: the segment covers frames
// [previous.frame, frame), so `frame` is the exclusive end and source_ms is
// frame * frame_duration_ms.
struct SegmentBoundary {
  std::size_t frame = 0;
  double source_ms = 0.0;
  Trigger trigger = Trigger::fixed;
};

inline SegmentBoundary make_boundary(std::size_t frame, double frame_duration_ms,
                                     Trigger trig) {
  return SegmentBoundary{frame, static_cast<double>(frame) * frame_duration_ms, trig};
}

}  // namespace latseg

#endif  // LATSEG_LATTICE_HPP_
