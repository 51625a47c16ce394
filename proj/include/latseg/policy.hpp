// latseg/policy.hpp
//
// Segmentation policies over streams:
//   fixed  - boundaries at multiples of a fixed segment length (streaming)
//   dac    - offline divide-and-conquer on the longest pause
//   sim    - streaming pause search inside a [min_len, max_len] window
//   greedy - cut after the last frame whose greedy CTC label is sentence
//            punctuation (latent-alignment driven, streaming)
//   align  - locate the last emitted punctuation token's source frame via the
//            CTC prefix probability and cut there (streaming)
//
// All boundary frames are exclusive segment ends in global frame coordinates;
// boundary source time = frame * frame_duration_ms.

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

#ifndef LATSEG_POLICY_HPP_
#define LATSEG_POLICY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "latseg/ctc.hpp"
#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/pause_mask.hpp"
#include "latseg/vocabulary.hpp"

namespace latseg {

enum class PolicyKind { none, fixed, dac, sim, greedy, align };

inline const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::none: return "none";
    case PolicyKind::fixed: return "fixed";
    case PolicyKind::dac: return "dac";
    case PolicyKind::sim: return "sim";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::align: return "align";
  }
  throw ValidationError("unknown policy kind");
}

inline PolicyKind policy_from_name(const std::string& s) {
  if (s == "none") return PolicyKind::none;
  if (s == "fixed") return PolicyKind::fixed;
  if (s == "dac") return PolicyKind::dac;
  if (s == "sim") return PolicyKind::sim;
  if (s == "greedy") return PolicyKind::greedy;
  if (s == "align") return PolicyKind::align;
  throw ConfigError("unknown policy '" + s + "'");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::none;
  double min_len_ms = 2000.0;      // greedy/align/sim lower bound
  double max_len_ms = 20000.0;     // sim/dac upper bound
  double segment_len_ms = 20000.0; // fixed-length period
  double pause_min_ms = 200.0;     // minimal qualifying pause duration

  void validate() const {
    if (!(min_len_ms > 0.0)) throw ConfigError("min_len_ms must be positive");
    if (!(segment_len_ms > 0.0))
      throw ConfigError("segment_len_ms must be positive");
    if (!(pause_min_ms > 0.0)) throw ConfigError("pause_min_ms must be positive");
    if ((kind == PolicyKind::sim || kind == PolicyKind::dac) &&
        !(max_len_ms > 0.0))
      throw ConfigError("max_len_ms must be positive");
    if (kind == PolicyKind::sim && !(min_len_ms < max_len_ms))
      throw ConfigError("sim requires min_len_ms < max_len_ms");
  }
};

// --- fixed-length ----------------------------------------------------------

// Boundaries at k * segment_len_ms, k >= 1, strictly inside the stream; the
// trailing remainder stays a final short segment.
inline std::vector<SegmentBoundary> fixed_length_boundaries(
    std::size_t total_frames, double frame_duration_ms, double segment_len_ms) {
  if (!(segment_len_ms > 0.0))
    throw ConfigError("segment_len_ms must be positive");
  std::vector<SegmentBoundary> out;
  for (std::size_t k = 1;; ++k) {
    const double ms = static_cast<double>(k) * segment_len_ms;
    const auto frame =
        static_cast<std::size_t>(std::llround(ms / frame_duration_ms));
    if (frame >= total_frames) break;
    if (frame == 0) continue;  // segment shorter than one frame
    if (!out.empty() && frame == out.back().frame) continue;
    out.push_back(make_boundary(frame, frame_duration_ms, Trigger::fixed));
  }
  return out;
}

// --- divide and conquer (offline) ------------------------------------------

struct DacResult {
  std::vector<SegmentBoundary> boundaries;
  std::size_t unsplit_over_long = 0;  // over-long segments with no usable pause
};

namespace detail {

// Longest nonspeech run clipped to [lo, hi) whose clipped length qualifies and
// whose midpoint is strictly inside (lo, hi).  Ties: earliest run.
inline std::optional<std::pair<std::size_t, std::size_t>> longest_pause_in(
    const std::vector<std::pair<std::size_t, std::size_t>>& runs,
    std::size_t lo, std::size_t hi, std::size_t min_frames) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t best_len = 0;
  for (const auto& r : runs) {
    const std::size_t s = std::max(r.first, lo);
    const std::size_t e = std::min(r.second, hi);
    if (e <= s) continue;
    const std::size_t len = e - s;
    if (len < min_frames) continue;
    const std::size_t mid = (s + e) / 2;
    if (mid <= lo || mid >= hi) continue;
    if (len > best_len) {
      best_len = len;
      best = std::make_pair(s, e);
    }
  }
  return best;
}

inline void dac_split(const std::vector<std::pair<std::size_t, std::size_t>>& runs,
                      std::size_t lo, std::size_t hi, std::size_t max_frames,
                      std::size_t pause_frames, double frame_ms,
                      DacResult* out) {
  if (hi - lo <= max_frames) return;
  const auto pause = longest_pause_in(runs, lo, hi, pause_frames);
  if (!pause) {
    ++out->unsplit_over_long;
    return;
  }
  const std::size_t mid = (pause->first + pause->second) / 2;
  dac_split(runs, lo, mid, max_frames, pause_frames, frame_ms, out);
  out->boundaries.push_back(make_boundary(mid, frame_ms, Trigger::pause));
  dac_split(runs, mid, hi, max_frames, pause_frames, frame_ms, out);
}

}  // namespace detail

// Recursively splits every over-long span at the midpoint of its longest
// qualifying pause; spans with no pause are left as-is and counted.
inline DacResult dac_boundaries(const PauseMask& mask, double max_len_ms,
                                double pause_min_ms = 200.0) {
  if (mask.frames() == 0) throw ValidationError("dac: empty pause mask");
  if (!(max_len_ms > 0.0)) throw ConfigError("max_len_ms must be positive");
  const double frame_ms = mask.frame_duration_ms;
  const auto max_frames = static_cast<std::size_t>(
      std::max<long long>(1, static_cast<long long>(max_len_ms / frame_ms)));
  const auto pause_frames = static_cast<std::size_t>(std::max<long long>(
      1, static_cast<long long>(std::ceil(pause_min_ms / frame_ms - 1e-9))));
  const auto runs = nonspeech_runs(mask, 1);
  DacResult res;
  detail::dac_split(runs, 0, mask.frames(), max_frames, pause_frames, frame_ms,
                    &res);
  return res;
}

// --- pause search in a streaming window (sim) ------------------------------

// Once the observed horizon is max_len past the previous boundary, cuts at the
// midpoint of the longest qualifying pause inside [min_len, max_len] past the
// boundary; with no such pause, cuts exactly max_len past the boundary.
// Returns nothing while the window is still open.
inline std::optional<SegmentBoundary> sim_next_boundary(
    const PauseMask& mask, std::size_t horizon_frames,
    std::size_t last_boundary_frame, const PolicyConfig& cfg) {
  if (horizon_frames > mask.frames())
    throw BoundsError("sim: horizon beyond mask");
  const double frame_ms = mask.frame_duration_ms;
  const auto min_frames = static_cast<std::size_t>(
      std::ceil(cfg.min_len_ms / frame_ms - 1e-9));
  const auto max_frames =
      static_cast<std::size_t>(cfg.max_len_ms / frame_ms + 1e-9);
  if (horizon_frames - last_boundary_frame < max_frames) return std::nullopt;
  const std::size_t lo = last_boundary_frame + min_frames;
  const std::size_t hi = last_boundary_frame + max_frames;
  const auto pause_frames = static_cast<std::size_t>(std::max<long long>(
      1, static_cast<long long>(std::ceil(cfg.pause_min_ms / frame_ms - 1e-9))));
  const auto runs = nonspeech_runs(mask, 1);
  const auto pause = detail::longest_pause_in(runs, lo, hi, pause_frames);
  if (pause) {
    const std::size_t mid = (pause->first + pause->second) / 2;
    return make_boundary(mid, frame_ms, Trigger::pause);
  }
  return make_boundary(hi, frame_ms, Trigger::forced_max_len);
}

// --- punctuation policies --------------------------------------------------

// Scans greedy labels over segment-local frames [0, local_frames); returns
// the segment-local exclusive cut frame (last punctuation frame + 1) when the
// resulting segment satisfies min_len, else nothing.
inline std::optional<std::size_t> greedy_punct_cut(
    const CtcLattice& segment_lattice, const Vocabulary& vocab,
    const PolicyConfig& cfg) {
  std::optional<std::size_t> last_punct;
  for (std::size_t t = 0; t < segment_lattice.frames(); ++t) {
    const int label = row_argmax(segment_lattice.row(t));
    if (vocab.is_punct(label)) last_punct = t;
  }
  if (!last_punct) return std::nullopt;
  // A punctuation run still touching the horizon may continue into the next
  // block; cutting now would strand part of its support in the next segment.
  if (*last_punct + 1 == segment_lattice.frames()) return std::nullopt;
  const std::size_t cut = *last_punct + 1;
  if (static_cast<double>(cut) * segment_lattice.frame_duration_ms() <
      cfg.min_len_ms - 1e-9)
    return std::nullopt;
  return cut;
}

struct AlignCut {
  std::size_t cut_frame = 0;    // segment-local exclusive cut frame
  std::size_t punct_index = 0;  // index of the punctuation token in Y
};

// Finds the last punctuation token in the emitted segment-local sequence Y,
// aligns the prefix up to and including it to its most probable source frame,
// and proposes a cut there.  Alignment failure (no mass anywhere) defers.
inline std::optional<AlignCut> align_punct_cut(
    const std::vector<int>& emitted, const CtcLattice& segment_lattice,
    const Vocabulary& vocab, const PolicyConfig& cfg) {
  std::optional<std::size_t> l_seg;
  for (std::size_t i = 0; i < emitted.size(); ++i)
    if (vocab.is_punct(emitted[i])) l_seg = i;
  if (!l_seg) return std::nullopt;
  if (segment_lattice.frames() == 0) return std::nullopt;
  std::vector<int> prefix(emitted.begin(),
                          emitted.begin() + static_cast<long>(*l_seg) + 1);
  std::size_t b_seg = 0;
  try {
    b_seg = best_prefix_frame(segment_lattice, prefix, 0, vocab.blank_id());
  } catch (const AlignmentNotFoundError&) {
    return std::nullopt;
  }
  // The best frame is where the prefix first completes, i.e. the first frame
  // of the punctuation's support; advance over the rest of that support so the
  // carried tail does not begin with stray punctuation frames.
  std::size_t cut = b_seg + 1;
  const int punct_id = emitted[*l_seg];
  while (cut < segment_lattice.frames() &&
         row_argmax(segment_lattice.row(cut)) == punct_id)
    ++cut;
  // Defer while the punctuation's support still touches the horizon: the run
  // may continue into the next block and the carry must not start mid-run.
  if (cut == segment_lattice.frames() &&
      row_argmax(segment_lattice.row(cut - 1)) == punct_id)
    return std::nullopt;
  if (static_cast<double>(cut) * segment_lattice.frame_duration_ms() <
      cfg.min_len_ms - 1e-9)
    return std::nullopt;
  return AlignCut{cut, *l_seg};
}

}  // namespace latseg

#endif  // LATSEG_POLICY_HPP_
