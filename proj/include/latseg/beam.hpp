// latseg/beam.hpp
//
// Incremental blockwise beam search with joint attention+CTC scoring.
//
// Tokens are only ever appended to the output, never retracted.  Per block
// the emission budget is the number of collapsed non-blank labels on the
// greedy CTC path over the segment so far, minus tokens already finalized;
// the beam expands in lockstep rounds up to that budget and finalizes the
// longest prefix shared by every surviving hypothesis.  Hypotheses proposing
// EOS mid-stream are pruned.  The budget/agreement rule lives behind
// EmissionPolicy so alternatives can be swapped in.

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

#ifndef LATSEG_BEAM_HPP_
#define LATSEG_BEAM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latseg/backend.hpp"
#include "latseg/ctc.hpp"
#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/logmath.hpp"

namespace latseg {

struct DecodeConfig {
  int beam_width = 6;
  double lambda = 0.3;  // joint = (1-lambda)*decoder + lambda*ctc_prefix

  void validate() const {
    if (beam_width < 1) throw ConfigError("beam width must be >= 1");
    if (lambda < 0.0 || lambda > 1.0)
      throw ConfigError("lambda must be in [0, 1]");
  }
};

// Joint score; handles the endpoint weights without 0 * -inf = NaN.
inline double joint_score(double dec, double ctc, double lambda) {
  if (lambda <= 0.0) return dec;
  if (lambda >= 1.0) return ctc;
  if (is_log_zero(dec) || is_log_zero(ctc)) return kLogZero;
  return (1.0 - lambda) * dec + lambda * ctc;
}

struct Emission {
  int token = 0;
  double delay_ms = 0.0;  // global source time when the token became final
};

struct SegmentRecord {
  std::size_t start_frame = 0, end_frame = 0;  // global, half-open
  double start_ms = 0.0, end_ms = 0.0;
  std::vector<Emission> emissions;
  std::optional<Trigger> trigger;  // nullopt: closed by end of stream
  int decided_block = -1;          // -1: offline / end of stream
};

struct BeamHyp {
  std::vector<int> tokens;  // segment-local, extends the finalized prefix
  double dec_lp = 0.0;
  PrefixScorer ctc;
};

class DecodeSession;

// Decides how many expansion rounds to run and which tokens are stable.
class EmissionPolicy {
 public:
  virtual ~EmissionPolicy() = default;
  // Target segment-local token count the beam may grow to at this horizon.
  virtual std::size_t target_tokens(const DecodeSession& session) const = 0;
  // Count of leading beam tokens that are safe to finalize.
  virtual std::size_t stable_tokens(const std::vector<BeamHyp>& beam) const = 0;
};

// Default policy: budget = collapsed greedy-path emissions; stability =
// agreement of all surviving hypotheses.
class CtcBudgetEmission : public EmissionPolicy {
 public:
  std::size_t target_tokens(const DecodeSession& session) const override;
  std::size_t stable_tokens(const std::vector<BeamHyp>& beam) const override {
    if (beam.empty()) return 0;
    std::size_t lcp = beam[0].tokens.size();
    for (std::size_t i = 1; i < beam.size(); ++i) {
      std::size_t m = 0;
      const auto& a = beam[0].tokens;
      const auto& b = beam[i].tokens;
      while (m < lcp && m < b.size() && a[m] == b[m]) ++m;
      lcp = m;
    }
    return lcp;
  }
};

// One open translation segment over a block stream.  Feeding advances the
// lattice horizon; step() emits stable tokens; cut() closes the segment at a
// boundary and carries the remaining lattice tail (and any already-emitted
// tokens past the boundary) into the fresh segment state.
class DecodeSession {
 public:
  DecodeSession(ModelBackend& backend, DecodeConfig cfg,
                std::shared_ptr<EmissionPolicy> emission = nullptr)
      : backend_(&backend),
        cfg_(cfg),
        emission_(emission ? std::move(emission)
                           : std::make_shared<CtcBudgetEmission>()) {
    cfg_.validate();
    lat_ = CtcLattice::empty(backend.vocab_width());
    reset_beam({});
  }

  // --- stream input ------------------------------------------------------

  void feed_block(const SpeechBlock& block) {
    ensure_open();
    if (block.block_index != next_block_)
      throw StreamError("feed_block: expected block " + std::to_string(next_block_) +
                        ", got " + std::to_string(block.block_index));
    if (std::abs(block.source_start_ms - next_start_ms_) > 1e-6)
      throw StreamError("feed_block: block " + std::to_string(block.block_index) +
                        " starts at " + std::to_string(block.source_start_ms) +
                        " ms, expected " + std::to_string(next_start_ms_));
    ++next_block_;
    if (block.feature_frames == 0) return;  // no state change
    block.validate(lat_.frame_duration_ms());
    EncodeOut out = backend_->encode_block(block);
    if (out.state_frames != out.rows.frames())
      throw ValidationError("backend: state_frames != lattice rows");
    if (out.rows.width() != lat_.width())
      throw ValidationError("backend: lattice width changed mid-stream");
    for (std::size_t t = 0; t < out.rows.frames(); ++t) {
      auto row = out.rows.row(t);
      lat_.append_row(row);
      const int l = row_argmax(row);
      if (l != greedy_last_ && l != blank_id()) ++greedy_count_;
      greedy_last_ = l;
      for (auto& h : beam_) h.ctc.extend(row);
    }
    next_start_ms_ = block.source_end_ms;
    last_fed_ms_ = block.source_end_ms;
  }

  // --- decoding ----------------------------------------------------------

  // Runs expansion rounds up to the emission budget and finalizes stable
  // tokens; returns the newly finalized emissions.
  std::vector<Emission> step() {
    ensure_open();
    const std::size_t target = emission_->target_tokens(*this);
    while (beam_len() < target) {
      if (!expand_once(lat_.frames())) break;
    }
    const std::size_t stable = emission_->stable_tokens(beam_);
    return finalize_from_best(std::min(stable, target));
  }

  // Closes the segment at segment-local frame `local_frame` (0 < f <=
  // local_frames).  Runs the closing decode over the truncated lattice;
  // tokens supported only by frames past the boundary (already emitted when
  // the boundary was decided late, or not yet decoded) belong to the next
  // segment and are carried over.
  SegmentRecord cut(std::size_t local_frame, Trigger trig, int decided_block) {
    ensure_open();
    check_cut_frame(local_frame);
    flush_to(local_frame);
    const std::size_t keep =
        std::min(finalized_.size(), collapsed_count_upto(local_frame));
    return close_segment(local_frame, keep, trig, decided_block);
  }

  // Closes the segment keeping only the first `keep_tokens` finalized tokens;
  // the remainder (already emitted) carries into the fresh segment as its
  // pre-finalized prefix.  No expansion rounds are run.
  SegmentRecord cut_keep(std::size_t local_frame, std::size_t keep_tokens,
                         Trigger trig, int decided_block) {
    ensure_open();
    check_cut_frame(local_frame);
    if (keep_tokens > finalized_.size())
      throw BoundsError("cut_keep: keep_tokens exceeds finalized count");
    return close_segment(local_frame, keep_tokens, trig, decided_block);
  }

  // Final decode of everything still open.  The session is closed afterwards;
  // returns nothing when the open segment is completely empty.
  std::optional<SegmentRecord> finish() {
    ensure_open();
    flush_to(lat_.frames());
    if (lat_.frames() == 0 && finalized_.empty()) {
      closed_ = true;
      return std::nullopt;
    }
    SegmentRecord rec = close_segment(lat_.frames(), finalized_.size(),
                                      std::nullopt, -1);
    closed_ = true;
    return rec;
  }

  // Finalizes everything decodable at the current horizon without closing;
  // used for the end-of-stream alignment check before the last cut.
  std::vector<Emission> flush_open() {
    ensure_open();
    return flush_to(lat_.frames());
  }

  // --- views -------------------------------------------------------------

  const CtcLattice& segment_lattice() const { return lat_; }
  std::size_t segment_start_frame() const { return seg_start_; }
  std::size_t local_frames() const { return lat_.frames(); }
  std::size_t frame_horizon() const { return seg_start_ + lat_.frames(); }
  double last_fed_ms() const { return last_fed_ms_; }
  std::size_t next_block_index() const { return next_block_; }
  bool closed() const { return closed_; }
  int blank_id() const { return lat_.width() - 1; }
  std::size_t greedy_token_count() const { return greedy_count_; }
  const std::vector<Emission>& finalized() const { return finalized_; }
  const std::vector<BeamHyp>& beam() const { return beam_; }

  std::vector<int> finalized_tokens() const {
    std::vector<int> out;
    out.reserve(finalized_.size());
    for (const auto& e : finalized_) out.push_back(e.token);
    return out;
  }

 private:
  std::size_t beam_len() const {
    return beam_.empty() ? 0 : beam_[0].tokens.size();
  }

  void ensure_open() const {
    if (closed_) throw StreamError("decode session already closed");
  }

  void check_cut_frame(std::size_t local_frame) const {
    if (local_frame == 0 || local_frame > lat_.frames())
      throw BoundsError("cut: boundary frame " + std::to_string(local_frame) +
                        " outside (0, " + std::to_string(lat_.frames()) + "]");
  }

  void reset_beam(std::vector<int> prefix_tokens) {
    beam_.clear();
    PrefixScorer sc = prefix_tokens.empty()
                          ? PrefixScorer::root(lat_.width(), blank_id())
                          : PrefixScorer(prefix_tokens, lat_.width(), blank_id());
    sc.extend_range(lat_, 0, lat_.frames());
    beam_.push_back(BeamHyp{std::move(prefix_tokens), 0.0, std::move(sc)});
  }

  // One lockstep expansion round; candidate CTC scores are evaluated at
  // horizon `upto` (<= consumed frames).  Returns false when no viable
  // candidate exists.
  bool expand_once(std::size_t upto) {
    std::vector<std::vector<int>> prefixes;
    prefixes.reserve(beam_.size());
    for (const auto& h : beam_) prefixes.push_back(h.tokens);
    const auto dists = backend_->decoder_step(prefixes);
    if (dists.size() != beam_.size())
      throw ValidationError("backend: decoder_step batch size mismatch");
    const int eos = backend_->eos_id();

    struct Cand {
      std::size_t parent;
      int token;
      double joint, dec;
    };
    std::vector<Cand> cands, dec_only;
    for (std::size_t i = 0; i < beam_.size(); ++i) {
      const auto& dist = dists[i];
      if (dist.size() != static_cast<std::size_t>(lat_.width()))
        throw ValidationError("backend: decoder distribution width mismatch");
      const bool ctc_dead = beam_[i].ctc.extensions_infeasible();
      for (int c = 0; c < eos; ++c) {  // EOS proposals pruned mid-stream
        const double dec = beam_[i].dec_lp + dist[c];
        const double psi =
            ctc_dead ? kLogZero : beam_[i].ctc.extension_score(c, lat_, upto);
        const double joint = joint_score(dec, psi, cfg_.lambda);
        if (!is_log_zero(joint)) cands.push_back({i, c, joint, dec});
        if (!is_log_zero(dec)) dec_only.push_back({i, c, dec, dec});
      }
    }
    // If every extension lost all CTC mass (segment started mid-emission
    // after a forced cut), rank by decoder scores instead of stalling.
    if (cands.empty() && cfg_.lambda < 1.0) cands = std::move(dec_only);
    if (cands.empty()) return false;

    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.joint != b.joint) return a.joint > b.joint;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    const std::size_t width =
        std::min<std::size_t>(cfg_.beam_width, cands.size());
    std::vector<BeamHyp> next;
    next.reserve(width);
    for (std::size_t k = 0; k < width; ++k) {
      const Cand& c = cands[k];
      BeamHyp h{beam_[c.parent].tokens, c.dec,
                beam_[c.parent].ctc.child(c.token, lat_)};
      h.tokens.push_back(c.token);
      next.push_back(std::move(h));
    }
    beam_ = std::move(next);
    return true;
  }

  // Expands until the truncated-horizon budget is reached, then finalizes the
  // best hypothesis up to that budget.
  std::vector<Emission> flush_to(std::size_t local_frame) {
    const std::size_t target = collapsed_count_upto(local_frame);
    while (beam_len() < target) {
      if (!expand_once(local_frame)) break;
    }
    if (beam_.empty()) return {};
    // Rank hypotheses by joint score at the truncated horizon.
    std::size_t best = 0;
    double best_score = hyp_score_at(beam_[0], local_frame);
    for (std::size_t i = 1; i < beam_.size(); ++i) {
      const double s = hyp_score_at(beam_[i], local_frame);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best != 0) std::swap(beam_[0], beam_[best]);
    beam_.erase(beam_.begin() + 1, beam_.end());
    return finalize_from_best(std::min(target, beam_[0].tokens.size()));
  }

  double hyp_score_at(const BeamHyp& h, std::size_t local_frame) const {
    double psi = kLogZero;
    if (h.tokens.empty())
      psi = 0.0;
    else if (local_frame >= 1 && local_frame <= h.ctc.history().size())
      psi = h.ctc.history()[local_frame - 1];
    return joint_score(h.dec_lp, psi, cfg_.lambda);
  }

  // Finalizes best-hypothesis tokens [finalized, upto_len).
  std::vector<Emission> finalize_from_best(std::size_t upto_len) {
    std::vector<Emission> newly;
    if (beam_.empty()) return newly;
    const auto& toks = beam_[0].tokens;
    for (std::size_t i = finalized_.size(); i < std::min(upto_len, toks.size()); ++i) {
      Emission e{toks[i], last_fed_ms_};
      finalized_.push_back(e);
      newly.push_back(e);
    }
    return newly;
  }

  std::size_t collapsed_count_upto(std::size_t f) const {
    std::size_t n = 0;
    int prev = -1;
    for (std::size_t t = 0; t < f; ++t) {
      const int l = row_argmax(lat_.row(t));
      if (l != prev && l != blank_id()) ++n;
      prev = l;
    }
    return n;
  }

  SegmentRecord close_segment(std::size_t local_frame, std::size_t keep_tokens,
                              std::optional<Trigger> trig, int decided_block) {
    const double frame_ms = lat_.frame_duration_ms();
    SegmentRecord rec;
    rec.start_frame = seg_start_;
    rec.end_frame = seg_start_ + local_frame;
    rec.start_ms = static_cast<double>(rec.start_frame) * frame_ms;
    rec.end_ms = static_cast<double>(rec.end_frame) * frame_ms;
    rec.emissions.assign(finalized_.begin(),
                         finalized_.begin() + static_cast<long>(keep_tokens));
    rec.trigger = trig;
    rec.decided_block = decided_block;

    std::vector<Emission> carried(finalized_.begin() + static_cast<long>(keep_tokens),
                                  finalized_.end());
    backend_->reset_segment(keep_tokens);
    lat_ = lattice_slice(lat_, local_frame, lat_.frames());
    seg_start_ += local_frame;
    greedy_last_ = -1;
    greedy_count_ = 0;
    for (std::size_t t = 0; t < lat_.frames(); ++t) {
      const int l = row_argmax(lat_.row(t));
      if (l != greedy_last_ && l != blank_id()) ++greedy_count_;
      greedy_last_ = l;
    }
    finalized_ = carried;
    std::vector<int> prefix;
    prefix.reserve(carried.size());
    for (const auto& e : carried) prefix.push_back(e.token);
    reset_beam(std::move(prefix));
    return rec;
  }

  ModelBackend* backend_;
  DecodeConfig cfg_;
  std::shared_ptr<EmissionPolicy> emission_;
  CtcLattice lat_;              // segment-local lattice
  std::size_t seg_start_ = 0;   // global frame index of lat_ row 0
  std::size_t next_block_ = 0;
  double next_start_ms_ = 0.0;
  double last_fed_ms_ = 0.0;
  bool closed_ = false;
  std::vector<Emission> finalized_;  // segment-local, includes carried prefix
  std::vector<BeamHyp> beam_;
  int greedy_last_ = -1;
  std::size_t greedy_count_ = 0;
};

inline std::size_t CtcBudgetEmission::target_tokens(const DecodeSession& s) const {
  return s.greedy_token_count();
}

}  // namespace latseg

#endif  // LATSEG_BEAM_HPP_
