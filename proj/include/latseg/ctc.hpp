// latseg/ctc.hpp
//
// CTC path math over posterior lattices: greedy best path, collapse, exact
// label-sequence probability (forward algorithm), and the streaming prefix
// probability used both for joint beam scoring and for punctuation-to-source
// alignment.
//
// Prefix probability of g over t frames = total mass of length-t frame paths
// whose collapsed output *begins with* g (exact-match mass plus any
// continuation).  Because appending frames can only extend a collapsed
// output, a prefix completed at frame u contributes the full mass of all its
// continuations, so
//
//   P_pre(g, t) = sum_{u<=t} phi(u-1) * y_c(u)
//
// where c is the last token of g and phi(u-1) is the mass of length-(u-1)
// paths that collapse exactly to g minus c and can accept a fresh c at u
// (paths ending in blank, plus paths ending in a different non-blank).  The
// scorer below maintains, per frame, a ladder of exact-match masses for every
// prefix length i:
//
//   n[i] <- y_{g_i} * (n[i] + phi_i)        phi_i = b[i-1] (+ n[i-1] if g_i != g_{i-1})
//   b[i] <- y_blank * (n[i] + b[i])
//
// all in log domain, plus the running P_pre for the full prefix.

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

#ifndef LATSEG_CTC_HPP_
#define LATSEG_CTC_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/logmath.hpp"

namespace latseg {

using FramePath = std::vector<int>;

// Argmax with ties resolved to the lowest index.
inline int row_argmax(std::span<const double> row) {
  int best = 0;
  for (int v = 1; v < static_cast<int>(row.size()); ++v)
    if (row[v] > row[best]) best = v;
  return best;
}

inline FramePath greedy_labels(const CtcLattice& lat) {
  FramePath path;
  path.reserve(lat.frames());
  for (std::size_t t = 0; t < lat.frames(); ++t)
    path.push_back(row_argmax(lat.row(t)));
  return path;
}

// Merge adjacent duplicates, then drop blanks.
inline std::vector<int> collapse(const FramePath& path, int blank_id) {
  std::vector<int> out;
  int prev = -1;
  for (int l : path) {
    if (l != prev && l != blank_id) out.push_back(l);
    prev = l;
  }
  return out;
}

namespace detail {
inline void check_labels(std::span<const int> labels, int width, int blank_id,
                         const char* who) {
  for (int l : labels) {
    if (l == blank_id)
      throw ValidationError(std::string(who) + ": label sequence contains blank");
    if (l < 0 || l >= width)
      throw ValidationError(std::string(who) + ": label id out of range");
  }
}
}  // namespace detail

// log P(labels | lattice): exact conditional probability of the collapsed
// sequence, standard forward pass over the blank-extended sequence.
// Infeasible sequences (too few frames, missing separators) give kLogZero.
inline double ctc_forward_logprob(const CtcLattice& lat,
                                  std::span<const int> labels, int blank_id) {
  if (blank_id < 0 || blank_id >= lat.width())
    throw ValidationError("ctc_forward_logprob: blank id out of range");
  detail::check_labels(labels, lat.width(), blank_id, "ctc_forward_logprob");
  const std::size_t T = lat.frames();
  const std::size_t N = labels.size();
  if (T == 0) return N == 0 ? 0.0 : kLogZero;
  if (N == 0) {
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) acc += lat.at(t, blank_id);
    return acc;
  }
  const std::size_t M = 2 * N + 1;  // blank, l1, blank, l2, ..., lN, blank
  auto ext = [&](std::size_t j) -> int {
    return (j % 2 == 0) ? blank_id : labels[j / 2];
  };
  std::vector<double> alpha(M, kLogZero), next(M, kLogZero);
  alpha[0] = lat.at(0, blank_id);
  alpha[1] = lat.at(0, ext(1));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < M; ++j) {
      double a = alpha[j];
      if (j >= 1) a = log_add(a, alpha[j - 1]);
      if (j >= 2 && j % 2 == 1 && ext(j) != ext(j - 2))
        a = log_add(a, alpha[j - 2]);
      next[j] = is_log_zero(a) ? kLogZero : a + lat.at(t, ext(j));
    }
    std::swap(alpha, next);
  }
  return log_add(alpha[M - 1], alpha[M - 2]);
}

// Frame-incremental prefix-probability scorer for one fixed token prefix.
// extend() consumes one lattice row; history()[t-1] is the log prefix
// probability after t frames.  Appending a frame never changes earlier
// history entries.
class PrefixScorer {
 public:
  PrefixScorer(std::vector<int> prefix, int width, int blank_id)
      : PrefixScorer(Internal{}, std::move(prefix), width, blank_id) {
    if (prefix_.empty())
      throw ValidationError(
          "prefix scorer: empty prefix (its probability is log 1 by definition; "
          "handle upstream)");
  }

  // Empty-prefix state used as the beam-search root; P_pre == 1 at every t.
  static PrefixScorer root(int width, int blank_id) {
    return PrefixScorer(Internal{}, {}, width, blank_id);
  }

  void extend(std::span<const double> row) {
    if (row.size() != static_cast<std::size_t>(width_))
      throw ValidationError("prefix scorer: row width mismatch");
    const std::size_t N = prefix_.size();
    double below_n = rung_n_[0], below_b = rung_b_[0];  // time-t values of i-1
    double psi_inc = kLogZero;
    rung_b_[0] = row[blank_] + rung_b_[0];
    // rung_n_[0] stays kLogZero: an empty collapse cannot end in a non-blank.
    for (std::size_t i = 1; i <= N; ++i) {
      const double old_n = rung_n_[i], old_b = rung_b_[i];
      const int c = prefix_[i - 1];
      const bool same = i >= 2 && prefix_[i - 2] == c;
      const double phi = same ? below_b : log_add(below_b, below_n);
      rung_n_[i] = row[c] + log_add(old_n, phi);
      rung_b_[i] = row[blank_] + log_add(old_n, old_b);
      if (i == N) psi_inc = phi + row[c];
      below_n = old_n;
      below_b = old_b;
    }
    ++t_;
    if (N == 0) {
      top_n_hist_.push_back(kLogZero);
      top_b_hist_.push_back(rung_b_[0]);
      psi_hist_.push_back(0.0);
    } else {
      psi_cur_ = log_add(psi_cur_, psi_inc);
      top_n_hist_.push_back(rung_n_[N]);
      top_b_hist_.push_back(rung_b_[N]);
      psi_hist_.push_back(psi_cur_);
    }
  }

  void extend_range(const CtcLattice& lat, std::size_t from, std::size_t to) {
    if (from > to || to > lat.frames())
      throw BoundsError("prefix scorer: extend range out of bounds");
    for (std::size_t t = from; t < to; ++t) extend(lat.row(t));
  }

  std::size_t frames() const { return t_; }
  const std::vector<int>& prefix() const { return prefix_; }
  const std::vector<double>& history() const { return psi_hist_; }

  double log_prefix_prob() const {
    if (prefix_.empty()) return 0.0;
    return t_ == 0 ? kLogZero : psi_hist_.back();
  }

  // Exact-match masses for the full prefix at the current frame count.
  double gamma_n() const { return rung_n_[prefix_.size()]; }
  double gamma_b() const { return rung_b_[prefix_.size()]; }

  // Log prefix probability of prefix+[token] over the first `upto` frames of
  // `lat`, which must be the same rows this scorer has consumed.  O(upto).
  double extension_score(int token, const CtcLattice& lat,
                         std::size_t upto = static_cast<std::size_t>(-1)) const {
    if (upto == static_cast<std::size_t>(-1)) upto = t_;
    if (upto > t_ || upto > lat.frames())
      throw BoundsError("prefix scorer: extension horizon out of bounds");
    if (token == blank_ || token < 0 || token >= width_)
      throw ValidationError("prefix scorer: bad extension token");
    const bool same = !prefix_.empty() && prefix_.back() == token;
    double acc = kLogZero;
    for (std::size_t u = 1; u <= upto; ++u) {
      const double pn = u == 1 ? kLogZero : top_n_hist_[u - 2];
      const double pb = u == 1 ? (prefix_.empty() ? 0.0 : kLogZero)
                               : top_b_hist_[u - 2];
      const double phi = same ? pb : log_add(pb, pn);
      if (is_log_zero(phi)) continue;
      acc = log_add(acc, phi + lat.at(u - 1, token));
    }
    return acc;
  }

  // True only when extension_score is certainly -inf for every token at the
  // current horizon (the prefix has no exact-match mass at any frame).  For
  // the empty prefix the first frame always contributes, so never short-cut.
  bool extensions_infeasible() const {
    if (prefix_.empty()) return false;
    for (std::size_t u = 0; u < t_; ++u)
      if (!is_log_zero(top_n_hist_[u]) || !is_log_zero(top_b_hist_[u])) return false;
    return true;
  }

  // Full scorer state for prefix+[token], equivalent to a fresh scorer
  // extended over the same rows.  O(frames).
  PrefixScorer child(int token, const CtcLattice& lat) const {
    if (lat.frames() < t_)
      throw BoundsError("prefix scorer: child lattice shorter than history");
    if (token == blank_ || token < 0 || token >= width_)
      throw ValidationError("prefix scorer: bad extension token");
    PrefixScorer ch(Internal{}, prefix_, width_, blank_);
    ch.prefix_.push_back(token);
    ch.rung_n_ = rung_n_;
    ch.rung_b_ = rung_b_;
    ch.rung_n_.push_back(kLogZero);
    ch.rung_b_.push_back(kLogZero);
    ch.top_n_hist_.reserve(t_);
    ch.top_b_hist_.reserve(t_);
    ch.psi_hist_.reserve(t_);
    const bool same = !prefix_.empty() && prefix_.back() == token;
    double cn = kLogZero, cb = kLogZero, psi = kLogZero;
    for (std::size_t u = 1; u <= t_; ++u) {
      const double pn = u == 1 ? kLogZero : top_n_hist_[u - 2];
      const double pb = u == 1 ? (prefix_.empty() ? 0.0 : kLogZero)
                               : top_b_hist_[u - 2];
      const double phi = same ? pb : log_add(pb, pn);
      const double y_c = lat.at(u - 1, token);
      const double y_b = lat.at(u - 1, blank_);
      const double nn = y_c + log_add(cn, phi);
      const double nb = y_b + log_add(cn, cb);
      psi = log_add(psi, phi + y_c);
      cn = nn;
      cb = nb;
      ch.top_n_hist_.push_back(cn);
      ch.top_b_hist_.push_back(cb);
      ch.psi_hist_.push_back(psi);
    }
    ch.rung_n_.back() = cn;
    ch.rung_b_.back() = cb;
    ch.psi_cur_ = psi;
    ch.t_ = t_;
    return ch;
  }

 private:
  struct Internal {};
  PrefixScorer(Internal, std::vector<int> prefix, int width, int blank_id)
      : prefix_(std::move(prefix)), width_(width), blank_(blank_id) {
    if (width_ <= 1) throw ValidationError("prefix scorer: width must exceed 1");
    if (blank_ < 0 || blank_ >= width_)
      throw ValidationError("prefix scorer: blank id out of range");
    detail::check_labels(prefix_, width_, blank_, "prefix scorer");
    rung_n_.assign(prefix_.size() + 1, kLogZero);
    rung_b_.assign(prefix_.size() + 1, kLogZero);
    rung_b_[0] = 0.0;  // empty path collapses to the empty sequence
    psi_cur_ = prefix_.empty() ? 0.0 : kLogZero;
  }

  std::vector<int> prefix_;
  int width_ = 0;
  int blank_ = 0;
  std::size_t t_ = 0;
  std::vector<double> rung_n_, rung_b_;          // per prefix length, at time t_
  std::vector<double> top_n_hist_, top_b_hist_;  // full-prefix masses per frame
  std::vector<double> psi_hist_;                 // log prefix prob per frame
  double psi_cur_ = kLogZero;
};

inline PrefixScorer prefix_scorer_init(std::span<const int> prefix,
                                       const CtcLattice& lat, int blank_id) {
  PrefixScorer s(std::vector<int>(prefix.begin(), prefix.end()), lat.width(),
                 blank_id);
  s.extend_range(lat, 0, lat.frames());
  return s;
}

// Log prefix probability of `prefix` over the first t frames (1 <= t <= T).
inline double prefix_logprob(const CtcLattice& lat, std::span<const int> prefix,
                             std::size_t t, int blank_id) {
  if (t == 0 || t > lat.frames())
    throw BoundsError("prefix_logprob: t out of range");
  PrefixScorer s(std::vector<int>(prefix.begin(), prefix.end()), lat.width(),
                 blank_id);
  s.extend_range(lat, 0, t);
  return s.history()[t - 1];
}

// Frame (0-based) in [from_frame, T) maximizing the prefix probability of
// lattice rows [0, frame]; ties resolve to the earliest frame.  Throws
// AlignmentNotFoundError when the prefix is infeasible over the whole window.
inline std::size_t best_prefix_frame(const CtcLattice& lat,
                                     std::span<const int> prefix,
                                     std::size_t from_frame, int blank_id) {
  if (from_frame >= lat.frames())
    throw BoundsError("best_prefix_frame: window start beyond lattice end");
  PrefixScorer s(std::vector<int>(prefix.begin(), prefix.end()), lat.width(),
                 blank_id);
  s.extend_range(lat, 0, lat.frames());
  const auto& hist = s.history();
  std::size_t best = from_frame;
  double best_val = hist[from_frame];
  for (std::size_t t = from_frame + 1; t < lat.frames(); ++t) {
    if (hist[t] > best_val) {
      best_val = hist[t];
      best = t;
    }
  }
  if (is_log_zero(best_val))
    throw AlignmentNotFoundError(
        "best_prefix_frame: prefix infeasible over window [" +
        std::to_string(from_frame) + ", " + std::to_string(lat.frames()) + ")");
  return best;
}

}  // namespace latseg

#endif  // LATSEG_CTC_HPP_
