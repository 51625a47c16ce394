// latseg/evaluate.hpp
//
// Long-form evaluation: resegmentation of an unsegmented hypothesis against
// reference sentences by minimum word edit distance, corpus BLEU-4 without
// smoothing, length-aware average lagging, and boundary precision/recall.
//
// The resegmenter runs one Levenshtein DP of the hypothesis against the
// concatenated references; cut positions are recovered where the optimal
// path crosses reference-boundary columns, ties resolved to the
// lexicographically earliest cut vector via a backward feasibility table.

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

#ifndef LATSEG_EVALUATE_HPP_
#define LATSEG_EVALUATE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "latseg/error.hpp"

namespace latseg {

// --- tokenization ----------------------------------------------------------

enum class TextTokenizer { thirteen_a, chars };

inline TextTokenizer tokenizer_from_name(const std::string& s) {
  if (s == "13a") return TextTokenizer::thirteen_a;
  if (s == "char") return TextTokenizer::chars;
  throw ConfigError("unknown tokenizer '" + s + "' (use 13a or char)");
}

inline const char* tokenizer_name(TextTokenizer t) {
  return t == TextTokenizer::thirteen_a ? "13a" : "char";
}

inline std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

// mteval-13a-style rules: split off ASCII punctuation, keep periods/commas
// attached inside digit sequences, split a dash after a digit.
inline std::vector<std::string> tokenize_13a(const std::string& text) {
  static const std::regex kPunct(R"(([{-~[-` -&(-+:-@/]))");
  static const std::regex kPeriodAfter(R"(([^0-9])([.,]))");
  static const std::regex kPeriodBefore(R"(([.,])([^0-9]))");
  static const std::regex kDigitDash(R"(([0-9])(-))");
  std::string s = std::regex_replace(text, kPunct, " $1 ");
  s = std::regex_replace(s, kPeriodAfter, "$1 $2 ");
  s = std::regex_replace(s, kPeriodBefore, " $1 $2");
  s = std::regex_replace(s, kDigitDash, "$1 $2 ");
  return split_whitespace(s);
}

// One token per UTF-8 code point, whitespace dropped.
inline std::vector<std::string> tokenize_chars(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b = static_cast<unsigned char>(text[i]);
    std::size_t n = 1;
    if (b >= 0xF0)
      n = 4;
    else if (b >= 0xE0)
      n = 3;
    else if (b >= 0xC0)
      n = 2;
    n = std::min(n, text.size() - i);
    if (!(n == 1 && std::isspace(b))) out.push_back(text.substr(i, n));
    i += n;
  }
  return out;
}

inline std::vector<std::string> tokenize_text(const std::string& text,
                                              TextTokenizer tok) {
  return tok == TextTokenizer::thirteen_a ? tokenize_13a(text)
                                          : tokenize_chars(text);
}

// --- word edit distance ----------------------------------------------------

inline std::size_t levenshtein(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[b.size()];
}

// --- resegmentation --------------------------------------------------------

struct Resegmented {
  std::vector<std::vector<std::string>> hyp_segments;  // one per reference
  std::vector<std::size_t> cut_positions;  // interior cuts into the hypothesis
  std::size_t total_distance = 0;
};

// Splits hyp_words into |ref_segments| contiguous (possibly empty) pieces
// minimizing the summed word edit distance piece-vs-reference; among minima
// the lexicographically earliest cut vector is returned.
inline Resegmented mwer_resegment(
    const std::vector<std::string>& hyp_words,
    const std::vector<std::vector<std::string>>& ref_segments) {
  if (ref_segments.empty())
    throw EvalError("resegment: no reference segments");
  const std::size_t H = hyp_words.size();
  const std::size_t K = ref_segments.size();
  std::vector<std::string> concat;
  std::vector<std::size_t> bound(1, 0);  // cumulative reference lengths
  for (const auto& r : ref_segments) {
    concat.insert(concat.end(), r.begin(), r.end());
    bound.push_back(concat.size());
  }
  const std::size_t R = concat.size();

  // Suffix edit-distance table: S[i][j] = distance of hyp[i..H) vs concat[j..R).
  std::vector<std::vector<std::size_t>> S(H + 1,
                                          std::vector<std::size_t>(R + 1));
  for (std::size_t i = 0; i <= H; ++i) S[i][R] = H - i;
  for (std::size_t j = 0; j <= R; ++j) S[H][j] = R - j;
  for (std::size_t i = H; i-- > 0;) {
    for (std::size_t j = R; j-- > 0;) {
      const std::size_t sub =
          S[i + 1][j + 1] + (hyp_words[i] == concat[j] ? 0 : 1);
      S[i][j] = std::min({S[i + 1][j] + 1, S[i][j + 1] + 1, sub});
    }
  }

  Resegmented out;
  out.total_distance = S[0][0];
  // Earliest feasible endpoint per piece, checked against the suffix table.
  std::size_t c_prev = 0;
  std::vector<std::size_t> ends;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& ref = ref_segments[k];
    const std::size_t m = ref.size();
    std::vector<std::size_t> row(m + 1);
    for (std::size_t j = 0; j <= m; ++j) row[j] = j;
    const std::size_t budget = S[c_prev][bound[k]];
    std::size_t chosen = H;
    bool found = false;
    for (std::size_t i = c_prev; i <= H && !found; ++i) {
      if (i > c_prev) {
        std::size_t diag = row[0];
        row[0] = i - c_prev;
        for (std::size_t j = 1; j <= m; ++j) {
          const std::size_t sub =
              diag + (hyp_words[i - 1] == ref[j - 1] ? 0 : 1);
          diag = row[j];
          row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
      }
      const bool last = (k + 1 == K);
      if (last && i != H) continue;  // final piece takes the remainder
      if (row[m] + S[i][bound[k + 1]] == budget) {
        chosen = i;
        found = true;
      }
    }
    if (!found) throw EvalError("resegment: internal cut reconstruction failed");
    ends.push_back(chosen);
    c_prev = chosen;
  }
  c_prev = 0;
  for (std::size_t k = 0; k < K; ++k) {
    out.hyp_segments.emplace_back(hyp_words.begin() + static_cast<long>(c_prev),
                                  hyp_words.begin() + static_cast<long>(ends[k]));
    if (k + 1 < K) out.cut_positions.push_back(ends[k]);
    c_prev = ends[k];
  }
  return out;
}

// --- BLEU ------------------------------------------------------------------

struct BleuStats {
  double score = 0.0;
  std::array<double, 4> precisions{};
  std::array<std::size_t, 4> matches{}, totals{};
  std::size_t hyp_len = 0, ref_len = 0;
  double brevity_penalty = 0.0;
};

namespace detail {
inline void count_ngram_matches(const std::vector<std::string>& hyp,
                                const std::vector<std::string>& ref,
                                std::array<std::size_t, 4>* matches,
                                std::array<std::size_t, 4>* totals) {
  for (std::size_t n = 1; n <= 4; ++n) {
    if (hyp.size() < n) break;
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    if (ref.size() >= n)
      for (std::size_t j = 0; j + n <= ref.size(); ++j)
        ++ref_counts[std::vector<std::string>(ref.begin() + static_cast<long>(j),
                                              ref.begin() + static_cast<long>(j + n))];
    std::map<std::vector<std::string>, std::size_t> hyp_counts;
    for (std::size_t j = 0; j + n <= hyp.size(); ++j)
      ++hyp_counts[std::vector<std::string>(hyp.begin() + static_cast<long>(j),
                                            hyp.begin() + static_cast<long>(j + n))];
    (*totals)[n - 1] += hyp.size() - n + 1;
    for (const auto& [gram, cnt] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) (*matches)[n - 1] += std::min(cnt, it->second);
    }
  }
}
}  // namespace detail

// Corpus BLEU-4: clipped modified n-gram precisions summed over all segment
// pairs, geometric mean, exponential brevity penalty, no smoothing (any
// absent n-gram order scores zero).
inline BleuStats corpus_bleu(const std::vector<std::string>& hyp_segments,
                             const std::vector<std::string>& ref_segments,
                             TextTokenizer tok = TextTokenizer::thirteen_a) {
  if (hyp_segments.size() != ref_segments.size())
    throw EvalError("bleu: segment count mismatch");
  if (hyp_segments.empty()) throw EvalError("bleu: empty corpus");
  BleuStats st;
  for (std::size_t s = 0; s < hyp_segments.size(); ++s) {
    const auto hyp = tokenize_text(hyp_segments[s], tok);
    const auto ref = tokenize_text(ref_segments[s], tok);
    st.hyp_len += hyp.size();
    st.ref_len += ref.size();
    detail::count_ngram_matches(hyp, ref, &st.matches, &st.totals);
  }
  bool any_zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    st.precisions[n] = st.totals[n] == 0
                           ? 0.0
                           : static_cast<double>(st.matches[n]) /
                                 static_cast<double>(st.totals[n]);
    if (st.matches[n] == 0) any_zero = true;
  }
  if (st.hyp_len == 0 || any_zero) {
    st.brevity_penalty = 0.0;
    st.score = 0.0;
    return st;
  }
  st.brevity_penalty =
      st.hyp_len >= st.ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(st.ref_len) /
                               static_cast<double>(st.hyp_len));
  double log_prec = 0.0;
  for (std::size_t n = 0; n < 4; ++n) log_prec += 0.25 * std::log(st.precisions[n]);
  st.score = 100.0 * st.brevity_penalty * std::exp(log_prec);
  return st;
}

// --- lagging ---------------------------------------------------------------

// Classic average lagging: (1/tau) sum_{i<=tau} [d_i - (i-1) * T / ref_len],
// tau = first index with d_i >= T (all of them if none reaches T).
inline double average_lagging_ms(const std::vector<double>& delays_ms,
                                 double stream_ms, std::size_t ref_len) {
  if (delays_ms.empty()) throw EvalError("lagging: empty hypothesis");
  if (ref_len == 0) throw EvalError("lagging: empty reference");
  const double rate = stream_ms / static_cast<double>(ref_len);
  std::size_t tau = delays_ms.size();
  for (std::size_t i = 0; i < delays_ms.size(); ++i)
    if (delays_ms[i] >= stream_ms) {
      tau = i + 1;
      break;
    }
  double sum = 0.0;
  for (std::size_t i = 0; i < tau; ++i)
    sum += delays_ms[i] - static_cast<double>(i) * rate;
  return sum / static_cast<double>(tau);
}

// Length-aware variant: the ideal emission rate divides by
// max(hypothesis length, reference length) instead of reference length only.
inline double laal_ms(const std::vector<double>& delays_ms, double stream_ms,
                      std::size_t ref_len) {
  if (delays_ms.empty()) throw EvalError("lagging: empty hypothesis");
  if (ref_len == 0) throw EvalError("lagging: empty reference");
  return average_lagging_ms(delays_ms, stream_ms,
                            std::max(ref_len, delays_ms.size()));
}

// --- boundary quality ------------------------------------------------------

struct BoundaryPrf {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t matched = 0, predicted = 0, truth = 0;
};

inline BoundaryPrf boundary_prf(const std::vector<std::size_t>& predicted,
                                const std::vector<std::size_t>& truth,
                                std::size_t tolerance_frames) {
  if (!std::is_sorted(predicted.begin(), predicted.end()) ||
      !std::is_sorted(truth.begin(), truth.end()))
    throw ValidationError("boundary_prf: inputs must be sorted");
  BoundaryPrf out;
  out.predicted = predicted.size();
  out.truth = truth.size();
  std::size_t i = 0, j = 0;
  while (i < predicted.size() && j < truth.size()) {
    const std::size_t p = predicted[i], t = truth[j];
    const std::size_t diff = p > t ? p - t : t - p;
    if (diff <= tolerance_frames) {
      ++out.matched;
      ++i;
      ++j;
    } else if (p < t) {
      ++i;
    } else {
      ++j;
    }
  }
  if (out.predicted == 0 && out.truth == 0) {
    out.precision = out.recall = out.f1 = 1.0;
    return out;
  }
  out.precision = out.predicted == 0
                      ? 0.0
                      : static_cast<double>(out.matched) /
                            static_cast<double>(out.predicted);
  out.recall = out.truth == 0 ? 0.0
                              : static_cast<double>(out.matched) /
                                    static_cast<double>(out.truth);
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall /
                     (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace latseg

#endif  // LATSEG_EVALUATE_HPP_
