// latseg/script.hpp
//
// Scripted synthetic streams: a Script places token ids on frame spans; the
// generator turns it into a normalized CTC lattice (peak mass `sharpness` on
// the scripted label, seeded residual noise on the rest), a pause mask, and
// ground-truth sentence boundaries/text.  ScriptedBackend replays the script
// as a deterministic ModelBackend; LatticeReplayBackend serves externally
// loaded lattices with an uninformative decoder.
//
// Residual noise is reproducible across implementations: frame t uses an
// xoshiro256** generator seeded from derive_seed(script seed, t), draws one
// weight per non-peak column in column order via range_double(0.1, 1.0), and
// assigns probability (1 - sharpness) * w / sum(w).

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

#ifndef LATSEG_SCRIPT_HPP_
#define LATSEG_SCRIPT_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latseg/backend.hpp"
#include "latseg/error.hpp"
#include "latseg/lattice.hpp"
#include "latseg/logmath.hpp"
#include "latseg/pause_mask.hpp"
#include "latseg/rng.hpp"
#include "latseg/vocabulary.hpp"

namespace latseg {

struct ScriptToken {
  int id = 0;              // vocabulary token id (never blank)
  std::size_t start = 0;   // frame span [start, end)
  std::size_t end = 0;
};

struct ScriptSentence {
  std::vector<ScriptToken> tokens;  // last token is sentence punctuation
};

struct Script {
  std::vector<ScriptSentence> sentences;
  double sharpness = 1.0;          // peak mass on the scripted label
  std::uint64_t seed = 0;          // residual-noise seed
  double frame_duration_ms = kDefaultFrameMs;
  std::size_t total_frames = 0;    // >= last span end; tail is blank

  void validate(const Vocabulary& vocab) const {
    if (!(frame_duration_ms > 0.0))
      throw ValidationError("script: frame duration must be positive");
    const double floor = 1.0 / static_cast<double>(vocab.width());
    if (!(sharpness > floor) || sharpness > 1.0)
      throw ValidationError("script: sharpness must be in (1/(V+1), 1]");
    std::size_t cursor = 0;
    const ScriptToken* prev = nullptr;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const auto& sent = sentences[s];
      if (sent.tokens.empty())
        throw ValidationError("script: sentence " + std::to_string(s) +
                              " is empty");
      for (const auto& tok : sent.tokens) {
        if (tok.id < 0 || tok.id >= static_cast<int>(vocab.size()))
          throw ValidationError("script: token id out of range");
        if (!(tok.end > tok.start))
          throw ValidationError("script: empty token span");
        if (tok.start < cursor)
          throw ValidationError("script: overlapping or unordered spans");
        // Contiguous equal ids would merge under CTC collapse.
        if (prev && prev->id == tok.id && tok.start == prev->end)
          throw ValidationError("script: adjacent duplicate token ids");
        cursor = tok.end;
        prev = &tok;
      }
      if (!vocab.is_punct(sent.tokens.back().id))
        throw ValidationError("script: sentence " + std::to_string(s) +
                              " does not end with punctuation");
    }
    if (total_frames < cursor)
      throw ValidationError("script: total_frames smaller than spans");
  }

  std::vector<int> flat_tokens() const {
    std::vector<int> out;
    for (const auto& s : sentences)
      for (const auto& t : s.tokens) out.push_back(t.id);
    return out;
  }
};

struct GroundTruth {
  std::vector<std::size_t> boundary_frames;  // exclusive sentence-end frames
  std::vector<std::string> reference_sentences;
  std::vector<std::vector<int>> sentence_token_ids;
  std::vector<std::pair<double, double>> sentence_spans_ms;
};

inline GroundTruth ground_truth_of(const Script& script,
                                   const Vocabulary& vocab) {
  GroundTruth gt;
  for (const auto& sent : script.sentences) {
    std::vector<int> ids;
    for (const auto& t : sent.tokens) ids.push_back(t.id);
    gt.boundary_frames.push_back(sent.tokens.back().end);
    gt.reference_sentences.push_back(detokenize(ids, vocab));
    gt.sentence_spans_ms.emplace_back(
        static_cast<double>(sent.tokens.front().start) *
            script.frame_duration_ms,
        static_cast<double>(sent.tokens.back().end) * script.frame_duration_ms);
    gt.sentence_token_ids.push_back(std::move(ids));
  }
  return gt;
}

// Scripted label per frame: the token id inside a span, blank elsewhere.
inline std::vector<int> scripted_labels(const Script& script, int blank_id) {
  std::vector<int> labels(script.total_frames, blank_id);
  for (const auto& sent : script.sentences)
    for (const auto& tok : sent.tokens)
      for (std::size_t t = tok.start; t < tok.end; ++t) labels[t] = tok.id;
  return labels;
}

inline CtcLattice script_to_lattice(const Script& script,
                                    const Vocabulary& vocab) {
  script.validate(vocab);
  const int width = vocab.width();
  const auto labels = scripted_labels(script, vocab.blank_id());
  CtcLattice lat = CtcLattice::empty(width, script.frame_duration_ms);
  std::vector<double> row(static_cast<std::size_t>(width));
  std::vector<double> weights(static_cast<std::size_t>(width));
  const double beta = script.sharpness;
  for (std::size_t t = 0; t < script.total_frames; ++t) {
    const int peak = labels[t];
    if (beta >= 1.0) {
      for (int v = 0; v < width; ++v)
        row[static_cast<std::size_t>(v)] = (v == peak) ? 0.0 : kLogZero;
    } else {
      Xoshiro256StarStar rng(derive_seed(script.seed, t));
      double sum = 0.0;
      for (int v = 0; v < width; ++v) {
        if (v == peak) continue;
        const double w = rng.range_double(0.1, 1.0);
        weights[static_cast<std::size_t>(v)] = w;
        sum += w;
      }
      for (int v = 0; v < width; ++v) {
        const double p =
            (v == peak) ? beta
                        : (1.0 - beta) * weights[static_cast<std::size_t>(v)] / sum;
        row[static_cast<std::size_t>(v)] = std::log(p);
      }
    }
    lat.append_row(row);
  }
  return lat;
}

// Speech/non-speech mask implied by the scripted spans (gaps are non-speech).
inline PauseMask mask_from_script(const Script& script) {
  PauseMask mask;
  mask.frame_duration_ms = script.frame_duration_ms;
  mask.speech.assign(script.total_frames, 0);
  for (const auto& sent : script.sentences)
    for (const auto& tok : sent.tokens)
      for (std::size_t t = tok.start; t < tok.end; ++t) mask.speech[t] = 1;
  return mask;
}

// --- script JSON fixtures --------------------------------------------------

inline nlohmann::json script_to_json(const Script& script,
                                     const Vocabulary& vocab) {
  nlohmann::json j;
  j["format"] = "latseg-script";
  j["version"] = 1;
  j["frame_duration_ms"] = script.frame_duration_ms;
  j["sharpness"] = script.sharpness;
  j["seed"] = script.seed;
  j["total_frames"] = script.total_frames;
  nlohmann::json sents = nlohmann::json::array();
  for (const auto& sent : script.sentences) {
    nlohmann::json toks = nlohmann::json::array();
    for (const auto& t : sent.tokens)
      toks.push_back({t.id, t.start, t.end});
    sents.push_back(std::move(toks));
  }
  j["sentences"] = std::move(sents);
  j["vocab"] = {{"surfaces", std::vector<std::string>(
                                vocab.surfaces().begin(),
                                vocab.surfaces().end() - 1)},
                {"blank", vocab.surface(vocab.blank_id())}};
  return j;
}

inline std::pair<Script, Vocabulary> script_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "latseg-script")
      throw FormatError("script: unexpected format tag");
    Script script;
    script.frame_duration_ms = j.at("frame_duration_ms").get<double>();
    script.sharpness = j.at("sharpness").get<double>();
    script.seed = j.at("seed").get<std::uint64_t>();
    script.total_frames = j.at("total_frames").get<std::size_t>();
    for (const auto& sent : j.at("sentences")) {
      ScriptSentence s;
      for (const auto& tok : sent) {
        if (!tok.is_array() || tok.size() != 3)
          throw FormatError("script: token entries must be [id, start, end]");
        s.tokens.push_back(ScriptToken{tok[0].get<int>(),
                                       tok[1].get<std::size_t>(),
                                       tok[2].get<std::size_t>()});
      }
      script.sentences.push_back(std::move(s));
    }
    Vocabulary vocab =
        make_vocabulary(j.at("vocab").at("surfaces").get<std::vector<std::string>>(),
                        j.at("vocab").at("blank").get<std::string>());
    script.validate(vocab);
    return {std::move(script), std::move(vocab)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("script json: ") + e.what());
  }
}

inline void save_script_file(const std::string& path, const Script& script,
                             const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  out << script_to_json(script, vocab).dump(2) << "\n";
  if (!out) throw FixtureError("write failed for '" + path + "'");
}

inline std::pair<Script, Vocabulary> load_script_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
  return script_from_json(j);
}

// --- backends --------------------------------------------------------------

// Serves the scripted lattice block-by-block and a decoder peaked on the next
// scripted token given a matching prefix; off-script prefixes get a uniform
// distribution.  reset_segment(n) consumes n tokens of the script, so the
// decoder re-anchors at the first token not finalized in a closed segment.
class ScriptedBackend : public ModelBackend {
 public:
  ScriptedBackend(const Script& script, const Vocabulary& vocab)
      : lattice_(script_to_lattice(script, vocab)),
        flat_(script.flat_tokens()),
        width_(vocab.width()),
        sharpness_(script.sharpness) {}

  int vocab_width() const override { return width_; }

  EncodeOut encode_block(const SpeechBlock& block) override {
    ++counters_.encode_calls;
    const std::size_t want = block.feature_frames;
    if (cursor_ + want > lattice_.frames())
      throw StreamError("scripted backend: block exceeds scripted stream");
    EncodeOut out;
    out.rows = lattice_slice(lattice_, cursor_, cursor_ + want);
    out.state_frames = out.rows.frames();
    cursor_ += want;
    return out;
  }

  std::vector<std::vector<double>> decoder_step(
      const std::vector<std::vector<int>>& prefixes) override {
    ++counters_.decode_steps;
    std::vector<std::vector<double>> out;
    out.reserve(prefixes.size());
    for (const auto& prefix : prefixes) out.push_back(next_dist(prefix));
    return out;
  }

  void reset_segment(std::size_t finalized_in_segment) override {
    base_ += finalized_in_segment;
    if (base_ > flat_.size()) base_ = flat_.size();
  }

  const CtcLattice& full_lattice() const { return lattice_; }

 private:
  std::vector<double> next_dist(const std::vector<int>& prefix) const {
    const std::size_t w = static_cast<std::size_t>(width_);
    bool on_script = base_ + prefix.size() <= flat_.size();
    if (on_script)
      for (std::size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] != flat_[base_ + i]) {
          on_script = false;
          break;
        }
    std::vector<double> dist(w);
    if (!on_script) {
      const double u = -std::log(static_cast<double>(w));
      for (auto& d : dist) d = u;
      return dist;
    }
    // Next scripted token, or EOS once the script is exhausted.
    const int next = (base_ + prefix.size() < flat_.size())
                         ? flat_[base_ + prefix.size()]
                         : eos_id();
    if (sharpness_ >= 1.0) {
      for (std::size_t v = 0; v < w; ++v)
        dist[v] = (static_cast<int>(v) == next) ? 0.0 : kLogZero;
    } else {
      const double rest = std::log((1.0 - sharpness_) / static_cast<double>(w - 1));
      for (std::size_t v = 0; v < w; ++v)
        dist[v] = (static_cast<int>(v) == next) ? std::log(sharpness_) : rest;
    }
    return dist;
  }

  CtcLattice lattice_;
  std::vector<int> flat_;
  int width_;
  double sharpness_;
  std::size_t cursor_ = 0;  // frames served so far
  std::size_t base_ = 0;    // script tokens consumed by closed segments
};

// Serves a pre-loaded lattice with an uninformative decoder; intended for
// externally dumped lattices, typically decoded with lambda = 1.
class LatticeReplayBackend : public ModelBackend {
 public:
  explicit LatticeReplayBackend(CtcLattice lattice)
      : lattice_(std::move(lattice)) {}

  int vocab_width() const override { return lattice_.width(); }

  EncodeOut encode_block(const SpeechBlock& block) override {
    ++counters_.encode_calls;
    const std::size_t want = block.feature_frames;
    if (cursor_ + want > lattice_.frames())
      throw StreamError("lattice replay: block exceeds lattice");
    EncodeOut out;
    out.rows = lattice_slice(lattice_, cursor_, cursor_ + want);
    out.state_frames = out.rows.frames();
    cursor_ += want;
    return out;
  }

  std::vector<std::vector<double>> decoder_step(
      const std::vector<std::vector<int>>& prefixes) override {
    ++counters_.decode_steps;
    const std::size_t w = static_cast<std::size_t>(lattice_.width());
    std::vector<std::vector<double>> out(
        prefixes.size(),
        std::vector<double>(w, -std::log(static_cast<double>(w))));
    return out;
  }

  void reset_segment(std::size_t) override {}
  const CtcLattice& full_lattice() const { return lattice_; }

 private:
  CtcLattice lattice_;
  std::size_t cursor_ = 0;
};

}  // namespace latseg

#endif  // LATSEG_SCRIPT_HPP_
