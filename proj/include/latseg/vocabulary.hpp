// latseg/vocabulary.hpp
//
// Token inventory shared by lattices and decoders.  The blank symbol always
// occupies the final index; sentence-final punctuation ids are derived from
// token surfaces (terminal . ! ? after stripping the subword marker).

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

#ifndef LATSEG_VOCABULARY_HPP_
#define LATSEG_VOCABULARY_HPP_

#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "latseg/error.hpp"

namespace latseg {

// SentencePiece-style word-start marker (U+2581 LOWER ONE EIGHTH BLOCK).
inline const std::string kSubwordMarker = "\xE2\x96\x81";
inline const std::string kDefaultPunct = ".!?";

class Vocabulary {
 public:
  Vocabulary() = default;

  // `surfaces` excludes the blank; the blank is appended at the final index.
  static Vocabulary create(std::vector<std::string> surfaces,
                           std::string blank_surface,
                           const std::string& punct_chars = kDefaultPunct,
                           const std::string& subword_marker = kSubwordMarker) {
    if (blank_surface.empty()) throw ValidationError("vocabulary: empty blank surface");
    std::unordered_set<std::string> seen;
    for (const auto& s : surfaces) {
      if (s.empty()) throw ValidationError("vocabulary: empty token surface");
      if (!seen.insert(s).second)
        throw ValidationError("vocabulary: duplicate surface '" + s + "'");
    }
    if (seen.count(blank_surface))
      throw ValidationError("vocabulary: blank surface collides with token '" +
                            blank_surface + "'");
    Vocabulary v;
    v.surfaces_ = std::move(surfaces);
    v.blank_id_ = static_cast<int>(v.surfaces_.size());
    v.surfaces_.push_back(std::move(blank_surface));
    v.marker_ = subword_marker;
    v.is_punct_.assign(v.surfaces_.size(), false);
    for (int id = 0; id < v.blank_id_; ++id) {
      if (surface_is_sentence_final(v.surfaces_[id], punct_chars, subword_marker)) {
        v.is_punct_[id] = true;
        v.punct_ids_.push_back(id);
      }
    }
    return v;
  }

  // Non-blank token count V.
  int size() const { return blank_id_; }
  // Lattice column count V + 1.
  int width() const { return static_cast<int>(surfaces_.size()); }
  int blank_id() const { return blank_id_; }
  const std::string& subword_marker() const { return marker_; }

  const std::string& surface(int id) const {
    if (id < 0 || id >= width()) throw BoundsError("vocabulary: id out of range");
    return surfaces_[id];
  }

  const std::vector<int>& punct_ids() const { return punct_ids_; }

  // All surfaces in id order, blank last.
  const std::vector<std::string>& surfaces() const { return surfaces_; }

  bool is_punct(int id) const {
    return id >= 0 && id < width() && is_punct_[id];
  }

  // True when the surface, after stripping the subword marker prefix, ends in
  // one of the sentence-final characters.  "a.b" is not sentence-final.
  static bool surface_is_sentence_final(const std::string& surface,
                                        const std::string& punct_chars = kDefaultPunct,
                                        const std::string& marker = kSubwordMarker) {
    std::string s = surface;
    if (!marker.empty() && s.rfind(marker, 0) == 0) s = s.substr(marker.size());
    if (s.empty()) return false;
    return punct_chars.find(s.back()) != std::string::npos;
  }

 private:
  std::vector<std::string> surfaces_;  // includes blank at the final index
  std::vector<bool> is_punct_;
  std::vector<int> punct_ids_;         // sorted, subset of [0, blank_id_)
  std::string marker_ = kSubwordMarker;
  int blank_id_ = 0;
};

inline Vocabulary make_vocabulary(std::vector<std::string> surfaces,
                                  std::string blank_surface,
                                  const std::string& punct_chars = kDefaultPunct,
                                  const std::string& subword_marker = kSubwordMarker) {
  return Vocabulary::create(std::move(surfaces), std::move(blank_surface),
                            punct_chars, subword_marker);
}

// Joins token surfaces into plain text: a marker-initial surface starts a new
// whitespace-separated word, any other surface (e.g. punctuation) attaches to
// the current word.
inline std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  const std::string& marker = vocab.subword_marker();
  for (int id : ids) {
    const std::string& s = vocab.surface(id);
    if (!marker.empty() && s.rfind(marker, 0) == 0) {
      if (!out.empty()) out += ' ';
      out += s.substr(marker.size());
    } else {
      out += s;
    }
  }
  return out;
}

}  // namespace latseg

#endif  // LATSEG_VOCABULARY_HPP_
