// latseg/corpus.hpp
//
// Deterministic synthetic corpus generation.  Each stream is an independent
// Script drawn from per-stream derived seeds: sentences of contiguous word
// spans closed by a punctuation span, separated by non-speech gaps.  The
// optional "misaligned" mode moves the audible pause inside a sentence (a
// mid-sentence gap) and shrinks the gap that follows the sentence below the
// pause-detection threshold, so pause-based segmenters see pauses in the
// wrong places while the punctuation ground truth is unchanged.
//
// Fixture tree written by write_corpus:
//   <dir>/manifest.json
//   <dir>/streams/stream_NNN.script.json   scripted tokens + embedded vocab
//   <dir>/streams/stream_NNN.ctcl (+.vocab) rendered lattice
//   <dir>/streams/stream_NNN.mask.tsv      speech/nonspeech intervals
//   <dir>/streams/stream_NNN.ref.txt       reference sentences, one per line
//   <dir>/streams/stream_NNN.truth.json    boundary frames + sentence spans
// The manifest embeds the generation parameters and an FNV-1a 64 hash of
// every file, so identical seeds yield identical manifests.

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

#ifndef LATSEG_CORPUS_HPP_
#define LATSEG_CORPUS_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latseg/error.hpp"
#include "latseg/lattice_io.hpp"
#include "latseg/pause_mask.hpp"
#include "latseg/rng.hpp"
#include "latseg/script.hpp"
#include "latseg/vocabulary.hpp"

namespace latseg {

struct CorpusSpec {
  std::size_t streams = 20;
  std::size_t min_sentences = 5, max_sentences = 12;
  std::size_t min_sentence_frames = 50, max_sentence_frames = 300;  // 2-12 s
  std::size_t min_token_frames = 4, max_token_frames = 12;
  std::size_t min_punct_frames = 1, max_punct_frames = 2;
  std::size_t min_gap_frames = 5, max_gap_frames = 20;
  std::size_t words = 61;  // non-punctuation vocabulary entries
  double frame_duration_ms = kDefaultFrameMs;
  double sharpness = 1.0;
  double misaligned_frac = 0.0;  // sentences with a mid-sentence pause
  std::uint64_t seed = 1;

  void validate() const {
    if (streams == 0) throw ConfigError("corpus: streams must be >= 1");
    if (min_sentences == 0) throw ConfigError("corpus: sentences must be >= 1");
    if (min_sentences > max_sentences || min_sentence_frames > max_sentence_frames ||
        min_token_frames > max_token_frames || min_punct_frames > max_punct_frames ||
        min_gap_frames > max_gap_frames)
      throw ConfigError("corpus: min bound exceeds max bound");
    if (min_token_frames == 0 || min_punct_frames == 0 || min_gap_frames == 0)
      throw ConfigError("corpus: frame counts must be >= 1");
    if (min_sentence_frames < min_token_frames + min_punct_frames)
      throw ConfigError("corpus: sentences too short for one token");
    if (words == 0) throw ConfigError("corpus: words must be >= 1");
    if (!(frame_duration_ms > 0.0))
      throw ConfigError("corpus: frame duration must be positive");
    if (!(sharpness > 0.0) || sharpness > 1.0)
      throw ConfigError("corpus: sharpness must be in (0, 1]");
    if (misaligned_frac < 0.0 || misaligned_frac > 1.0)
      throw ConfigError("corpus: misaligned_frac must be in [0, 1]");
  }
};

// "w00".."wNN" word-start-marked tokens plus standalone ". ! ?".
inline Vocabulary make_corpus_vocabulary(const CorpusSpec& spec) {
  std::vector<std::string> surfaces;
  surfaces.reserve(spec.words + 3);
  char buf[16];
  for (std::size_t i = 0; i < spec.words; ++i) {
    std::snprintf(buf, sizeof(buf), "w%02zu", i);
    surfaces.push_back(std::string(kSubwordMarker) + buf);
  }
  surfaces.push_back(".");
  surfaces.push_back("!");
  surfaces.push_back("?");
  return make_vocabulary(std::move(surfaces), "<blk>");
}

namespace detail {
// Gap sizes for the misaligned mode: the audible in-sentence pause and the
// sub-threshold gap that follows such a sentence (all < 200 ms at 40 ms).
inline constexpr std::size_t kMisalignedMidGapMin = 8, kMisalignedMidGapMax = 15;
inline constexpr std::size_t kMisalignedEndGapMin = 2, kMisalignedEndGapMax = 4;
}  // namespace detail

inline Script generate_script(const CorpusSpec& spec, const Vocabulary& vocab,
                              std::size_t stream_index) {
  spec.validate();
  Xoshiro256StarStar rng(derive_seed(spec.seed, stream_index));
  Script script;
  script.frame_duration_ms = spec.frame_duration_ms;
  script.sharpness = spec.sharpness;
  // Residual-noise seed independent of the structural draws below.
  script.seed = derive_seed(spec.seed, 0x100000 + stream_index);

  const std::size_t n_sentences =
      static_cast<std::size_t>(rng.range_int(
          static_cast<long long>(spec.min_sentences),
          static_cast<long long>(spec.max_sentences)));
  auto draw = [&rng](std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(rng.range_int(
        static_cast<long long>(lo), static_cast<long long>(hi)));
  };
  std::size_t cursor = draw(spec.min_gap_frames, spec.max_gap_frames);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    const bool misaligned = rng.uniform() < spec.misaligned_frac;
    const std::size_t target =
        draw(spec.min_sentence_frames, spec.max_sentence_frames);
    const std::size_t punct_len =
        draw(spec.min_punct_frames, spec.max_punct_frames);

    struct Draw { int id; std::size_t len; };
    std::vector<Draw> word_draws;
    std::size_t word_frames = 0;
    int prev_id = -1;
    while (word_frames + punct_len < target) {
      int id = static_cast<int>(draw(0, spec.words - 1));
      while (id == prev_id && spec.words > 1)
        id = static_cast<int>(draw(0, spec.words - 1));
      const std::size_t len = draw(spec.min_token_frames, spec.max_token_frames);
      word_draws.push_back({id, len});
      word_frames += len;
      prev_id = id;
    }
    std::size_t mid_gap_pos = 0, mid_gap = 0;
    const bool has_mid_gap = misaligned && word_draws.size() >= 2;
    if (has_mid_gap) {
      mid_gap_pos = draw(1, word_draws.size() - 1);
      mid_gap = draw(detail::kMisalignedMidGapMin, detail::kMisalignedMidGapMax);
    }

    ScriptSentence sent;
    for (std::size_t i = 0; i < word_draws.size(); ++i) {
      if (has_mid_gap && i == mid_gap_pos) cursor += mid_gap;
      sent.tokens.push_back(ScriptToken{word_draws[i].id, cursor,
                                        cursor + word_draws[i].len});
      cursor += word_draws[i].len;
    }
    const auto& puncts = vocab.punct_ids();
    const int punct_id =
        puncts[draw(0, puncts.size() - 1)];
    sent.tokens.push_back(ScriptToken{punct_id, cursor, cursor + punct_len});
    cursor += punct_len;
    script.sentences.push_back(std::move(sent));

    const bool short_gap = misaligned;  // hide the true sentence boundary
    cursor += (s + 1 == n_sentences)
                  ? draw(spec.min_gap_frames, spec.max_gap_frames)
                  : short_gap
                        ? draw(detail::kMisalignedEndGapMin,
                               detail::kMisalignedEndGapMax)
                        : draw(spec.min_gap_frames, spec.max_gap_frames);
  }
  script.total_frames = cursor;
  script.validate(vocab);
  return script;
}

// --- hashing ---------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "' for hashing");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

// --- corpus spec JSON ------------------------------------------------------

inline nlohmann::json corpus_spec_to_json(const CorpusSpec& s) {
  return nlohmann::json{{"streams", s.streams},
                        {"min_sentences", s.min_sentences},
                        {"max_sentences", s.max_sentences},
                        {"min_sentence_frames", s.min_sentence_frames},
                        {"max_sentence_frames", s.max_sentence_frames},
                        {"min_token_frames", s.min_token_frames},
                        {"max_token_frames", s.max_token_frames},
                        {"min_punct_frames", s.min_punct_frames},
                        {"max_punct_frames", s.max_punct_frames},
                        {"min_gap_frames", s.min_gap_frames},
                        {"max_gap_frames", s.max_gap_frames},
                        {"words", s.words},
                        {"frame_duration_ms", s.frame_duration_ms},
                        {"sharpness", s.sharpness},
                        {"misaligned_frac", s.misaligned_frac},
                        {"seed", s.seed}};
}

inline CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  CorpusSpec s;
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("streams", s.streams);
    get("min_sentences", s.min_sentences);
    get("max_sentences", s.max_sentences);
    get("min_sentence_frames", s.min_sentence_frames);
    get("max_sentence_frames", s.max_sentence_frames);
    get("min_token_frames", s.min_token_frames);
    get("max_token_frames", s.max_token_frames);
    get("min_punct_frames", s.min_punct_frames);
    get("max_punct_frames", s.max_punct_frames);
    get("min_gap_frames", s.min_gap_frames);
    get("max_gap_frames", s.max_gap_frames);
    get("words", s.words);
    get("frame_duration_ms", s.frame_duration_ms);
    get("sharpness", s.sharpness);
    get("misaligned_frac", s.misaligned_frac);
    get("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  }
  s.validate();
  return s;
}

// --- on-disk fixture tree --------------------------------------------------

struct StreamFixture {
  std::string id;
  std::string script_path, lattice_path, mask_path, ref_path, truth_path;
};

struct CorpusOnDisk {
  std::string root;
  CorpusSpec spec;
  std::vector<StreamFixture> streams;
};

inline nlohmann::json truth_to_json(const GroundTruth& gt) {
  nlohmann::json j;
  j["format"] = "latseg-truth";
  j["version"] = 1;
  j["boundary_frames"] = gt.boundary_frames;
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& [a, b] : gt.sentence_spans_ms) spans.push_back({a, b});
  j["sentence_spans_ms"] = std::move(spans);
  j["reference_sentences"] = gt.reference_sentences;
  j["sentence_token_ids"] = gt.sentence_token_ids;
  return j;
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  try {
    if (j.at("format").get<std::string>() != "latseg-truth")
      throw FormatError("truth: unexpected format tag");
    gt.boundary_frames = j.at("boundary_frames").get<std::vector<std::size_t>>();
    for (const auto& span : j.at("sentence_spans_ms"))
      gt.sentence_spans_ms.emplace_back(span.at(0).get<double>(),
                                        span.at(1).get<double>());
    gt.reference_sentences =
        j.at("reference_sentences").get<std::vector<std::string>>();
    gt.sentence_token_ids =
        j.at("sentence_token_ids").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("truth json: ") + e.what());
  }
  return gt;
}

inline GroundTruth load_truth_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
  return truth_from_json(j);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FixtureError("write failed for '" + path + "'");
}

// Writes the full fixture tree and manifest; returns the manifest document.
inline nlohmann::json write_corpus(const CorpusSpec& spec,
                                   const std::string& dir) {
  spec.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "streams", ec);
  if (ec) throw FixtureError("cannot create '" + dir + "': " + ec.message());

  const Vocabulary vocab = make_corpus_vocabulary(spec);
  nlohmann::json manifest;
  manifest["format"] = "latseg-corpus";
  manifest["version"] = 1;
  manifest["spec"] = corpus_spec_to_json(spec);
  nlohmann::json streams = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.streams; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "stream_%03zu", i);
    const std::string id = idbuf;
    const std::string rel = "streams/" + id;
    const std::string base = dir + "/" + rel;

    const Script script = generate_script(spec, vocab, i);
    const CtcLattice lattice = script_to_lattice(script, vocab);
    const PauseMask mask = mask_from_script(script);
    const GroundTruth gt = ground_truth_of(script, vocab);

    save_script_file(base + ".script.json", script, vocab);
    save_lattice_file(base + ".ctcl", lattice, vocab);
    save_pause_mask_tsv(base + ".mask.tsv", mask);
    std::string refs;
    for (const auto& line : gt.reference_sentences) refs += line + "\n";
    write_text_file(base + ".ref.txt", refs);
    write_text_file(base + ".truth.json", truth_to_json(gt).dump(2) + "\n");

    nlohmann::json entry;
    entry["id"] = id;
    entry["script"] = rel + ".script.json";
    entry["lattice"] = rel + ".ctcl";
    entry["mask"] = rel + ".mask.tsv";
    entry["ref"] = rel + ".ref.txt";
    entry["truth"] = rel + ".truth.json";
    entry["hashes"] = {
        {"script", fnv1a64_file_hex(base + ".script.json")},
        {"lattice", fnv1a64_file_hex(base + ".ctcl")},
        {"mask", fnv1a64_file_hex(base + ".mask.tsv")},
        {"ref", fnv1a64_file_hex(base + ".ref.txt")},
        {"truth", fnv1a64_file_hex(base + ".truth.json")}};
    streams.push_back(std::move(entry));
  }
  manifest["streams"] = std::move(streams);
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

inline CorpusOnDisk load_corpus(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + manifest_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + manifest_path + "': " + e.what());
  }
  CorpusOnDisk corpus;
  corpus.root = dir;
  try {
    if (j.at("format").get<std::string>() != "latseg-corpus")
      throw FormatError("manifest: unexpected format tag");
    corpus.spec = corpus_spec_from_json(j.at("spec"));
    for (const auto& entry : j.at("streams")) {
      StreamFixture f;
      f.id = entry.at("id").get<std::string>();
      f.script_path = dir + "/" + entry.at("script").get<std::string>();
      f.lattice_path = dir + "/" + entry.at("lattice").get<std::string>();
      f.mask_path = dir + "/" + entry.at("mask").get<std::string>();
      f.ref_path = dir + "/" + entry.at("ref").get<std::string>();
      f.truth_path = dir + "/" + entry.at("truth").get<std::string>();
      corpus.streams.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return corpus;
}

}  // namespace latseg

#endif  // LATSEG_CORPUS_HPP_
