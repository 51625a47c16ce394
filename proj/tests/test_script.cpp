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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "latseg/corpus.hpp"
#include "latseg/ctc.hpp"
#include "latseg/error.hpp"
#include "latseg/script.hpp"
#include "latseg/vocabulary.hpp"

using namespace latseg;

namespace {

Vocabulary script_vocab() {
  return make_vocabulary(
      {"\xE2\x96\x81"
       "a",
       "\xE2\x96\x81"
       "b",
       "\xE2\x96\x81"
       "c",
       ".", "!", "?"},
      "<blk>");
}

Script small_script(double sharpness) {
  Script s;
  s.sharpness = sharpness;
  s.seed = 77;
  s.frame_duration_ms = 40.0;
  s.total_frames = 30;
  s.sentences.push_back(ScriptSentence{{{0, 2, 5}, {1, 5, 9}, {3, 9, 11}}});
  s.sentences.push_back(ScriptSentence{{{2, 16, 20}, {0, 20, 24}, {5, 24, 26}}});
  return s;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "latseg_script_%d_%p", ::getpid(),
                  static_cast<void*>(this));
    path = std::filesystem::temp_directory_path() / buf;
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("script validation rejects malformed structures", "[script]") {
  const Vocabulary vocab = script_vocab();
  CHECK_NOTHROW(small_script(1.0).validate(vocab));

  Script s = small_script(1.0);
  s.sharpness = 0.05;  // below the uniform floor 1/7
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);
  s = small_script(1.0);
  s.sharpness = 1.5;
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);

  s = small_script(1.0);
  s.sentences[1].tokens[0].start = 8;  // overlaps sentence 0
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);

  s = small_script(1.0);
  s.sentences[0].tokens.pop_back();  // now ends with a word
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);

  s = small_script(1.0);
  s.total_frames = 20;  // spans reach 26
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);

  s = small_script(1.0);
  s.sentences[0].tokens[1] = ScriptToken{0, 5, 9};  // a a touching -> merge
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);

  s = small_script(1.0);
  s.sentences[0].tokens[1].end = s.sentences[0].tokens[1].start;
  CHECK_THROWS_AS(s.validate(vocab), ValidationError);
}

TEST_CASE("scripted labels cover spans and leave gaps blank", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(1.0);
  const auto labels = scripted_labels(s, vocab.blank_id());
  REQUIRE(labels.size() == 30);
  CHECK(labels[0] == vocab.blank_id());
  CHECK(labels[2] == 0);
  CHECK(labels[4] == 0);
  CHECK(labels[5] == 1);
  CHECK(labels[9] == 3);
  CHECK(labels[10] == 3);
  CHECK(labels[11] == vocab.blank_id());
  CHECK(labels[15] == vocab.blank_id());
  CHECK(labels[16] == 2);
  CHECK(labels[25] == 5);
  CHECK(labels[29] == vocab.blank_id());
  CHECK(s.flat_tokens() == std::vector<int>{0, 1, 3, 2, 0, 5});
}

TEST_CASE("one-hot lattices collapse back to the script", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(1.0);
  const auto lat = script_to_lattice(s, vocab);
  REQUIRE(lat.frames() == 30);
  REQUIRE(lat.width() == 7);
  const auto labels = scripted_labels(s, vocab.blank_id());
  for (std::size_t t = 0; t < lat.frames(); ++t) {
    for (int v = 0; v < lat.width(); ++v) {
      if (v == labels[t])
        CHECK(lat.at(t, v) == 0.0);
      else
        CHECK(is_log_zero(lat.at(t, v)));
    }
  }
  CHECK(collapse(greedy_labels(lat), vocab.blank_id()) == s.flat_tokens());
}

TEST_CASE("soft lattices stay normalized with the scripted peak", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(0.8);
  const auto lat = script_to_lattice(s, vocab);
  const auto labels = scripted_labels(s, vocab.blank_id());
  for (std::size_t t = 0; t < lat.frames(); ++t) {
    double mass = 0.0;
    for (int v = 0; v < lat.width(); ++v) mass += std::exp(lat.at(t, v));
    CHECK(mass == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(row_argmax(lat.row(t)) == labels[t]);
    CHECK(lat.at(t, labels[t]) == Catch::Approx(std::log(0.8)).margin(1e-12));
  }
  // Residual noise is deterministic in the script seed.
  const auto again = script_to_lattice(s, vocab);
  for (std::size_t t = 0; t < lat.frames(); ++t)
    for (int v = 0; v < lat.width(); ++v)
      CHECK(lat.at(t, v) == again.at(t, v));
}

TEST_CASE("the pause mask marks exactly the scripted spans", "[script]") {
  const Script s = small_script(1.0);
  const auto mask = mask_from_script(s);
  REQUIRE(mask.frames() == 30);
  CHECK(mask.frame_duration_ms == 40.0);
  for (std::size_t t = 0; t < 30; ++t) {
    const bool in_span = (t >= 2 && t < 11) || (t >= 16 && t < 26);
    CHECK(mask.is_speech(t) == in_span);
  }
}

TEST_CASE("ground truth lists sentence ends and references", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(1.0);
  const auto gt = ground_truth_of(s, vocab);
  CHECK(gt.boundary_frames == std::vector<std::size_t>{11, 26});
  CHECK(gt.reference_sentences ==
        std::vector<std::string>{"a b.", "c a?"});
  CHECK(gt.sentence_token_ids ==
        std::vector<std::vector<int>>{{0, 1, 3}, {2, 0, 5}});
  REQUIRE(gt.sentence_spans_ms.size() == 2);
  CHECK(gt.sentence_spans_ms[0].first == Catch::Approx(80.0));
  CHECK(gt.sentence_spans_ms[0].second == Catch::Approx(440.0));
  CHECK(gt.sentence_spans_ms[1].first == Catch::Approx(640.0));
  CHECK(gt.sentence_spans_ms[1].second == Catch::Approx(1040.0));
}

TEST_CASE("script json round trips with its vocabulary", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(0.8);
  TempDir dir;
  const std::string path = dir.file("script.json");
  save_script_file(path, s, vocab);
  const auto [loaded, loaded_vocab] = load_script_file(path);
  CHECK(loaded.sharpness == s.sharpness);
  CHECK(loaded.seed == s.seed);
  CHECK(loaded.frame_duration_ms == s.frame_duration_ms);
  CHECK(loaded.total_frames == s.total_frames);
  REQUIRE(loaded.sentences.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(loaded.sentences[i].tokens.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(loaded.sentences[i].tokens[k].id == s.sentences[i].tokens[k].id);
      CHECK(loaded.sentences[i].tokens[k].start ==
            s.sentences[i].tokens[k].start);
      CHECK(loaded.sentences[i].tokens[k].end == s.sentences[i].tokens[k].end);
    }
  }
  CHECK(loaded_vocab.width() == vocab.width());
  for (int v = 0; v < vocab.width(); ++v)
    CHECK(loaded_vocab.surface(v) == vocab.surface(v));
  CHECK_THROWS_AS(load_script_file(dir.file("nope.json")), FixtureError);
}

TEST_CASE("scripted backend serves lattice blocks in order", "[script]") {
  const Vocabulary vocab = script_vocab();
  const Script s = small_script(0.8);
  ScriptedBackend backend(s, vocab);
  const auto& full = backend.full_lattice();
  const auto a = backend.encode_block(SpeechBlock{0, 12, 0.0, 480.0});
  const auto b = backend.encode_block(SpeechBlock{1, 18, 480.0, 1200.0});
  CHECK(a.state_frames == 12);
  CHECK(b.state_frames == 18);
  for (std::size_t t = 0; t < 12; ++t)
    for (int v = 0; v < full.width(); ++v)
      CHECK(a.rows.at(t, v) == full.at(t, v));
  for (std::size_t t = 0; t < 18; ++t)
    for (int v = 0; v < full.width(); ++v)
      CHECK(b.rows.at(t, v) == full.at(12 + t, v));
  CHECK_THROWS_AS(backend.encode_block(SpeechBlock{2, 1, 1200.0, 1240.0}),
                  StreamError);
  CHECK(backend.counters().encode_calls == 3);  // the failed call counted too
}

TEST_CASE("scripted decoder peaks on the next scripted token", "[script]") {
  const Vocabulary vocab = script_vocab();
  ScriptedBackend backend(small_script(1.0), vocab);

  const auto d0 = backend.decoder_step({{}});
  REQUIRE(d0.size() == 1);
  CHECK(d0[0][0] == 0.0);  // next token: a
  CHECK(is_log_zero(d0[0][1]));

  const auto d1 = backend.decoder_step({{0}, {0, 1}, {2}});
  REQUIRE(d1.size() == 3);
  CHECK(d1[0][1] == 0.0);                          // a -> b
  CHECK(d1[1][3] == 0.0);                          // a b -> .
  CHECK(d1[2][0] == Catch::Approx(-std::log(7.0)));  // off-script: uniform
  CHECK(backend.counters().decode_steps == 2);  // batched calls count once

  const auto full = backend.decoder_step({{0, 1, 3, 2, 0, 5}});
  CHECK(full[0][backend.eos_id()] == 0.0);  // script exhausted -> EOS

  backend.reset_segment(3);
  const auto after = backend.decoder_step({{}});
  CHECK(after[0][2] == 0.0);  // re-anchored at c
  backend.reset_segment(100);  // clamps to the script end
  const auto done = backend.decoder_step({{}});
  CHECK(done[0][backend.eos_id()] == 0.0);
}

TEST_CASE("soft scripted decoder spreads the leftover mass", "[script]") {
  const Vocabulary vocab = script_vocab();
  ScriptedBackend backend(small_script(0.8), vocab);
  const auto d = backend.decoder_step({{}});
  CHECK(d[0][0] == Catch::Approx(std::log(0.8)));
  for (int v = 1; v < vocab.width(); ++v)
    CHECK(d[0][v] == Catch::Approx(std::log(0.2 / 6.0)));
}

TEST_CASE("lattice replay backend is uninformative but counts", "[script]") {
  const Vocabulary vocab = script_vocab();
  const auto lat = script_to_lattice(small_script(1.0), vocab);
  LatticeReplayBackend backend(lat);
  CHECK(backend.vocab_width() == 7);
  const auto out = backend.encode_block(SpeechBlock{0, 30, 0.0, 1200.0});
  CHECK(out.state_frames == 30);
  const auto d = backend.decoder_step({{0, 1}, {}});
  REQUIRE(d.size() == 2);
  for (const auto& row : d)
    for (double x : row) CHECK(x == Catch::Approx(-std::log(7.0)));
  CHECK(backend.counters().encode_calls == 1);
  CHECK(backend.counters().decode_steps == 1);
}

TEST_CASE("generated scripts are deterministic and well formed", "[script]") {
  CorpusSpec spec;
  spec.streams = 3;
  spec.seed = 99;
  spec.sharpness = 0.9;
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  CHECK(vocab.width() == 61 + 3 + 1);
  CHECK(vocab.punct_ids() == std::vector<int>{61, 62, 63});

  const Script a = generate_script(spec, vocab, 0);
  const Script b = generate_script(spec, vocab, 0);
  const Script c = generate_script(spec, vocab, 1);
  CHECK(script_to_json(a, vocab).dump() == script_to_json(b, vocab).dump());
  CHECK(script_to_json(a, vocab).dump() != script_to_json(c, vocab).dump());

  CHECK(a.sentences.size() >= spec.min_sentences);
  CHECK(a.sentences.size() <= spec.max_sentences);
  for (const auto& sent : a.sentences) {
    REQUIRE_FALSE(sent.tokens.empty());
    CHECK(vocab.is_punct(sent.tokens.back().id));
    for (std::size_t i = 0; i + 1 < sent.tokens.size(); ++i) {
      CHECK_FALSE(vocab.is_punct(sent.tokens[i].id));
      CHECK(sent.tokens[i].end <= sent.tokens[i + 1].start);
    }
  }
}

TEST_CASE("misaligned scripts hide sentence ends behind tiny gaps", "[script]") {
  CorpusSpec spec;
  spec.streams = 1;
  spec.seed = 1234;
  spec.misaligned_frac = 1.0;
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script s = generate_script(spec, vocab, 0);
  std::size_t mid_gaps = 0, tiny_end_gaps = 0;
  for (std::size_t k = 0; k < s.sentences.size(); ++k) {
    const auto& toks = s.sentences[k].tokens;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      const std::size_t gap = toks[i + 1].start - toks[i].end;
      if (gap > 0) {
        ++mid_gaps;
        CHECK(gap >= 8);
        CHECK(gap <= 15);
      }
    }
    if (k + 1 < s.sentences.size()) {
      const std::size_t gap =
          s.sentences[k + 1].tokens.front().start - toks.back().end;
      CHECK(gap >= 2);
      CHECK(gap <= 4);
      if (gap <= 4) ++tiny_end_gaps;
    }
  }
  CHECK(mid_gaps > 0);  // every multi-word sentence carries one audible pause
  CHECK(tiny_end_gaps + 1 == s.sentences.size());
}

TEST_CASE("corpus fixture trees are reproducible", "[script]") {
  CorpusSpec spec;
  spec.streams = 2;
  spec.seed = 321;
  spec.min_sentences = 2;
  spec.max_sentences = 3;
  TempDir a, b;
  const auto ma = write_corpus(spec, a.path.string());
  const auto mb = write_corpus(spec, b.path.string());
  CHECK(ma.dump() == mb.dump());  // embedded per-file hashes match

  const auto corpus = load_corpus(a.path.string());
  CHECK(corpus.spec.streams == 2);
  REQUIRE(corpus.streams.size() == 2);
  for (const auto& f : corpus.streams) {
    CHECK(std::filesystem::exists(f.script_path));
    CHECK(std::filesystem::exists(f.lattice_path));
    CHECK(std::filesystem::exists(f.mask_path));
    CHECK(std::filesystem::exists(f.ref_path));
    CHECK(std::filesystem::exists(f.truth_path));
  }
  // Every artifact agrees with the in-memory generation.
  const auto [script, vocab] = load_script_file(corpus.streams[0].script_path);
  const auto gt = ground_truth_of(script, vocab);
  const auto loaded_gt = load_truth_file(corpus.streams[0].truth_path);
  CHECK(loaded_gt.boundary_frames == gt.boundary_frames);
  CHECK(loaded_gt.reference_sentences == gt.reference_sentences);
  CHECK(loaded_gt.sentence_token_ids == gt.sentence_token_ids);
  const auto [lat, lat_vocab] = load_lattice_file(corpus.streams[0].lattice_path);
  CHECK(lat_vocab.width() == vocab.width());
  const auto want = script_to_lattice(script, vocab);
  REQUIRE(lat.frames() == want.frames());
  for (std::size_t t = 0; t < lat.frames(); ++t)
    for (int v = 0; v < lat.width(); ++v)
      CHECK(lat.at(t, v) ==
            static_cast<double>(static_cast<float>(want.at(t, v))));
  CHECK_THROWS_AS(load_corpus((a.path / "missing").string()), FixtureError);
}
