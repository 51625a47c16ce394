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

#include <cstdint>
#include <vector>

#include "latseg/error.hpp"
#include "latseg/policy.hpp"
#include "latseg/script.hpp"
#include "latseg/vocabulary.hpp"
#include "oracles.hpp"

using namespace latseg;

namespace {

Vocabulary policy_vocab() {
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

// One sentence: a[2,5) b[5,9) .[9,11), 16 frames at 40 ms.
Script one_sentence_script(double sharpness) {
  Script s;
  s.sharpness = sharpness;
  s.seed = 21;
  s.frame_duration_ms = 40.0;
  s.total_frames = 16;
  s.sentences.push_back(ScriptSentence{{{0, 2, 5}, {1, 5, 9}, {3, 9, 11}}});
  return s;
}

PauseMask mask_all_speech(std::size_t frames, double frame_ms) {
  return PauseMask{std::vector<std::uint8_t>(frames, 1), frame_ms};
}

std::vector<std::size_t> frames_of(const std::vector<SegmentBoundary>& bs) {
  std::vector<std::size_t> out;
  for (const auto& b : bs) out.push_back(b.frame);
  return out;
}

}  // namespace

TEST_CASE("policy names round trip", "[policy]") {
  for (auto k : {PolicyKind::none, PolicyKind::fixed, PolicyKind::dac,
                 PolicyKind::sim, PolicyKind::greedy, PolicyKind::align})
    CHECK(policy_from_name(policy_name(k)) == k);
  CHECK_THROWS_AS(policy_from_name("bogus"), ConfigError);
}

TEST_CASE("policy config validation", "[policy]") {
  PolicyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  PolicyConfig bad = cfg;
  bad.min_len_ms = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.segment_len_ms = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.pause_min_ms = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.kind = PolicyKind::sim;
  bad.min_len_ms = 5000.0;
  bad.max_len_ms = 5000.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("fixed-length boundaries fall on exact multiples", "[policy]") {
  const auto bs = fixed_length_boundaries(100, 40.0, 1000.0);
  CHECK(frames_of(bs) == std::vector<std::size_t>{25, 50, 75});
  for (const auto& b : bs) {
    CHECK(b.trigger == Trigger::fixed);
    CHECK(b.source_ms == static_cast<double>(b.frame) * 40.0);
  }
  // A period at/after the stream end yields no boundary at all.
  CHECK(fixed_length_boundaries(100, 40.0, 4000.0).empty());
  CHECK(fixed_length_boundaries(100, 40.0, 8000.0).empty());
  CHECK_THROWS_AS(fixed_length_boundaries(100, 40.0, 0.0), ConfigError);
}

TEST_CASE("fixed-length boundaries stay strictly inside and unique", "[policy]") {
  for (double len : {333.0, 10.0, 95.0, 1999.0}) {
    const auto bs = fixed_length_boundaries(137, 40.0, len);
    std::size_t prev = 0;
    for (const auto& b : bs) {
      CHECK(b.frame > prev);
      CHECK(b.frame < 137);
      prev = b.frame;
    }
  }
}

TEST_CASE("dac hand case: one usable pause, one stuck span", "[policy]") {
  auto mask = mask_all_speech(50, 40.0);
  for (std::size_t f = 20; f < 25; ++f) mask.speech[f] = 0;
  const auto res = dac_boundaries(mask, 1000.0, 200.0);
  CHECK(frames_of(res.boundaries) == std::vector<std::size_t>{22});
  CHECK(res.unsplit_over_long == 1);  // [22, 50) has no qualifying pause
}

TEST_CASE("dac rejects empty masks and bad lengths", "[policy]") {
  CHECK_THROWS_AS(dac_boundaries(PauseMask{{}, 40.0}, 1000.0),
                  ValidationError);
  CHECK_THROWS_AS(dac_boundaries(mask_all_speech(10, 40.0), 0.0), ConfigError);
}

TEST_CASE("dac matches the exhaustive reference recursion", "[policy]") {
  Xoshiro256StarStar rng(515151);
  for (int rep = 0; rep < 300; ++rep) {
    const PauseMask mask = oracles::random_mask(rng, 20, 100);
    const double max_len_ms = 400.0 + 200.0 * static_cast<double>(rng.below(19));
    const double pause_min_ms = (rep % 3 == 0) ? 80.0
                               : (rep % 3 == 1) ? 200.0
                                                : 400.0;
    const auto got = dac_boundaries(mask, max_len_ms, pause_min_ms);
    const auto want = oracles::dac_reference(mask, max_len_ms, pause_min_ms);
    INFO("rep " << rep << " frames " << mask.frames() << " max " << max_len_ms
                << " pause " << pause_min_ms);
    CHECK(frames_of(got.boundaries) == want.cut_frames);
    CHECK(got.unsplit_over_long == want.unsplit_over_long);
    std::size_t prev = 0;
    for (const auto& b : got.boundaries) {
      CHECK(b.frame > prev);
      CHECK(b.frame < mask.frames());
      CHECK_FALSE(mask.is_speech(b.frame));  // cuts land inside pauses
      prev = b.frame;
    }
  }
}

TEST_CASE("sim waits for a full window", "[policy]") {
  const auto mask = mask_all_speech(100, 40.0);
  PolicyConfig cfg;
  cfg.kind = PolicyKind::sim;
  cfg.min_len_ms = 400.0;
  cfg.max_len_ms = 2000.0;
  CHECK_FALSE(sim_next_boundary(mask, 30, 0, cfg).has_value());
  CHECK_FALSE(sim_next_boundary(mask, 49, 0, cfg).has_value());
  CHECK_THROWS_AS(sim_next_boundary(mask, 101, 0, cfg), BoundsError);
}

TEST_CASE("sim cuts at the longest pause midpoint or forces max_len", "[policy]") {
  auto mask = mask_all_speech(100, 40.0);
  for (std::size_t f = 30; f < 40; ++f) mask.speech[f] = 0;
  PolicyConfig cfg;
  cfg.kind = PolicyKind::sim;
  cfg.min_len_ms = 400.0;   // 10 frames
  cfg.max_len_ms = 2000.0;  // 50 frames
  cfg.pause_min_ms = 200.0;
  const auto b = sim_next_boundary(mask, 50, 0, cfg);
  REQUIRE(b.has_value());
  CHECK(b->frame == 35);
  CHECK(b->trigger == Trigger::pause);
  // Second window [35+10, 35+50) holds no pause: forced cut at max_len.
  const auto b2 = sim_next_boundary(mask, 85, 35, cfg);
  REQUIRE(b2.has_value());
  CHECK(b2->frame == 85);
  CHECK(b2->trigger == Trigger::forced_max_len);
}

TEST_CASE("sim segments stay inside [min_len, max_len]", "[policy]") {
  Xoshiro256StarStar rng(626262);
  PolicyConfig cfg;
  cfg.kind = PolicyKind::sim;
  cfg.min_len_ms = 1000.0;
  cfg.max_len_ms = 4000.0;
  const std::size_t min_frames = 25, max_frames = 100;
  for (int rep = 0; rep < 200; ++rep) {
    const PauseMask mask = oracles::random_mask(rng, 30, 400);
    std::size_t last = 0;
    while (true) {
      const auto b = sim_next_boundary(mask, mask.frames(), last, cfg);
      if (!b) break;
      const std::size_t len = b->frame - last;
      INFO("rep " << rep << " boundary " << b->frame << " last " << last);
      CHECK(len >= min_frames);
      CHECK(len <= max_frames);
      last = b->frame;
    }
    CHECK(mask.frames() - last < max_frames);  // only the remainder runs short
  }
}

TEST_CASE("greedy cut lands one past the punctuation run", "[policy]") {
  const Vocabulary vocab = policy_vocab();
  PolicyConfig cfg;
  cfg.kind = PolicyKind::greedy;
  cfg.min_len_ms = 200.0;
  for (double sharpness : {1.0, 0.8}) {
    const auto lat = script_to_lattice(one_sentence_script(sharpness), vocab);
    const auto cut = greedy_punct_cut(lat, vocab, cfg);
    REQUIRE(cut.has_value());
    CHECK(*cut == 11);  // punctuation support is [9, 11)
  }
}

TEST_CASE("greedy defers while punctuation touches the horizon", "[policy]") {
  const Vocabulary vocab = policy_vocab();
  PolicyConfig cfg;
  cfg.kind = PolicyKind::greedy;
  cfg.min_len_ms = 200.0;
  const auto lat = script_to_lattice(one_sentence_script(1.0), vocab);
  // Horizon at frame 10: the run [9, 11) is still open.
  CHECK_FALSE(greedy_punct_cut(lattice_slice(lat, 0, 10), vocab, cfg));
  // Horizon before any punctuation at all.
  CHECK_FALSE(greedy_punct_cut(lattice_slice(lat, 0, 9), vocab, cfg));
}

TEST_CASE("greedy respects the minimum segment length", "[policy]") {
  const Vocabulary vocab = policy_vocab();
  PolicyConfig cfg;
  cfg.kind = PolicyKind::greedy;
  cfg.min_len_ms = 1000.0;  // 25 frames, but the cut would be at 11
  const auto lat = script_to_lattice(one_sentence_script(1.0), vocab);
  CHECK_FALSE(greedy_punct_cut(lat, vocab, cfg));
}

TEST_CASE("align cut aligns emitted punctuation to its source span", "[policy]") {
  const Vocabulary vocab = policy_vocab();
  PolicyConfig cfg;
  cfg.kind = PolicyKind::align;
  cfg.min_len_ms = 200.0;
  const auto lat = script_to_lattice(one_sentence_script(1.0), vocab);
  const auto cut = align_punct_cut({0, 1, 3}, lat, vocab, cfg);
  REQUIRE(cut.has_value());
  CHECK(cut->cut_frame == 11);
  CHECK(cut->punct_index == 2);
  // Tokens already emitted past the punctuation do not move the cut.
  const auto cut2 = align_punct_cut({0, 1, 3, 2}, lat, vocab, cfg);
  REQUIRE(cut2.has_value());
  CHECK(cut2->cut_frame == 11);
  CHECK(cut2->punct_index == 2);
}

TEST_CASE("align defers without punctuation or without alignment mass",
          "[policy]") {
  const Vocabulary vocab = policy_vocab();
  PolicyConfig cfg;
  cfg.kind = PolicyKind::align;
  cfg.min_len_ms = 200.0;
  const auto lat = script_to_lattice(one_sentence_script(1.0), vocab);
  CHECK_FALSE(align_punct_cut({0, 1}, lat, vocab, cfg));  // no punctuation
  CHECK_FALSE(align_punct_cut({}, lat, vocab, cfg));
  // Prefix b . has zero probability everywhere in a one-hot a b . lattice.
  CHECK_FALSE(align_punct_cut({1, 3}, lat, vocab, cfg));
  // Punctuation support still touches the horizon: defer.
  CHECK_FALSE(align_punct_cut({0, 1, 3}, lattice_slice(lat, 0, 10), vocab, cfg));
  // Minimum length gate.
  PolicyConfig tight = cfg;
  tight.min_len_ms = 1000.0;
  CHECK_FALSE(align_punct_cut({0, 1, 3}, lat, vocab, tight));
}
