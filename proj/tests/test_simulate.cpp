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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "latseg/corpus.hpp"
#include "latseg/error.hpp"
#include "latseg/script.hpp"
#include "latseg/simulate.hpp"

using namespace latseg;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "latseg_sim_%d_%p", ::getpid(),
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

CorpusSpec tiny_spec(std::uint64_t seed) {
  CorpusSpec spec;
  spec.streams = 2;
  spec.min_sentences = 2;
  spec.max_sentences = 3;
  spec.min_sentence_frames = 50;
  spec.max_sentence_frames = 120;
  spec.seed = seed;
  return spec;
}

RunConfig base_config(PolicyKind kind) {
  RunConfig cfg;
  cfg.policy.kind = kind;
  cfg.policy.min_len_ms = 1000.0;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("block tiling covers the stream without gaps", "[simulate]") {
  const auto blocks = make_blocks(28, 40.0, 400.0);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].feature_frames == 10);
  CHECK(blocks[1].feature_frames == 10);
  CHECK(blocks[2].feature_frames == 8);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(blocks[i].block_index == i);
    CHECK_NOTHROW(blocks[i].validate(40.0));
    if (i) CHECK(blocks[i].source_start_ms == blocks[i - 1].source_end_ms);
  }
  CHECK(blocks.back().source_end_ms == 28 * 40.0);
  // Sub-frame block sizes degrade to one frame per block.
  CHECK(make_blocks(5, 40.0, 10.0).size() == 5);
  CHECK(make_blocks(0, 40.0, 400.0).empty());
  CHECK_THROWS_AS(make_blocks(5, 40.0, 0.0), ConfigError);
}

TEST_CASE("run config json round trips", "[simulate]") {
  RunConfig cfg = base_config(PolicyKind::sim);
  cfg.policy.max_len_ms = 7000.0;
  cfg.decode.lambda = 0.5;
  cfg.block_ms = 800.0;
  cfg.seed = 42;
  const auto j = run_config_to_json(cfg);
  const RunConfig back = run_config_from_json(j);
  CHECK(run_config_to_json(back).dump() == j.dump());
  CHECK_THROWS_AS(run_config_from_json({{"policy", "bogus"}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json({{"backend", "oracle"}}), ConfigError);
}

TEST_CASE("policy none yields one whole-stream segment", "[simulate]") {
  const CorpusSpec spec = tiny_spec(7001);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script script = generate_script(spec, vocab, 0);
  ScriptedBackend backend(script, vocab);
  const auto res =
      simulate_stream(backend, vocab, script.total_frames,
                      script.frame_duration_ms, nullptr, base_config(PolicyKind::none));
  CHECK(res.boundaries.empty());
  REQUIRE(res.segments.size() == 1);
  CHECK(res.segments[0].start_frame == 0);
  CHECK(res.segments[0].end_frame == script.total_frames);
  std::vector<int> tokens;
  for (const auto& e : res.segments[0].emissions) tokens.push_back(e.token);
  CHECK(tokens == script.flat_tokens());
}

TEST_CASE("greedy and align recover scripted sentence boundaries exactly",
          "[simulate]") {
  const CorpusSpec spec = tiny_spec(7002);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  for (auto kind : {PolicyKind::greedy, PolicyKind::align}) {
    const Script script = generate_script(spec, vocab, 1);
    const auto truth = ground_truth_of(script, vocab);
    ScriptedBackend backend(script, vocab);
    const auto res =
        simulate_stream(backend, vocab, script.total_frames,
                        script.frame_duration_ms, nullptr, base_config(kind));
    const std::size_t K = truth.boundary_frames.size();
    REQUIRE(res.boundaries.size() == K);
    for (std::size_t k = 0; k < K; ++k)
      CHECK(res.boundaries[k].boundary.frame == truth.boundary_frames[k]);
    REQUIRE(res.segments.size() == K + 1);  // trailing silence-only segment
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<int> tokens;
      for (const auto& e : res.segments[k].emissions) tokens.push_back(e.token);
      CHECK(detokenize(tokens, vocab) == truth.reference_sentences[k]);
    }
    CHECK(res.segments.back().emissions.empty());
  }
}

TEST_CASE("boundary events stay ordered with bounded horizons", "[simulate]") {
  const CorpusSpec spec = tiny_spec(7003);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script script = generate_script(spec, vocab, 0);
  const PauseMask mask = mask_from_script(script);
  for (auto kind : {PolicyKind::greedy, PolicyKind::align, PolicyKind::fixed,
                    PolicyKind::sim, PolicyKind::dac}) {
    RunConfig cfg = base_config(kind);
    cfg.policy.segment_len_ms = 4000.0;
    cfg.policy.max_len_ms = 6000.0;
    ScriptedBackend backend(script, vocab);
    const auto res = simulate_stream(backend, vocab, script.total_frames,
                                     script.frame_duration_ms, &mask, cfg);
    std::size_t prev = 0;
    for (const auto& b : res.boundaries) {
      CHECK(b.boundary.frame > prev);
      CHECK(b.boundary.frame <= script.total_frames);
      CHECK(b.horizon_frame >= b.boundary.frame);  // never cuts beyond sight
      prev = b.boundary.frame;
    }
    // Segments tile the stream.
    REQUIRE_FALSE(res.segments.empty());
    CHECK(res.segments.front().start_frame == 0);
    CHECK(res.segments.back().end_frame == script.total_frames);
    for (std::size_t i = 1; i < res.segments.size(); ++i)
      CHECK(res.segments[i].start_frame == res.segments[i - 1].end_frame);
  }
}

TEST_CASE("pause policies insist on a mask", "[simulate]") {
  const CorpusSpec spec = tiny_spec(7004);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script script = generate_script(spec, vocab, 0);
  ScriptedBackend backend(script, vocab);
  CHECK_THROWS_AS(
      simulate_stream(backend, vocab, script.total_frames,
                      script.frame_duration_ms, nullptr, base_config(PolicyKind::sim)),
      ConfigError);
  CHECK_THROWS_AS(
      simulate_stream(backend, vocab, script.total_frames,
                      script.frame_duration_ms, nullptr, base_config(PolicyKind::dac)),
      ConfigError);
}

TEST_CASE("dac cuts follow the offline plan with offline attribution",
          "[simulate]") {
  const CorpusSpec spec = tiny_spec(7005);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script script = generate_script(spec, vocab, 0);
  const PauseMask mask = mask_from_script(script);
  RunConfig cfg = base_config(PolicyKind::dac);
  cfg.policy.max_len_ms = 5000.0;
  const auto plan = dac_boundaries(mask, cfg.policy.max_len_ms,
                                   cfg.policy.pause_min_ms);
  ScriptedBackend backend(script, vocab);
  const auto res = simulate_stream(backend, vocab, script.total_frames,
                                   script.frame_duration_ms, &mask, cfg);
  REQUIRE(res.boundaries.size() == plan.boundaries.size());
  for (std::size_t i = 0; i < plan.boundaries.size(); ++i) {
    CHECK(res.boundaries[i].boundary.frame == plan.boundaries[i].frame);
    CHECK(res.boundaries[i].decided_block == -1);
  }
  CHECK(res.dac_unsplit == plan.unsplit_over_long);
}

TEST_CASE("greedy segmentation costs no extra model calls", "[simulate]") {
  const CorpusSpec spec = tiny_spec(7006);
  const Vocabulary vocab = make_corpus_vocabulary(spec);
  const Script script = generate_script(spec, vocab, 0);
  BackendCounters none_c, greedy_c;
  {
    ScriptedBackend backend(script, vocab);
    simulate_stream(backend, vocab, script.total_frames,
                    script.frame_duration_ms, nullptr, base_config(PolicyKind::none));
    none_c = backend.counters();
  }
  {
    ScriptedBackend backend(script, vocab);
    simulate_stream(backend, vocab, script.total_frames,
                    script.frame_duration_ms, nullptr, base_config(PolicyKind::greedy));
    greedy_c = backend.counters();
  }
  CHECK(greedy_c.encode_calls == none_c.encode_calls);
  CHECK(greedy_c.decode_steps == none_c.decode_steps);
}

TEST_CASE("emissions collapse into marker-joined words", "[simulate]") {
  const Vocabulary vocab = make_vocabulary(
      {"\xE2\x96\x81"
       "a",
       "\xE2\x96\x81"
       "b",
       "\xE2\x96\x81"
       "c",
       ".", "!", "?"},
      "<blk>");
  const std::vector<Emission> emissions = {
      {0, 100.0}, {1, 200.0}, {3, 300.0}, {2, 400.0}};
  const auto words = words_from_emissions(emissions, vocab);
  REQUIRE(words.size() == 3);
  CHECK(words[0].word == "a");
  CHECK(words[0].delay_ms == 100.0);
  CHECK(words[1].word == "b.");  // punctuation joins its word
  CHECK(words[1].delay_ms == 300.0);
  CHECK(words[2].word == "c");
  CHECK(words_from_emissions({}, vocab).empty());
}

TEST_CASE("run reports round trip and rewrite byte-identically", "[simulate]") {
  TempDir dir;
  const CorpusSpec spec = tiny_spec(7007);
  write_corpus(spec, dir.file("corpus"));
  const auto corpus = load_corpus(dir.file("corpus"));
  const RunConfig cfg = base_config(PolicyKind::greedy);
  const RunReport report = run_simulation(cfg, corpus);
  REQUIRE(report.streams.size() == 2);
  CHECK(report.config.at("policy") == "greedy");

  const std::string p1 = dir.file("run1.jsonl"), p2 = dir.file("run2.jsonl");
  write_run_report(p1, report);
  const RunReport loaded = read_run_report(p1);
  CHECK(loaded.manifest_hash == report.manifest_hash);
  REQUIRE(loaded.streams.size() == report.streams.size());
  write_run_report(p2, loaded);
  CHECK(slurp(p1) == slurp(p2));
  CHECK_THROWS_AS(read_run_report(dir.file("absent.jsonl")), FixtureError);

  std::ofstream bad(dir.file("bad.jsonl"));
  bad << "{\"type\": \"mystery\"}\n";
  bad.close();
  CHECK_THROWS_AS(read_run_report(dir.file("bad.jsonl")), FormatError);
}

TEST_CASE("evaluating a perfect greedy run reports perfect scores",
          "[simulate]") {
  TempDir dir;
  const CorpusSpec spec = tiny_spec(7008);
  write_corpus(spec, dir.file("corpus"));
  const auto corpus = load_corpus(dir.file("corpus"));
  const RunReport report =
      run_simulation(base_config(PolicyKind::greedy), corpus);
  const auto eval = evaluate_run(report, corpus);
  CHECK(eval.at("bleu").get<double>() ==
        Catch::Approx(100.0).margin(1e-9));
  CHECK(eval.at("resegment_distance").get<std::size_t>() == 0);
  CHECK(eval.at("boundary").at("f1").get<double>() == 1.0);
  CHECK(eval.at("laal_undefined").get<std::size_t>() == 0);
  CHECK(eval.at("laal_sentences").get<std::size_t>() ==
        eval.at("boundary").at("truth").get<std::size_t>());
  CHECK(eval.at("mean_laal_ms").get<double>() > 0.0);
  CHECK(eval.at("streams").size() == 2);
}

TEST_CASE("sweeps emit one csv row per grid value", "[simulate]") {
  TempDir dir;
  const CorpusSpec spec = tiny_spec(7009);
  write_corpus(spec, dir.file("corpus"));
  const auto corpus = load_corpus(dir.file("corpus"));
  const RunConfig cfg = base_config(PolicyKind::greedy);
  const std::string csv =
      run_sweep(cfg, corpus, "min_len_ms", {2000.0, 500.0});
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("param,value", 0) == 0);
  CHECK(rows[1].rfind("min_len_ms,500,greedy,", 0) == 0);  // sorted ascending
  CHECK(rows[2].rfind("min_len_ms,2000,greedy,", 0) == 0);
  CHECK_THROWS_AS(run_sweep(cfg, corpus, "mystery", {1.0}), ConfigError);
  CHECK_THROWS_AS(run_sweep(cfg, corpus, "min_len_ms", {}), ConfigError);
}
