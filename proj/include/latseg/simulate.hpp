// latseg/simulate.hpp
//
// Streaming simulation harness: tiles a stream into fixed-duration blocks,
// drives a DecodeSession with one of the segmentation policies, and emits a
// line-delimited JSON report (config line, one line per stream, summary
// line).  Reports are byte-deterministic for a fixed config and corpus;
// wall-clock timing is an opt-in extra field.  Evaluation resegments each
// stream's hypothesis against its references, then computes corpus BLEU,
// per-sentence lagging, and boundary precision/recall.

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

#ifndef LATSEG_SIMULATE_HPP_
#define LATSEG_SIMULATE_HPP_

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "latseg/backend.hpp"
#include "latseg/beam.hpp"
#include "latseg/corpus.hpp"
#include "latseg/error.hpp"
#include "latseg/evaluate.hpp"
#include "latseg/lattice_io.hpp"
#include "latseg/pause_mask.hpp"
#include "latseg/policy.hpp"
#include "latseg/script.hpp"
#include "latseg/vocabulary.hpp"

namespace latseg {

// --- run configuration -----------------------------------------------------

struct RunConfig {
  PolicyConfig policy;
  DecodeConfig decode;
  double block_ms = 1600.0;
  std::string backend = "scripted";  // "scripted" | "replay"
  std::uint64_t seed = 1;            // echoed into the report for provenance
  bool timing = false;               // add wall-clock fields (non-deterministic)

  void validate() const {
    policy.validate();
    decode.validate();
    if (!(block_ms > 0.0)) throw ConfigError("block_ms must be positive");
    if (backend != "scripted" && backend != "replay")
      throw ConfigError("backend must be 'scripted' or 'replay'");
  }
};

inline nlohmann::json run_config_to_json(const RunConfig& c) {
  return nlohmann::json{
      {"policy", policy_name(c.policy.kind)},
      {"min_len_ms", c.policy.min_len_ms},
      {"max_len_ms", c.policy.max_len_ms},
      {"segment_len_ms", c.policy.segment_len_ms},
      {"pause_min_ms", c.policy.pause_min_ms},
      {"beam", c.decode.beam_width},
      {"lambda", c.decode.lambda},
      {"block_ms", c.block_ms},
      {"backend", c.backend},
      {"seed", c.seed},
      {"timing", c.timing}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("policy"))
      c.policy.kind = policy_from_name(j.at("policy").get<std::string>());
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("min_len_ms", c.policy.min_len_ms);
    get("max_len_ms", c.policy.max_len_ms);
    get("segment_len_ms", c.policy.segment_len_ms);
    get("pause_min_ms", c.policy.pause_min_ms);
    get("beam", c.decode.beam_width);
    get("lambda", c.decode.lambda);
    get("block_ms", c.block_ms);
    get("backend", c.backend);
    get("seed", c.seed);
    get("timing", c.timing);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- block tiling ----------------------------------------------------------

inline std::vector<SpeechBlock> make_blocks(std::size_t total_frames,
                                            double frame_duration_ms,
                                            double block_ms) {
  if (!(block_ms > 0.0)) throw ConfigError("block_ms must be positive");
  const auto frames_per_block = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(block_ms / frame_duration_ms)));
  std::vector<SpeechBlock> out;
  std::size_t f = 0;
  std::size_t idx = 0;
  while (f < total_frames) {
    const std::size_t n = std::min(frames_per_block, total_frames - f);
    SpeechBlock b;
    b.block_index = idx++;
    b.feature_frames = n;
    b.source_start_ms = static_cast<double>(f) * frame_duration_ms;
    b.source_end_ms = static_cast<double>(f + n) * frame_duration_ms;
    out.push_back(b);
    f += n;
  }
  return out;
}

// --- per-stream simulation -------------------------------------------------

struct BoundaryEvent {
  SegmentBoundary boundary;
  int decided_block = -1;           // -1: offline or end-of-stream decision
  std::size_t horizon_frame = 0;    // frames fed when the decision was made
};

struct StreamResult {
  std::string id;
  double duration_ms = 0.0;
  std::size_t total_frames = 0;
  std::size_t blocks = 0;
  std::vector<SegmentRecord> segments;
  std::vector<BoundaryEvent> boundaries;  // interior cuts only
  BackendCounters counters;
  std::size_t dac_unsplit = 0;
  std::optional<double> wall_ms;
};

inline StreamResult simulate_stream(ModelBackend& backend,
                                    const Vocabulary& vocab,
                                    std::size_t total_frames,
                                    double frame_duration_ms,
                                    const PauseMask* mask,
                                    const RunConfig& cfg) {
  cfg.validate();
  const PolicyKind kind = cfg.policy.kind;
  if ((kind == PolicyKind::sim || kind == PolicyKind::dac) && mask == nullptr)
    throw ConfigError("policy requires a pause mask");
  if (mask && mask->frames() < total_frames)
    throw ValidationError("pause mask shorter than stream");

  const auto t0 = std::chrono::steady_clock::now();
  const auto blocks = make_blocks(total_frames, frame_duration_ms, cfg.block_ms);
  DecodeSession session(backend, cfg.decode);
  StreamResult res;
  res.total_frames = total_frames;
  res.duration_ms = static_cast<double>(total_frames) * frame_duration_ms;
  res.blocks = blocks.size();

  std::vector<SegmentBoundary> offline;  // fixed / dac cut plan
  if (kind == PolicyKind::fixed) {
    offline = fixed_length_boundaries(total_frames, frame_duration_ms,
                                      cfg.policy.segment_len_ms);
  } else if (kind == PolicyKind::dac) {
    DacResult d =
        dac_boundaries(*mask, cfg.policy.max_len_ms, cfg.policy.pause_min_ms);
    offline = std::move(d.boundaries);
    res.dac_unsplit = d.unsplit_over_long;
  }
  std::size_t offline_i = 0;
  std::size_t last_cut = 0;

  auto cut_at = [&](std::size_t global_frame, Trigger trig, int block) {
    const std::size_t local = global_frame - session.segment_start_frame();
    res.segments.push_back(session.cut(local, trig, block));
    res.boundaries.push_back(BoundaryEvent{
        make_boundary(global_frame, frame_duration_ms, trig), block,
        session.frame_horizon()});
    last_cut = global_frame;
  };
  auto align_pass = [&](int block) {
    while (true) {
      const auto ac = align_punct_cut(session.finalized_tokens(),
                                      session.segment_lattice(), vocab,
                                      cfg.policy);
      if (!ac) break;
      const std::size_t global = session.segment_start_frame() + ac->cut_frame;
      res.segments.push_back(session.cut_keep(ac->cut_frame, ac->punct_index + 1,
                                              Trigger::align_punct, block));
      res.boundaries.push_back(BoundaryEvent{
          make_boundary(global, frame_duration_ms, Trigger::align_punct), block,
          session.frame_horizon()});
      last_cut = global;
    }
  };

  for (const auto& b : blocks) {
    session.feed_block(b);
    const int bi = static_cast<int>(b.block_index);
    switch (kind) {
      case PolicyKind::none:
        session.step();
        break;
      case PolicyKind::greedy: {
        // Boundary test precedes this block's emissions (truncated decode).
        const auto cut =
            greedy_punct_cut(session.segment_lattice(), vocab, cfg.policy);
        if (cut)
          cut_at(session.segment_start_frame() + *cut, Trigger::greedy_punct, bi);
        session.step();
        break;
      }
      case PolicyKind::align:
        session.step();
        align_pass(bi);
        break;
      case PolicyKind::fixed:
      case PolicyKind::dac:
        session.step();
        while (offline_i < offline.size() &&
               offline[offline_i].frame <= session.frame_horizon()) {
          cut_at(offline[offline_i].frame, offline[offline_i].trigger,
                 kind == PolicyKind::dac ? -1 : bi);
          ++offline_i;
        }
        break;
      case PolicyKind::sim: {
        session.step();
        while (const auto bnd = sim_next_boundary(
                   *mask, session.frame_horizon(), last_cut, cfg.policy)) {
          cut_at(bnd->frame, bnd->trigger, bi);
        }
        break;
      }
    }
  }
  if (kind == PolicyKind::align) {
    session.flush_open();  // end of stream: finalize, then re-test alignment
    align_pass(blocks.empty() ? -1 : static_cast<int>(blocks.size()) - 1);
  }
  if (auto fin = session.finish()) res.segments.push_back(*fin);
  res.counters = backend.counters();
  if (cfg.timing) {
    const auto t1 = std::chrono::steady_clock::now();
    res.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return res;
}

// --- words with delays -----------------------------------------------------

struct TimedWord {
  std::string word;
  double delay_ms = 0.0;  // delay of the word's last token
};

inline std::vector<TimedWord> words_from_emissions(
    const std::vector<Emission>& emissions, const Vocabulary& vocab) {
  std::vector<TimedWord> out;
  const std::string& marker = vocab.subword_marker();
  for (const auto& e : emissions) {
    std::string piece = vocab.surface(e.token);
    const bool starts_word =
        !marker.empty() && piece.rfind(marker, 0) == 0;
    if (starts_word) piece = piece.substr(marker.size());
    if (starts_word || out.empty()) {
      out.push_back(TimedWord{std::move(piece), e.delay_ms});
    } else {
      out.back().word += piece;
      out.back().delay_ms = e.delay_ms;
    }
  }
  return out;
}

// --- report records --------------------------------------------------------

struct ReportSegment {
  std::size_t start_frame = 0, end_frame = 0;
  double start_ms = 0.0, end_ms = 0.0;
  std::optional<Trigger> trigger;
  int decided_block = -1;
  std::vector<int> tokens;
  std::vector<double> delays_ms;
  std::vector<TimedWord> words;
  std::string text;
};

struct ReportStream {
  std::string id;
  double duration_ms = 0.0;
  std::size_t total_frames = 0;
  std::size_t blocks = 0;
  std::uint64_t encode_calls = 0, decode_steps = 0;
  std::vector<ReportSegment> segments;
  std::vector<BoundaryEvent> boundaries;
  std::size_t dac_unsplit = 0;
  std::optional<double> wall_ms;
};

struct RunReport {
  nlohmann::json config;
  std::string corpus_dir;
  std::string manifest_hash;
  std::vector<ReportStream> streams;
};

inline ReportStream report_stream_from_result(const StreamResult& res,
                                              const Vocabulary& vocab) {
  ReportStream out;
  out.id = res.id;
  out.duration_ms = res.duration_ms;
  out.total_frames = res.total_frames;
  out.blocks = res.blocks;
  out.encode_calls = res.counters.encode_calls;
  out.decode_steps = res.counters.decode_steps;
  out.boundaries = res.boundaries;
  out.dac_unsplit = res.dac_unsplit;
  out.wall_ms = res.wall_ms;
  for (const auto& rec : res.segments) {
    ReportSegment seg;
    seg.start_frame = rec.start_frame;
    seg.end_frame = rec.end_frame;
    seg.start_ms = rec.start_ms;
    seg.end_ms = rec.end_ms;
    seg.trigger = rec.trigger;
    seg.decided_block = rec.decided_block;
    for (const auto& e : rec.emissions) {
      seg.tokens.push_back(e.token);
      seg.delays_ms.push_back(e.delay_ms);
    }
    seg.words = words_from_emissions(rec.emissions, vocab);
    seg.text = detokenize(seg.tokens, vocab);
    out.segments.push_back(std::move(seg));
  }
  return out;
}

inline nlohmann::json report_stream_to_json(const ReportStream& s) {
  nlohmann::json j;
  j["type"] = "stream";
  j["id"] = s.id;
  j["duration_ms"] = s.duration_ms;
  j["total_frames"] = s.total_frames;
  j["blocks"] = s.blocks;
  j["encode_calls"] = s.encode_calls;
  j["decode_steps"] = s.decode_steps;
  if (s.dac_unsplit > 0) j["dac_unsplit"] = s.dac_unsplit;
  if (s.wall_ms) j["wall_ms"] = *s.wall_ms;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : s.segments) {
    nlohmann::json e;
    e["start_frame"] = seg.start_frame;
    e["end_frame"] = seg.end_frame;
    e["start_ms"] = seg.start_ms;
    e["end_ms"] = seg.end_ms;
    e["trigger"] =
        seg.trigger ? nlohmann::json(trigger_name(*seg.trigger))
                    : nlohmann::json(nullptr);
    e["decided_block"] = seg.decided_block;
    e["tokens"] = seg.tokens;
    e["delays_ms"] = seg.delays_ms;
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : seg.words)
      words.push_back({{"w", w.word}, {"d", w.delay_ms}});
    e["words"] = std::move(words);
    e["text"] = seg.text;
    segs.push_back(std::move(e));
  }
  j["segments"] = std::move(segs);
  nlohmann::json bnds = nlohmann::json::array();
  for (const auto& b : s.boundaries) {
    bnds.push_back({{"frame", b.boundary.frame},
                    {"source_ms", b.boundary.source_ms},
                    {"trigger", trigger_name(b.boundary.trigger)},
                    {"decided_block", b.decided_block},
                    {"horizon_frame", b.horizon_frame}});
  }
  j["boundaries"] = std::move(bnds);
  return j;
}

inline ReportStream report_stream_from_json(const nlohmann::json& j) {
  ReportStream s;
  try {
    s.id = j.at("id").get<std::string>();
    s.duration_ms = j.at("duration_ms").get<double>();
    s.total_frames = j.at("total_frames").get<std::size_t>();
    s.blocks = j.at("blocks").get<std::size_t>();
    s.encode_calls = j.at("encode_calls").get<std::uint64_t>();
    s.decode_steps = j.at("decode_steps").get<std::uint64_t>();
    if (j.contains("dac_unsplit")) s.dac_unsplit = j.at("dac_unsplit").get<std::size_t>();
    if (j.contains("wall_ms")) s.wall_ms = j.at("wall_ms").get<double>();
    for (const auto& e : j.at("segments")) {
      ReportSegment seg;
      seg.start_frame = e.at("start_frame").get<std::size_t>();
      seg.end_frame = e.at("end_frame").get<std::size_t>();
      seg.start_ms = e.at("start_ms").get<double>();
      seg.end_ms = e.at("end_ms").get<double>();
      if (!e.at("trigger").is_null())
        seg.trigger = trigger_from_name(e.at("trigger").get<std::string>());
      seg.decided_block = e.at("decided_block").get<int>();
      seg.tokens = e.at("tokens").get<std::vector<int>>();
      seg.delays_ms = e.at("delays_ms").get<std::vector<double>>();
      for (const auto& w : e.at("words"))
        seg.words.push_back(
            TimedWord{w.at("w").get<std::string>(), w.at("d").get<double>()});
      seg.text = e.at("text").get<std::string>();
      s.segments.push_back(std::move(seg));
    }
    for (const auto& b : j.at("boundaries")) {
      BoundaryEvent ev;
      ev.boundary.frame = b.at("frame").get<std::size_t>();
      ev.boundary.source_ms = b.at("source_ms").get<double>();
      ev.boundary.trigger = trigger_from_name(b.at("trigger").get<std::string>());
      ev.decided_block = b.at("decided_block").get<int>();
      ev.horizon_frame = b.at("horizon_frame").get<std::size_t>();
      s.boundaries.push_back(ev);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("stream record: ") + e.what());
  }
  return s;
}

inline nlohmann::json report_summary_json(const RunReport& report) {
  std::size_t segments = 0, forced = 0;
  std::uint64_t enc = 0, dec = 0;
  double total_ms = 0.0;
  for (const auto& s : report.streams) {
    segments += s.segments.size();
    enc += s.encode_calls;
    dec += s.decode_steps;
    total_ms += s.duration_ms;
    for (const auto& b : s.boundaries)
      if (b.boundary.trigger == Trigger::forced_max_len) ++forced;
  }
  nlohmann::json j;
  j["type"] = "summary";
  j["streams"] = report.streams.size();
  j["segments"] = segments;
  j["forced_cuts"] = forced;
  j["encode_calls"] = enc;
  j["decode_steps"] = dec;
  j["total_duration_ms"] = total_ms;
  j["segments_per_minute"] =
      total_ms > 0.0 ? static_cast<double>(segments) / (total_ms / 60000.0)
                     : 0.0;
  return j;
}

inline void write_run_report(const std::string& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FixtureError("cannot write '" + path + "'");
  nlohmann::json head;
  head["type"] = "config";
  head["run"] = report.config;
  head["corpus"] = report.corpus_dir;
  head["manifest_hash"] = report.manifest_hash;
  out << head.dump() << "\n";
  for (const auto& s : report.streams)
    out << report_stream_to_json(s).dump() << "\n";
  out << report_summary_json(report).dump() << "\n";
  if (!out) throw FixtureError("write failed for '" + path + "'");
}

inline RunReport read_run_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot open '" + path + "'");
  RunReport report;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("'" + path + "' line " + std::to_string(lineno) + ": " +
                        e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "config") {
      report.config = j.value("run", nlohmann::json::object());
      report.corpus_dir = j.value("corpus", "");
      report.manifest_hash = j.value("manifest_hash", "");
    } else if (type == "stream") {
      report.streams.push_back(report_stream_from_json(j));
    } else if (type == "summary") {
      // recomputed on write; nothing to retain
    } else {
      throw FormatError("'" + path + "' line " + std::to_string(lineno) +
                        ": unknown record type '" + type + "'");
    }
  }
  return report;
}

// --- whole-corpus simulation ----------------------------------------------

inline StreamResult simulate_fixture(const StreamFixture& fixture,
                                     const RunConfig& cfg,
                                     Vocabulary* vocab_out) {
  std::unique_ptr<ModelBackend> backend;
  Vocabulary vocab;
  std::size_t total_frames = 0;
  double frame_ms = 0.0;
  if (cfg.backend == "scripted") {
    auto [script, v] = load_script_file(fixture.script_path);
    vocab = std::move(v);
    total_frames = script.total_frames;
    frame_ms = script.frame_duration_ms;
    backend = std::make_unique<ScriptedBackend>(script, vocab);
  } else {
    auto [lattice, v] = load_lattice_file(fixture.lattice_path);
    vocab = std::move(v);
    total_frames = lattice.frames();
    frame_ms = lattice.frame_duration_ms();
    backend = std::make_unique<LatticeReplayBackend>(std::move(lattice));
  }
  std::optional<PauseMask> mask;
  if (cfg.policy.kind == PolicyKind::sim || cfg.policy.kind == PolicyKind::dac)
    mask = load_pause_mask_tsv(fixture.mask_path, frame_ms);
  StreamResult res = simulate_stream(*backend, vocab, total_frames, frame_ms,
                                     mask ? &*mask : nullptr, cfg);
  res.id = fixture.id;
  if (vocab_out) *vocab_out = std::move(vocab);
  return res;
}

inline RunReport run_simulation(const RunConfig& cfg,
                                const CorpusOnDisk& corpus) {
  cfg.validate();
  RunReport report;
  report.config = run_config_to_json(cfg);
  report.corpus_dir = corpus.root;
  report.manifest_hash = fnv1a64_file_hex(corpus.root + "/manifest.json");
  for (const auto& fixture : corpus.streams) {
    Vocabulary vocab;
    const StreamResult res = simulate_fixture(fixture, cfg, &vocab);
    report.streams.push_back(report_stream_from_result(res, vocab));
  }
  return report;
}

// --- evaluation of a run ---------------------------------------------------

struct EvalOptions {
  TextTokenizer tokenizer = TextTokenizer::thirteen_a;
  std::size_t boundary_tolerance_frames = 2;
};

// Resegments every stream's hypothesis word stream against its references
// and aggregates corpus BLEU, mean per-sentence lagging (delays measured
// from each scripted sentence start), and boundary precision/recall.
inline nlohmann::json evaluate_run(const RunReport& report,
                                   const CorpusOnDisk& corpus,
                                   const EvalOptions& opts = {}) {
  std::map<std::string, const StreamFixture*> by_id;
  for (const auto& f : corpus.streams) by_id[f.id] = &f;

  std::vector<std::string> all_hyp, all_ref;
  double laal_sum = 0.0;
  std::size_t laal_n = 0, laal_undefined = 0;
  BoundaryPrf agg;
  std::size_t forced = 0, segments = 0, resegment_distance = 0;
  double total_ms = 0.0;
  nlohmann::json per_stream = nlohmann::json::array();

  for (const auto& s : report.streams) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end())
      throw EvalError("stream '" + s.id + "' not present in corpus");
    const GroundTruth truth = load_truth_file(it->second->truth_path);

    std::vector<TimedWord> hyp;
    for (const auto& seg : s.segments)
      hyp.insert(hyp.end(), seg.words.begin(), seg.words.end());
    std::vector<std::string> hyp_words;
    for (const auto& w : hyp) hyp_words.push_back(w.word);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : truth.reference_sentences)
      refs.push_back(split_whitespace(r));

    const Resegmented reseg = mwer_resegment(hyp_words, refs);
    resegment_distance += reseg.total_distance;

    double stream_laal_sum = 0.0;
    std::size_t stream_laal_n = 0, stream_laal_undef = 0;
    std::size_t word_cursor = 0;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const auto& piece = reseg.hyp_segments[k];
      std::string joined;
      for (std::size_t w = 0; w < piece.size(); ++w) {
        if (w) joined += ' ';
        joined += piece[w];
      }
      all_hyp.push_back(joined);
      all_ref.push_back(truth.reference_sentences[k]);

      const auto [span_start, span_end] = truth.sentence_spans_ms[k];
      if (piece.empty() || refs[k].empty()) {
        ++stream_laal_undef;
      } else {
        std::vector<double> delays;
        for (std::size_t w = 0; w < piece.size(); ++w)
          delays.push_back(hyp[word_cursor + w].delay_ms - span_start);
        const double laal =
            laal_ms(delays, span_end - span_start, refs[k].size());
        stream_laal_sum += laal;
        ++stream_laal_n;
      }
      word_cursor += piece.size();
    }
    laal_sum += stream_laal_sum;
    laal_n += stream_laal_n;
    laal_undefined += stream_laal_undef;

    std::vector<std::size_t> predicted;
    for (const auto& b : s.boundaries) {
      predicted.push_back(b.boundary.frame);
      if (b.boundary.trigger == Trigger::forced_max_len) ++forced;
    }
    const BoundaryPrf prf = boundary_prf(predicted, truth.boundary_frames,
                                         opts.boundary_tolerance_frames);
    agg.matched += prf.matched;
    agg.predicted += prf.predicted;
    agg.truth += prf.truth;
    segments += s.segments.size();
    total_ms += s.duration_ms;

    nlohmann::json e;
    e["id"] = s.id;
    e["resegment_distance"] = reseg.total_distance;
    e["laal_sentences"] = stream_laal_n;
    e["laal_undefined"] = stream_laal_undef;
    e["mean_laal_ms"] = stream_laal_n
                            ? nlohmann::json(stream_laal_sum /
                                             static_cast<double>(stream_laal_n))
                            : nlohmann::json(nullptr);
    e["boundary"] = {{"precision", prf.precision},
                     {"recall", prf.recall},
                     {"f1", prf.f1},
                     {"matched", prf.matched},
                     {"predicted", prf.predicted},
                     {"truth", prf.truth}};
    per_stream.push_back(std::move(e));
  }

  const BleuStats bleu = corpus_bleu(all_hyp, all_ref, opts.tokenizer);
  if (agg.predicted == 0 && agg.truth == 0) {
    agg.precision = agg.recall = agg.f1 = 1.0;
  } else {
    agg.precision = agg.predicted
                        ? static_cast<double>(agg.matched) /
                              static_cast<double>(agg.predicted)
                        : 0.0;
    agg.recall = agg.truth ? static_cast<double>(agg.matched) /
                                 static_cast<double>(agg.truth)
                           : 0.0;
    agg.f1 = (agg.precision + agg.recall) > 0.0
                 ? 2.0 * agg.precision * agg.recall / (agg.precision + agg.recall)
                 : 0.0;
  }

  nlohmann::json doc;
  doc["type"] = "eval";
  doc["tokenizer"] = tokenizer_name(opts.tokenizer);
  doc["boundary_tolerance_frames"] = opts.boundary_tolerance_frames;
  doc["bleu"] = bleu.score;
  doc["bleu_precisions"] = bleu.precisions;
  doc["brevity_penalty"] = bleu.brevity_penalty;
  doc["hyp_len"] = bleu.hyp_len;
  doc["ref_len"] = bleu.ref_len;
  doc["mean_laal_ms"] =
      laal_n ? nlohmann::json(laal_sum / static_cast<double>(laal_n))
             : nlohmann::json(nullptr);
  doc["laal_sentences"] = laal_n;
  doc["laal_undefined"] = laal_undefined;
  doc["resegment_distance"] = resegment_distance;
  doc["boundary"] = {{"precision", agg.precision}, {"recall", agg.recall},
                     {"f1", agg.f1},               {"matched", agg.matched},
                     {"predicted", agg.predicted}, {"truth", agg.truth}};
  doc["segments"] = segments;
  doc["forced_cuts"] = forced;
  doc["segments_per_minute"] =
      total_ms > 0.0 ? static_cast<double>(segments) / (total_ms / 60000.0)
                     : 0.0;
  doc["streams"] = std::move(per_stream);
  return doc;
}

// --- parameter sweeps ------------------------------------------------------

inline void apply_sweep_override(RunConfig* cfg, const std::string& param,
                                 double value) {
  if (param == "min_len_ms")
    cfg->policy.min_len_ms = value;
  else if (param == "max_len_ms")
    cfg->policy.max_len_ms = value;
  else if (param == "segment_len_ms")
    cfg->policy.segment_len_ms = value;
  else if (param == "pause_min_ms")
    cfg->policy.pause_min_ms = value;
  else if (param == "lambda")
    cfg->decode.lambda = value;
  else if (param == "beam")
    cfg->decode.beam_width = static_cast<int>(value);
  else if (param == "block_ms")
    cfg->block_ms = value;
  else
    throw ConfigError("unknown sweep parameter '" + param + "'");
}

// One simulate+evaluate per grid value; returns CSV rows sorted by value.
inline std::string run_sweep(const RunConfig& base, const CorpusOnDisk& corpus,
                             const std::string& param,
                             std::vector<double> values,
                             const EvalOptions& opts = {}) {
  if (values.empty()) throw ConfigError("sweep: empty value grid");
  std::sort(values.begin(), values.end());
  std::string csv =
      "param,value,policy,bleu,mean_laal_ms,boundary_f1,forced_cuts,segments\n";
  char buf[256];
  for (const double v : values) {
    RunConfig cfg = base;
    apply_sweep_override(&cfg, param, v);
    const RunReport report = run_simulation(cfg, corpus);
    const nlohmann::json eval = evaluate_run(report, corpus, opts);
    const double laal = eval.at("mean_laal_ms").is_null()
                            ? -1.0
                            : eval.at("mean_laal_ms").get<double>();
    std::snprintf(buf, sizeof(buf), "%s,%g,%s,%.6f,%.6f,%.6f,%zu,%zu\n",
                  param.c_str(), v, policy_name(cfg.policy.kind),
                  eval.at("bleu").get<double>(), laal,
                  eval.at("boundary").at("f1").get<double>(),
                  eval.at("forced_cuts").get<std::size_t>(),
                  eval.at("segments").get<std::size_t>());
    csv += buf;
  }
  return csv;
}

}  // namespace latseg

#endif  // LATSEG_SIMULATE_HPP_
