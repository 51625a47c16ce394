// tools/latseg.cpp
//
// Command-line harness:
//   latseg gen-synth  --out DIR [corpus knobs]        write synthetic fixtures
//   latseg simulate   --corpus DIR --out DIR [knobs]  run a policy, write report
//   latseg evaluate   --report FILE --corpus DIR      score a report
//   latseg sweep      --corpus DIR --param P --values episode grid, write CSV
//
// Exit codes: 0 success, 2 configuration error, 3 fixture error,
// 4 evaluation error.

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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latseg/latseg.hpp"

namespace {

latseg::RunConfig load_base_config(const std::string& config_path) {
  latseg::RunConfig cfg;
  if (config_path.empty()) return cfg;
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw latseg::ConfigError("cannot open config '" + config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw latseg::ConfigError("config '" + config_path + "': " + e.what());
  }
  return latseg::run_config_from_json(j);
}

struct RunFlags {
  std::string config_path, policy, backend;
  int beam = 0;
  double lambda = 0.0, block_ms = 0.0, min_len_ms = 0.0, max_len_ms = 0.0,
         segment_len_ms = 0.0, pause_min_ms = 0.0;
  std::uint64_t seed = 0;
  bool timing = false;
};

// Registers the shared simulate/sweep flags on `app`; returns a builder that
// folds the config file and any explicitly set flags into a RunConfig.
void add_run_flags(CLI::App* app, RunFlags* f) {
  app->add_option("--config", f->config_path, "JSON run config (flags override)");
  app->add_option("--policy", f->policy,
                  "Segmentation policy: none|fixed|dac|sim|greedy|align");
  app->add_option("--beam", f->beam, "Beam width");
  app->add_option("--lambda", f->lambda,
                  "CTC weight in the joint score, in [0,1]");
  app->add_option("--block-ms", f->block_ms, "Streaming block duration (ms)");
  app->add_option("--min-len-ms", f->min_len_ms, "Minimum segment length (ms)");
  app->add_option("--max-len-ms", f->max_len_ms, "Maximum segment length (ms)");
  app->add_option("--segment-len-ms", f->segment_len_ms,
                  "Fixed-length segment period (ms)");
  app->add_option("--pause-min-ms", f->pause_min_ms,
                  "Minimum qualifying pause (ms)");
  app->add_option("--backend", f->backend,
                  "Model backend: scripted|replay");
  app->add_option("--seed", f->seed, "Seed echoed into the report");
  app->add_flag("--timing", f->timing,
                "Record wall-clock times (breaks report determinism)");
}

latseg::RunConfig build_run_config(const CLI::App& app, const RunFlags& f) {
  latseg::RunConfig cfg = load_base_config(f.config_path);
  if (app.count("--policy")) cfg.policy.kind = latseg::policy_from_name(f.policy);
  if (app.count("--beam")) cfg.decode.beam_width = f.beam;
  if (app.count("--lambda")) cfg.decode.lambda = f.lambda;
  if (app.count("--block-ms")) cfg.block_ms = f.block_ms;
  if (app.count("--min-len-ms")) cfg.policy.min_len_ms = f.min_len_ms;
  if (app.count("--max-len-ms")) cfg.policy.max_len_ms = f.max_len_ms;
  if (app.count("--segment-len-ms")) cfg.policy.segment_len_ms = f.segment_len_ms;
  if (app.count("--pause-min-ms")) cfg.policy.pause_min_ms = f.pause_min_ms;
  if (app.count("--backend")) cfg.backend = f.backend;
  if (app.count("--seed")) cfg.seed = f.seed;
  if (app.count("--timing")) cfg.timing = f.timing;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw latseg::ConfigError("bad sweep value '" + item + "'");
    }
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw latseg::FixtureError("cannot create '" + dir + "': " + ec.message());
}

int run(int argc, char** argv) {
  CLI::App app{"Streaming segmentation harness over CTC latent alignments"};
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic corpus");
  std::string gen_out;
  latseg::CorpusSpec spec;
  gen->add_option("--out", gen_out, "Output corpus directory")->required();
  gen->add_option("--streams", spec.streams, "Stream count");
  gen->add_option("--min-sentences", spec.min_sentences, "Sentences per stream, min");
  gen->add_option("--max-sentences", spec.max_sentences, "Sentences per stream, max");
  gen->add_option("--sharpness", spec.sharpness, "Peak probability mass in (0,1]");
  gen->add_option("--misaligned-frac", spec.misaligned_frac,
                  "Fraction of sentences with a mid-sentence pause");
  gen->add_option("--words", spec.words, "Word-token vocabulary size");
  gen->add_option("--frame-ms", spec.frame_duration_ms, "Frame duration (ms)");
  gen->add_option("--seed", spec.seed, "Corpus seed");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a segmentation policy");
  std::string sim_corpus, sim_out;
  RunFlags sim_flags;
  sim->add_option("--corpus", sim_corpus, "Corpus directory")->required();
  sim->add_option("--out", sim_out, "Output directory for report.jsonl")->required();
  add_run_flags(sim, &sim_flags);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a simulation report");
  std::string ev_report, ev_corpus, ev_out, ev_tok = "13a";
  std::size_t ev_tol = 2;
  ev->add_option("--report", ev_report, "report.jsonl from simulate")->required();
  ev->add_option("--corpus", ev_corpus, "Corpus directory")->required();
  ev->add_option("--out", ev_out, "Write eval JSON here (default: stdout)");
  ev->add_option("--tokenizer", ev_tok, "BLEU tokenizer: 13a|char");
  ev->add_option("--boundary-tol", ev_tol, "Boundary match tolerance (frames)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Grid-sweep one parameter");
  std::string sw_corpus, sw_out, sw_param, sw_values, sw_tok = "13a";
  std::size_t sw_tol = 2;
  RunFlags sw_flags;
  sw->add_option("--corpus", sw_corpus, "Corpus directory")->required();
  sw->add_option("--out", sw_out, "Output CSV path")->required();
  sw->add_option("--param", sw_param,
                 "Swept parameter: min_len_ms|max_len_ms|segment_len_ms|"
                 "pause_min_ms|lambda|beam|block_ms")
      ->required();
  sw->add_option("--values", sw_values, "Comma-separated grid values")->required();
  sw->add_option("--tokenizer", sw_tok, "BLEU tokenizer: 13a|char");
  sw->add_option("--boundary-tol", sw_tol, "Boundary match tolerance (frames)");
  add_run_flags(sw, &sw_flags);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    spec.validate();
    ensure_dir(gen_out);
    const nlohmann::json manifest = latseg::write_corpus(spec, gen_out);
    std::cout << "wrote " << manifest.at("streams").size() << " streams to "
              << gen_out << "\n";
    return 0;
  }
  if (sim->parsed()) {
    const latseg::RunConfig cfg = build_run_config(*sim, sim_flags);
    const latseg::CorpusOnDisk corpus = latseg::load_corpus(sim_corpus);
    latseg::RunReport report = latseg::run_simulation(cfg, corpus);
    ensure_dir(sim_out);
    const std::string path = sim_out + "/report.jsonl";
    latseg::write_run_report(path, report);
    std::cout << "wrote " << path << " (" << report.streams.size()
              << " streams)\n";
    return 0;
  }
  if (ev->parsed()) {
    latseg::EvalOptions opts;
    opts.tokenizer = latseg::tokenizer_from_name(ev_tok);
    opts.boundary_tolerance_frames = ev_tol;
    const latseg::RunReport report = latseg::read_run_report(ev_report);
    const latseg::CorpusOnDisk corpus = latseg::load_corpus(ev_corpus);
    const nlohmann::json doc = latseg::evaluate_run(report, corpus, opts);
    if (ev_out.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::ofstream out(ev_out, std::ios::binary);
      if (!out) throw latseg::FixtureError("cannot write '" + ev_out + "'");
      out << doc.dump(2) << "\n";
      std::cout << "wrote " << ev_out << "\n";
    }
    return 0;
  }
  if (sw->parsed()) {
    const latseg::RunConfig base = build_run_config(*sw, sw_flags);
    latseg::EvalOptions opts;
    opts.tokenizer = latseg::tokenizer_from_name(sw_tok);
    opts.boundary_tolerance_frames = sw_tol;
    const latseg::CorpusOnDisk corpus = latseg::load_corpus(sw_corpus);
    const std::string csv = latseg::run_sweep(base, corpus, sw_param,
                                              parse_value_list(sw_values), opts);
    std::ofstream out(sw_out, std::ios::binary);
    if (!out) throw latseg::FixtureError("cannot write '" + sw_out + "'");
    out << csv;
    std::cout << "wrote " << sw_out << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const latseg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const latseg::EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 4;
  } catch (const latseg::FixtureError& e) {
    std::cerr << "fixture error: " << e.what() << "\n";
    return 3;
  } catch (const latseg::FormatError& e) {
    std::cerr << "fixture error: " << e.what() << "\n";
    return 3;
  } catch (const latseg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
