// Copyright 2026 The s2stsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: latency simulations, sweeps and corpus tooling.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "s2st/dataprep.hpp"
#include "s2st/emission.hpp"
#include "s2st/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct CommonOptions {
  std::vector<std::string> traces;
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string input_end;
  std::vector<std::string> strategies;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--trace", o.traces, "Token trace file(s)");
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--input-end", o.input_end, "source | last-token")
      ->check(CLI::IsMember({"source", "last-token"}));
  cmd->add_option("--strategies", o.strategies,
                  "Lookahead strategies, e.g. gt:1,none,pseudo:1")
      ->delimiter(',');
  cmd->add_option("--threads", o.threads, "Worker threads");
}

s2st::ExperimentConfig build_config(const CommonOptions& o) {
  s2st::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = s2st::load_config(o.config);
  if (!o.traces.empty()) cfg.traces.assign(o.traces.begin(), o.traces.end());
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.input_end.empty()) cfg.input_end = s2st::parse_input_end(o.input_end);
  if (o.threads) cfg.threads = *o.threads;
  if (!o.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : o.strategies) cfg.strategies.push_back(s2st::parse_strategy(s));
  }
  if (cfg.strategies.empty()) {
    for (const char* s : {"gt:1", "none", "pseudo:1"}) {
      cfg.strategies.push_back(s2st::parse_strategy(s));
    }
  }
  if (cfg.traces.empty()) throw s2st::ConfigurationError("no trace given (--trace)");
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw s2st::ConfigurationError("cannot write " + (dir / name).string());
  return out;
}

struct Loaded {
  s2st::ExperimentConfig config;
  std::vector<s2st::Utterance> corpus;
  s2st::Resources resources;
};

Loaded load(const CommonOptions& o) {
  Loaded l{build_config(o), {}, {}};
  l.corpus = s2st::load_corpus(l.config);
  l.resources = s2st::load_resources(l.config, l.corpus);
  for (const auto& w : l.resources.warnings) std::cerr << "warning: " << w << '\n';
  return l;
}

void write_reports(const s2st::ExperimentConfig& cfg,
                   const s2st::ExperimentResult& result, bool with_chunks,
                   bool with_curve) {
  {
    auto out = open_out(cfg.out_dir, "report.csv");
    s2st::write_report_csv(out, result.rows);
  }
  {
    auto out = open_out(cfg.out_dir, "per_utterance.jsonl");
    s2st::write_records_jsonl(out, result.records, with_chunks);
  }
  if (with_curve) {
    auto out = open_out(cfg.out_dir, "curve.csv");
    s2st::write_curve_csv(out, result.rows);
  }
}

std::vector<double> resolve_points(const std::vector<double>& cli,
                                   const std::vector<double>& config,
                                   const char* what) {
  if (!cli.empty()) return cli;
  if (!config.empty()) return config;
  throw s2st::ConfigurationError(std::string("no ") + what + " given");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency simulator for simultaneous speech-to-speech translation"};
  app.require_subcommand(1);

  CommonOptions simulate_opts, compare_opts, rate_opts, scale_opts;
  auto* simulate = app.add_subcommand("simulate", "Run every strategy, full reports");
  add_common(simulate, simulate_opts);
  auto* compare = app.add_subcommand("compare", "Strategy comparison table");
  add_common(compare, compare_opts);

  std::vector<double> rates;
  auto* rate = app.add_subcommand("rate-sweep", "Latency vs incoming token period");
  add_common(rate, rate_opts);
  rate->add_option("--rates", rates, "Token periods in seconds")->delimiter(',');

  std::vector<double> alphas;
  std::optional<double> scale_rate;
  auto* scale = app.add_subcommand("scale-sweep", "Latency vs duration scale");
  add_common(scale, scale_opts);
  scale->add_option("--alphas", alphas, "Duration scales")->delimiter(',');
  scale->add_option("--rate", scale_rate, "Re-time traces to this token period first");

  std::string manifest_in, manifest_out;
  std::uint64_t augment_seed = 0;
  auto* augment = app.add_subcommand("augment", "Prefix-augment a training manifest");
  augment->add_option("--manifest", manifest_in, "Full-sentence manifest")->required();
  augment->add_option("--out", manifest_out, "Output manifest (default stdout)");
  augment->add_option("--seed", augment_seed, "Random seed");

  std::string alignment_in, trace_out;
  auto* align = app.add_subcommand("align2trace", "Word alignment to token trace");
  align->add_option("--alignment", alignment_in, "Alignment file")->required();
  align->add_option("--out", trace_out, "Output trace (default stdout)");

  std::vector<std::string> lint_traces;
  auto* lint = app.add_subcommand("validate", "Check trace files");
  lint->add_option("--trace", lint_traces, "Trace file(s)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }

  try {
    if (*simulate || *compare) {
      const bool full = simulate->parsed();
      Loaded l = load(full ? simulate_opts : compare_opts);
      const auto result = s2st::run_comparison(l.config, l.corpus, l.resources);
      write_reports(l.config, result, full, false);
      s2st::print_table(std::cout, result.rows);
    } else if (*rate) {
      Loaded l = load(rate_opts);
      const auto points = resolve_points(rates, l.config.rates, "rates (--rates)");
      const auto result = s2st::rate_sweep(l.config, l.corpus, l.resources, points);
      write_reports(l.config, result, false, true);
      s2st::print_table(std::cout, result.rows);
    } else if (*scale) {
      Loaded l = load(scale_opts);
      if (scale_rate) l.config.token_period = s2st::TimeSpan::seconds(*scale_rate);
      const auto points = resolve_points(alphas, l.config.alphas, "alphas (--alphas)");
      const auto result = s2st::scale_sweep(l.config, l.corpus, l.resources, points);
      write_reports(l.config, result, false, true);
      s2st::print_table(std::cout, result.rows);
    } else if (*augment) {
      const auto manifest = s2st::load_manifest(manifest_in, /*assume_full=*/true);
      const auto augmented = s2st::augment_prefixes(manifest, augment_seed);
      if (manifest_out.empty()) {
        s2st::write_manifest(std::cout, augmented);
      } else {
        std::ofstream out(manifest_out, std::ios::binary);
        if (!out) throw s2st::ConfigurationError("cannot write " + manifest_out);
        s2st::write_manifest(out, augmented);
      }
    } else if (*align) {
      std::ifstream in(alignment_in);
      if (!in) throw s2st::MalformedInput("cannot open alignment " + alignment_in);
      const auto alignment = s2st::parse_alignment(in, alignment_in);
      const auto converted = s2st::alignment_to_trace(alignment);
      for (const auto& w : converted.warnings) std::cerr << "warning: " << w << '\n';
      if (trace_out.empty()) {
        s2st::write_trace(std::cout, converted.utterances);
      } else {
        s2st::save_trace(trace_out, converted.utterances);
      }
    } else if (*lint) {
      std::size_t utterances = 0, tokens = 0;
      for (const auto& path : lint_traces) {
        const auto corpus = s2st::load_trace(path);
        utterances += corpus.size();
        for (const auto& u : corpus) tokens += u.tokens.size();
      }
      std::cout << "ok: " << utterances << " utterances, " << tokens << " tokens\n";
    }
  } catch (const s2st::InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const s2st::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
