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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2st/emission.hpp"
#include "s2st/lookahead.hpp"
#include "s2st/synth.hpp"
#include "s2st/timeline.hpp"

namespace s2st {

enum class InputEndMode {
  kSource,     // end of the source speech (falls back to the last token)
  kLastToken,  // emit time of the last token
};

enum class RetimeMode {
  kNone,   // use trace timestamps as given
  kWaitK,  // re-derive emit times from the wait-k schedule
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> traces;
  std::vector<LookaheadStrategy> strategies;
  WaitKConfig waitk;
  RetimeMode retime = RetimeMode::kNone;
  // When set, every token is re-timed to a constant inter-emit gap and the
  // input end becomes the last token. Overrides `retime`.
  std::optional<TimeSpan> token_period;
  ContextModifiers modifiers;
  ComputeModel compute;
  TimeSpan frame_hop = TimeSpan::seconds(0.0116);
  std::int64_t default_phoneme_frames = 7;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> durations;
  std::optional<std::filesystem::path> decoder_counts;
  int decoder_order = 3;
  InputEndMode input_end = InputEndMode::kSource;
  std::vector<double> rates;
  std::vector<double> alphas;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  PlanOptions plan;

  // Throws ConfigurationError.
  void validate() const;
};

// JSON config. Relative paths resolve against base_dir. Unknown keys are
// rejected. Keys:
//   trace (string or list), strategies (list of strategy strings),
//   waitk {k, pre_decision_segments, segment, st_compute_per_token},
//   retime ("none" | "waitk"), token_period,
//   modifiers {alpha, eos_stretch, no_lookahead_stretch},
//   compute {fixed_overhead, per_frame_cost},
//   frame_hop, default_phoneme_frames, lexicon, durations,
//   decoder_counts, decoder_order, input_end ("source" | "last-token"),
//   rates, alphas, out_dir, seed, threads, merge_coincident
ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

InputEndMode parse_input_end(std::string_view text);
const char* to_string(InputEndMode mode);

// Loads and merges every trace of the config, sorted by utterance id.
// Throws MalformedInput on duplicate ids.
std::vector<Utterance> load_corpus(const ExperimentConfig& config);

// Lexicon, duration table, decoder and vocabulary shared by all runs.
struct Resources {
  Lexicon lexicon;
  DurationTable durations;
  std::unique_ptr<IncrementalDecoder> decoder;
  std::vector<std::string> vocabulary;
  std::vector<std::string> warnings;
};

// Without a counts file, a pseudo strategy gets a toy decoder trained on the
// corpus itself (with a warning).
Resources load_resources(const ExperimentConfig& config,
                         std::span<const Utterance> corpus);

struct ChunkRecord {
  std::size_t chunk_index = 0;
  std::vector<std::string> words;
  double ready_time = 0.0;
  double compute_time = 0.0;
  double play_duration = 0.0;
  double play_start = 0.0;
  double play_end = 0.0;
  double queue_wait = 0.0;
  std::int64_t frames_emitted = 0;
  std::int64_t frames_synthesized = 0;
};

enum class SweepAxis { kNone, kTokenPeriod, kAlpha };
const char* to_string(SweepAxis axis);

struct UtteranceRecord {
  std::string utterance_id;
  std::string strategy;
  SweepAxis sweep = SweepAxis::kNone;
  double point = 0.0;
  std::size_t tokens = 0;
  double input_end = 0.0;
  double output_end = 0.0;
  double start_latency = 0.0;
  double final_latency = 0.0;
  bool output_before_input = false;
  double output_duration = 0.0;
  std::int64_t frames_emitted = 0;
  std::int64_t frames_synthesized = 0;
  std::optional<double> lookahead_accuracy;
  std::vector<ChunkRecord> chunks;
};

struct AggregateRow {
  std::string strategy;
  SweepAxis sweep = SweepAxis::kNone;
  double point = 0.0;
  std::size_t utterances = 0;
  double mean_start_latency = 0.0;
  double median_start_latency = 0.0;
  double mean_final_latency = 0.0;
  double median_final_latency = 0.0;
  double mean_output_duration = 0.0;
  std::optional<double> mean_lookahead_accuracy;
};

struct ExperimentResult {
  std::vector<UtteranceRecord> records;
  std::vector<AggregateRow> rows;
};

// annotate -> plan_chunks -> [scale_plan] -> schedule_playback for one
// utterance, with the schedule validated. Throws InvariantViolation if the
// schedule fails validation.
UtteranceRecord evaluate_utterance(const Utterance& utterance,
                                   const LookaheadStrategy& strategy,
                                   const Resources& resources,
                                   const ExperimentConfig& config,
                                   std::optional<double> alpha = std::nullopt);

// Groups records by (strategy, sweep point) in first-appearance order.
std::vector<AggregateRow> aggregate(std::span<const UtteranceRecord> records);

double mean(std::span<const double> values);
double median(std::vector<double> values);

// Every utterance under every strategy.
ExperimentResult run_comparison(const ExperimentConfig& config,
                                std::span<const Utterance> corpus,
                                const Resources& resources);

// Re-times the corpus to each constant token period (input end = last
// token). Points are reported in descending order.
ExperimentResult rate_sweep(const ExperimentConfig& config,
                            std::span<const Utterance> corpus,
                            const Resources& resources,
                            std::span<const double> token_periods);

// Scales every plan by each alpha. Points are reported in descending order.
ExperimentResult scale_sweep(const ExperimentConfig& config,
                             std::span<const Utterance> corpus,
                             const Resources& resources,
                             std::span<const double> alphas);

// Column order:
//   strategy,sweep,point,utterances,mean_start_latency,median_start_latency,
//   mean_final_latency,median_final_latency,mean_output_duration,
//   mean_lookahead_accuracy
void write_report_csv(std::ostream& out, std::span<const AggregateRow> rows);

// Column order:
//   strategy,<token_period|alpha>,utterances,mean_final_latency,
//   median_final_latency,mean_start_latency,mean_output_duration
void write_curve_csv(std::ostream& out, std::span<const AggregateRow> rows);

// One JSON object per line; chunk detail only when with_chunks is set.
void write_records_jsonl(std::ostream& out,
                         std::span<const UtteranceRecord> records,
                         bool with_chunks);

// Human-readable strategy table.
void print_table(std::ostream& out, std::span<const AggregateRow> rows);

}  // namespace s2st
