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

#include "s2st/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "rng.hpp"

namespace s2st {

void ExperimentConfig::validate() const {
  if (strategies.empty()) {
    throw ConfigurationError("config: at least one strategy is required");
  }
  for (const auto& s : strategies) s2st::validate(s);
  waitk.validate();
  modifiers.validate();
  if (token_period && token_period->seconds() <= 0.0) {
    throw ConfigurationError("config: token_period must be positive");
  }
  if (frame_hop.seconds() <= 0.0) {
    throw ConfigurationError("config: frame_hop must be positive");
  }
  if (default_phoneme_frames < 1) {
    throw ConfigurationError("config: default_phoneme_frames must be >= 1");
  }
  if (decoder_order < 1 || decoder_order > 3) {
    throw ConfigurationError("config: decoder_order must be 1, 2 or 3");
  }
  for (double r : rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigurationError("config: token rates must be positive");
    }
  }
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.5)) {
      throw ConfigurationError("config: alphas must lie in (0, 1.5]");
    }
  }
  if (threads == 0) throw ConfigurationError("config: threads must be >= 1");
}

InputEndMode parse_input_end(std::string_view text) {
  if (text == "source") return InputEndMode::kSource;
  if (text == "last-token") return InputEndMode::kLastToken;
  throw ConfigurationError("input_end must be 'source' or 'last-token', got '" +
                           std::string(text) + "'");
}

const char* to_string(InputEndMode mode) {
  return mode == InputEndMode::kSource ? "source" : "last-token";
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone:
      return "none";
    case SweepAxis::kTokenPeriod:
      return "token_period";
    case SweepAxis::kAlpha:
      return "alpha";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Config

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename Fn>
void with_object(const json& j, std::string_view where,
                 std::initializer_list<std::string_view> allowed, Fn&& fn) {
  if (!j.is_object()) {
    throw ConfigurationError("config: '" + std::string(where) +
                             "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigurationError("config: unknown key '" + key + "' in " +
                               std::string(where));
    }
    fn(key, value);
  }
}

TimeSpan span_of(const json& v) { return TimeSpan::seconds(v.get<double>()); }

}  // namespace

ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    with_object(
        root, "config",
        {"trace", "strategies", "waitk", "retime", "token_period", "modifiers",
         "compute", "frame_hop", "default_phoneme_frames", "lexicon",
         "durations", "decoder_counts", "decoder_order", "input_end", "rates",
         "alphas", "out_dir", "seed", "threads", "merge_coincident"},
        [&](const std::string& key, const json& v) {
          if (key == "trace") {
            if (v.is_string()) {
              cfg.traces.push_back(resolve(base_dir, v.get<std::string>()));
            } else {
              for (const auto& t : v) {
                cfg.traces.push_back(resolve(base_dir, t.get<std::string>()));
              }
            }
          } else if (key == "strategies") {
            for (const auto& s : v) {
              cfg.strategies.push_back(parse_strategy(s.get<std::string>()));
            }
          } else if (key == "waitk") {
            with_object(v, "waitk",
                        {"k", "pre_decision_segments", "segment",
                         "st_compute_per_token"},
                        [&](const std::string& k, const json& x) {
                          if (k == "k") cfg.waitk.k = x.get<int>();
                          if (k == "pre_decision_segments") {
                            cfg.waitk.pre_decision_segments = x.get<int>();
                          }
                          if (k == "segment") cfg.waitk.segment = span_of(x);
                          if (k == "st_compute_per_token") {
                            cfg.waitk.st_compute_per_token = span_of(x);
                          }
                        });
          } else if (key == "retime") {
            const auto mode = v.get<std::string>();
            if (mode == "none") {
              cfg.retime = RetimeMode::kNone;
            } else if (mode == "waitk") {
              cfg.retime = RetimeMode::kWaitK;
            } else {
              throw ConfigurationError("config: retime must be 'none' or 'waitk'");
            }
          } else if (key == "token_period") {
            cfg.token_period = span_of(v);
          } else if (key == "modifiers") {
            with_object(v, "modifiers",
                        {"alpha", "eos_stretch", "no_lookahead_stretch"},
                        [&](const std::string& k, const json& x) {
                          if (k == "alpha") cfg.modifiers.alpha = x.get<double>();
                          if (k == "eos_stretch") {
                            cfg.modifiers.eos_stretch = x.get<double>();
                          }
                          if (k == "no_lookahead_stretch") {
                            cfg.modifiers.no_lookahead_stretch = x.get<double>();
                          }
                        });
          } else if (key == "compute") {
            with_object(v, "compute", {"fixed_overhead", "per_frame_cost"},
                        [&](const std::string& k, const json& x) {
                          if (k == "fixed_overhead") {
                            cfg.compute.fixed_overhead = span_of(x);
                          }
                          if (k == "per_frame_cost") {
                            cfg.compute.per_frame_cost = span_of(x);
                          }
                        });
          } else if (key == "frame_hop") {
            cfg.frame_hop = span_of(v);
          } else if (key == "default_phoneme_frames") {
            cfg.default_phoneme_frames = v.get<std::int64_t>();
          } else if (key == "lexicon") {
            cfg.lexicon = resolve(base_dir, v.get<std::string>());
          } else if (key == "durations") {
            cfg.durations = resolve(base_dir, v.get<std::string>());
          } else if (key == "decoder_counts") {
            cfg.decoder_counts = resolve(base_dir, v.get<std::string>());
          } else if (key == "decoder_order") {
            cfg.decoder_order = v.get<int>();
          } else if (key == "input_end") {
            cfg.input_end = parse_input_end(v.get<std::string>());
          } else if (key == "rates") {
            cfg.rates = v.get<std::vector<double>>();
          } else if (key == "alphas") {
            cfg.alphas = v.get<std::vector<double>>();
          } else if (key == "out_dir") {
            cfg.out_dir = resolve(base_dir, v.get<std::string>());
          } else if (key == "seed") {
            cfg.seed = v.get<std::uint64_t>();
          } else if (key == "threads") {
            cfg.threads = v.get<unsigned>();
          } else if (key == "merge_coincident") {
            cfg.plan.merge_coincident = v.get<bool>();
          }
        });
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_config(text, path.parent_path());
}

// ---------------------------------------------------------------------------
// Corpus and resources

std::vector<Utterance> load_corpus(const ExperimentConfig& config) {
  std::vector<Utterance> corpus;
  for (const auto& path : config.traces) {
    auto part = load_trace(path);
    corpus.insert(corpus.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  std::stable_sort(corpus.begin(), corpus.end(),
                   [](const Utterance& a, const Utterance& b) {
                     return a.utterance_id < b.utterance_id;
                   });
  for (std::size_t i = 1; i < corpus.size(); ++i) {
    if (corpus[i].utterance_id == corpus[i - 1].utterance_id) {
      throw MalformedInput("duplicate utterance id '" + corpus[i].utterance_id +
                           "' across traces");
    }
  }
  return corpus;
}

Resources load_resources(const ExperimentConfig& config,
                         std::span<const Utterance> corpus) {
  Resources r;
  if (config.lexicon) r.lexicon = Lexicon::load(*config.lexicon);
  if (config.durations) r.durations = DurationTable::load(*config.durations);
  r.durations.default_frames = config.default_phoneme_frames;
  r.durations.frame_hop = config.frame_hop;
  r.durations.validate();

  const bool wants_pseudo = std::any_of(
      config.strategies.begin(), config.strategies.end(),
      [](const auto& s) { return std::holds_alternative<PseudoLookahead>(s); });
  if (config.decoder_counts) {
    r.decoder = std::make_unique<ToyDecoder>(
        ToyDecoder::load_counts(*config.decoder_counts, config.decoder_order));
  } else if (wants_pseudo) {
    r.decoder = std::make_unique<ToyDecoder>(
        ToyDecoder::train(corpus, config.decoder_order));
    r.warnings.push_back(
        "no decoder counts given; pseudo lookahead uses a toy decoder trained "
        "on the evaluated corpus, so its accuracy is an upper bound");
  }

  if (r.decoder) {
    r.vocabulary = r.decoder->vocabulary();
  } else {
    std::set<std::string> vocab{std::string(kDefaultEndMarker)};
    for (const auto& u : corpus) {
      for (const auto& t : u.tokens) vocab.insert(t.text);
    }
    r.vocabulary.assign(vocab.begin(), vocab.end());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double input_end_for(const Utterance& u, const ExperimentConfig& config) {
  const double last = u.tokens.back().emit_time.seconds();
  if (config.token_period || config.input_end == InputEndMode::kLastToken) {
    return last;
  }
  return u.source_duration ? u.source_duration->seconds() : last;
}

std::vector<Utterance> prepare(const ExperimentConfig& config,
                               std::span<const Utterance> corpus) {
  std::vector<Utterance> out;
  out.reserve(corpus.size());
  for (const auto& u : corpus) {
    if (u.tokens.empty()) {
      throw EmptyUtterance("utterance '" + u.utterance_id + "' has no tokens");
    }
    if (config.token_period) {
      out.push_back(retime_constant(u, *config.token_period));
    } else if (config.retime == RetimeMode::kWaitK) {
      out.push_back(retime_waitk(u, config.waitk));
    } else {
      out.push_back(u);
    }
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results are written
// by index, so the output order never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<T> out(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const unsigned count = std::min<std::size_t>(threads, n);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<double> sorted_points(std::span<const double> points) {
  std::vector<double> out(points.begin(), points.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

UtteranceRecord evaluate_utterance(const Utterance& utterance,
                                   const LookaheadStrategy& strategy,
                                   const Resources& resources,
                                   const ExperimentConfig& config,
                                   std::optional<double> alpha) {
  try {
    const auto& base_seed = std::visit(
        [](const auto& s) -> std::uint64_t {
          if constexpr (requires { s.seed; }) {
            return s.seed;
          } else {
            return 0;
          }
        },
        strategy);
    const LookaheadStrategy seeded = with_seed(
        strategy, rng::derive_seed(base_seed ^ config.seed, utterance.utterance_id));

    std::unique_ptr<IncrementalDecoder> decoder;
    if (std::holds_alternative<PseudoLookahead>(strategy) && resources.decoder) {
      decoder = resources.decoder->clone();
    }
    const LookaheadAnnotation annotation =
        annotate(utterance, seeded, decoder.get(), resources.vocabulary);
    ChunkPlan plan = plan_chunks(utterance, annotation, resources.lexicon,
                                 resources.durations, config.modifiers,
                                 config.compute, config.plan);
    if (alpha) plan = scale_plan(plan, *alpha);

    const auto chunks = plan.synthesis_chunks();
    const TimePoint input_end = TimePoint::at(input_end_for(utterance, config));
    const ScheduleResult result = schedule_playback(chunks, input_end);
    const ScheduleValidation check = validate_schedule(result.schedule, chunks);
    if (!check.ok()) {
      throw InvariantViolation("utterance '" + utterance.utterance_id +
                               "': schedule " + to_string(check.violation) +
                               " at chunk " + std::to_string(check.index) +
                               ": " + check.message);
    }

    UtteranceRecord rec;
    rec.utterance_id = utterance.utterance_id;
    rec.strategy = to_string(strategy);
    rec.tokens = utterance.tokens.size();
    rec.input_end = input_end.seconds();
    rec.output_end = result.report.output_end.seconds();
    rec.start_latency = result.report.start_latency.seconds();
    rec.final_latency = result.report.final_latency;
    rec.output_before_input = result.report.output_before_input;
    rec.output_duration = plan.total_duration().seconds();
    rec.frames_emitted = plan.total_frames_emitted();
    rec.frames_synthesized = plan.total_frames_synthesized();
    if (has_lookahead(strategy)) {
      rec.lookahead_accuracy = lookahead_accuracy(annotation);
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      const auto& e = result.schedule.entries[i];
      rec.chunks.push_back({c.chunk_index, c.words, c.ready_time.seconds(),
                            c.compute_time.seconds(), c.play_duration.seconds(),
                            e.play_start.seconds(), e.play_end.seconds(),
                            result.report.per_chunk_queue_wait[i].seconds(),
                            plan.chunks[i].frames_emitted,
                            plan.chunks[i].frames_synthesized});
    }
    return rec;
  } catch (const InvariantViolation&) {
    throw;
  } catch (const ConfigurationError&) {
    throw;
  } catch (const Error& e) {
    throw MalformedInput("utterance '" + utterance.utterance_id + "': " + e.what());
  }
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AggregateRow> aggregate(std::span<const UtteranceRecord> records) {
  struct Group {
    std::vector<double> start, final, duration, accuracy;
  };
  std::vector<AggregateRow> rows;
  std::vector<Group> groups;
  std::map<std::tuple<std::string, int, double>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.strategy, static_cast<int>(r.sweep), r.point);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      AggregateRow row;
      row.strategy = r.strategy;
      row.sweep = r.sweep;
      row.point = r.point;
      rows.push_back(std::move(row));
      groups.emplace_back();
    }
    Group& g = groups[it->second];
    g.start.push_back(r.start_latency);
    g.final.push_back(r.final_latency);
    g.duration.push_back(r.output_duration);
    if (r.lookahead_accuracy) g.accuracy.push_back(*r.lookahead_accuracy);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    AggregateRow& row = rows[i];
    const Group& g = groups[i];
    row.utterances = g.start.size();
    row.mean_start_latency = mean(g.start);
    row.median_start_latency = median(g.start);
    row.mean_final_latency = mean(g.final);
    row.median_final_latency = median(g.final);
    row.mean_output_duration = mean(g.duration);
    if (!g.accuracy.empty()) row.mean_lookahead_accuracy = mean(g.accuracy);
  }
  return rows;
}

namespace {

ExperimentResult run_points(const ExperimentConfig& config,
                            std::span<const Utterance> corpus,
                            const Resources& resources, SweepAxis axis,
                            std::span<const double> points) {
  config.validate();
  ExperimentResult result;
  const std::vector<double> none{0.0};
  for (const double point : points.empty() ? std::span<const double>(none) : points) {
    ExperimentConfig run = config;
    std::optional<double> alpha;
    if (axis == SweepAxis::kTokenPeriod) run.token_period = TimeSpan::seconds(point);
    if (axis == SweepAxis::kAlpha) alpha = point;
    const std::vector<Utterance> prepared = prepare(run, corpus);
    for (const auto& strategy : run.strategies) {
      auto records = parallel_map<UtteranceRecord>(
          prepared.size(), run.threads, [&](std::size_t i) {
            return evaluate_utterance(prepared[i], strategy, resources, run, alpha);
          });
      for (auto& r : records) {
        r.sweep = axis;
        r.point = axis == SweepAxis::kNone ? 0.0 : point;
        result.records.push_back(std::move(r));
      }
    }
  }
  result.rows = aggregate(result.records);
  return result;
}

}  // namespace

ExperimentResult run_comparison(const ExperimentConfig& config,
                                std::span<const Utterance> corpus,
                                const Resources& resources) {
  return run_points(config, corpus, resources, SweepAxis::kNone, {});
}

ExperimentResult rate_sweep(const ExperimentConfig& config,
                            std::span<const Utterance> corpus,
                            const Resources& resources,
                            std::span<const double> token_periods) {
  if (token_periods.empty()) throw ConfigurationError("rate sweep: no rates given");
  for (double r : token_periods) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigurationError("rate sweep: rates must be positive");
    }
  }
  const auto points = sorted_points(token_periods);
  return run_points(config, corpus, resources, SweepAxis::kTokenPeriod, points);
}

ExperimentResult scale_sweep(const ExperimentConfig& config,
                             std::span<const Utterance> corpus,
                             const Resources& resources,
                             std::span<const double> alphas) {
  if (alphas.empty()) throw ConfigurationError("scale sweep: no alphas given");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.5)) {
      throw ConfigurationError("scale sweep: alphas must lie in (0, 1.5]");
    }
  }
  const auto points = sorted_points(alphas);
  return run_points(config, corpus, resources, SweepAxis::kAlpha, points);
}

// ---------------------------------------------------------------------------
// Output

void write_report_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "strategy,sweep,point,utterances,mean_start_latency,"
         "median_start_latency,mean_final_latency,median_final_latency,"
         "mean_output_duration,mean_lookahead_accuracy\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << to_string(r.sweep) << ','
        << (r.sweep == SweepAxis::kNone ? std::string("-") : format_seconds(r.point))
        << ',' << r.utterances << ',' << format_seconds(r.mean_start_latency)
        << ',' << format_seconds(r.median_start_latency) << ','
        << format_seconds(r.mean_final_latency) << ','
        << format_seconds(r.median_final_latency) << ','
        << format_seconds(r.mean_output_duration) << ','
        << (r.mean_lookahead_accuracy ? format_seconds(*r.mean_lookahead_accuracy)
                                      : std::string("NA"))
        << '\n';
  }
}

void write_curve_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  const SweepAxis axis = rows.empty() ? SweepAxis::kNone : rows.front().sweep;
  out << "strategy," << to_string(axis)
      << ",utterances,mean_final_latency,median_final_latency,"
         "mean_start_latency,mean_output_duration\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << format_seconds(r.point) << ',' << r.utterances
        << ',' << format_seconds(r.mean_final_latency) << ','
        << format_seconds(r.median_final_latency) << ','
        << format_seconds(r.mean_start_latency) << ','
        << format_seconds(r.mean_output_duration) << '\n';
  }
}

void write_records_jsonl(std::ostream& out,
                         std::span<const UtteranceRecord> records,
                         bool with_chunks) {
  for (const auto& r : records) {
    json j = json::object();
    j["utterance_id"] = r.utterance_id;
    j["strategy"] = r.strategy;
    j["sweep"] = to_string(r.sweep);
    if (r.sweep != SweepAxis::kNone) j["point"] = round6(r.point);
    j["tokens"] = r.tokens;
    j["input_end"] = round6(r.input_end);
    j["output_end"] = round6(r.output_end);
    j["start_latency"] = round6(r.start_latency);
    j["final_latency"] = round6(r.final_latency);
    j["output_before_input"] = r.output_before_input;
    j["output_duration"] = round6(r.output_duration);
    j["frames_emitted"] = r.frames_emitted;
    j["frames_synthesized"] = r.frames_synthesized;
    j["lookahead_accuracy"] =
        r.lookahead_accuracy ? json(round6(*r.lookahead_accuracy)) : json(nullptr);
    if (with_chunks) {
      json chunks = json::array();
      for (const auto& c : r.chunks) {
        chunks.push_back({{"chunk_index", c.chunk_index},
                          {"words", c.words},
                          {"ready_time", round6(c.ready_time)},
                          {"compute_time", round6(c.compute_time)},
                          {"play_duration", round6(c.play_duration)},
                          {"play_start", round6(c.play_start)},
                          {"play_end", round6(c.play_end)},
                          {"queue_wait", round6(c.queue_wait)},
                          {"frames_emitted", c.frames_emitted},
                          {"frames_synthesized", c.frames_synthesized}});
      }
      j["chunks"] = std::move(chunks);
    }
    out << j.dump() << '\n';
  }
}

void print_table(std::ostream& out, std::span<const AggregateRow> rows) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %-12s %5s %10s %10s %10s %10s %8s\n",
                "strategy", "point", "n", "start", "final", "final_med",
                "out_dur", "acc");
  out << line;
  for (const auto& r : rows) {
    const std::string point =
        r.sweep == SweepAxis::kNone ? std::string("-") : format_seconds(r.point);
    const std::string acc = r.mean_lookahead_accuracy
                                ? format_seconds(*r.mean_lookahead_accuracy).substr(0, 5)
                                : std::string("NA");
    std::snprintf(line, sizeof(line),
                  "%-22s %-12s %5zu %10.3f %10.3f %10.3f %10.3f %8s\n",
                  r.strategy.c_str(), point.c_str(), r.utterances,
                  r.mean_start_latency, r.mean_final_latency,
                  r.median_final_latency, r.mean_output_duration, acc.c_str());
    out << line;
  }
}

}  // namespace s2st
