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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2st/time.hpp"

namespace s2st {

// Wait-k policy with a fixed pre-decision window. One token is written per
// pre_decision_segments * segment of source audio read.
struct WaitKConfig {
  int k = 1;
  int pre_decision_segments = 7;
  TimeSpan segment = TimeSpan::seconds(0.040);
  // Decoder cost per token. The default treats the token period as the
  // emission cadence with computation already folded in.
  TimeSpan st_compute_per_token;

  TimeSpan token_period() const {
    return segment * static_cast<double>(pre_decision_segments);
  }
  // Throws ConfigurationError.
  void validate() const;
};

struct TokenEvent {
  std::size_t index = 0;
  std::string text;
  TimePoint emit_time;
  bool is_eos = false;
};

// Timestamped token trace for one utterance.
struct Utterance {
  std::string utterance_id;
  std::vector<TokenEvent> tokens;
  std::optional<TimeSpan> source_duration;

  std::vector<std::string> words() const;
  bool ends_with_eos() const { return !tokens.empty() && tokens.back().is_eos; }
};

// Emit times of the first n_tokens tokens under wait-k:
//
//   available(t) = min((k + t - 1) * period, source_duration)
//   emit(t)      = max(available(t), emit(t - 1)) + st_compute_per_token
//
// Throws EmptyUtterance when n_tokens is zero.
std::vector<TimePoint> waitk_emit_times(std::size_t n_tokens,
                                        const WaitKConfig& cfg,
                                        TimeSpan source_duration);

// Rounds to whole microseconds and nudges ties (and inversions) forward
// one microsecond at a time, giving strictly increasing times.
void make_strictly_increasing(std::span<TimePoint> times);

// Builds a trace for words under wait-k. Ties are jittered so the result
// satisfies the trace invariants. The last token is EOS-flagged.
Utterance make_waitk_utterance(std::string utterance_id,
                               std::span<const std::string> words,
                               const WaitKConfig& cfg,
                               TimeSpan source_duration);

// Re-times tokens to emit(i) = period * (i + 1), keeping their content.
Utterance retime_constant(const Utterance& u, TimeSpan period);

// Re-times tokens with waitk_emit_times. When the utterance has no source
// duration the source is taken as never exhausted.
Utterance retime_waitk(const Utterance& u, const WaitKConfig& cfg);

// Throws MalformedInput naming the utterance and token on: empty text,
// indices not 0..n-1, emit times not strictly increasing, EOS before the
// last token.
void validate_utterance(const Utterance& u);

// Trace format, one token per line:
//   utterance_id \t index \t text \t emit_time_seconds \t eos(0|1)
// '#' lines are comments; '@source_duration \t utterance_id \t seconds'
// declares the source length. Utterances keep first-appearance order.
std::vector<Utterance> parse_trace(std::istream& in,
                                   const std::string& source_name = "<trace>");
std::vector<Utterance> load_trace(const std::filesystem::path& path);

void write_trace(std::ostream& out, std::span<const Utterance> utterances);
void save_trace(const std::filesystem::path& path,
                std::span<const Utterance> utterances);

// Fixed six-decimal rendering used by every text output.
std::string format_seconds(double s);

}  // namespace s2st
