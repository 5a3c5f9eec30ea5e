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

#include <any>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "s2st/emission.hpp"
#include "s2st/time.hpp"

namespace s2st {

inline constexpr std::string_view kDefaultEndMarker = "</s>";

// Opaque decoder snapshot. Only the decoder that produced it can read it.
class DecoderState {
 public:
  DecoderState() = default;
  template <typename T>
  explicit DecoderState(T value) : value_(std::move(value)) {}

  template <typename T>
  const T& as() const {
    return std::any_cast<const T&>(value_);
  }

 private:
  std::any value_;
};

// Incremental (token-by-token) translation decoder.
//
// restore(snapshot()) must leave all future outputs unchanged, which is what
// lets pseudo lookahead run extra decoding steps without disturbing the real
// output stream.
class IncrementalDecoder {
 public:
  virtual ~IncrementalDecoder() = default;

  virtual void step(const std::string& token) = 0;
  // Greedy next token; does not advance.
  virtual std::string best_next() const = 0;
  virtual DecoderState snapshot() const = 0;
  virtual void restore(const DecoderState& state) = 0;

  virtual const std::string& end_marker() const = 0;
  // Every token the decoder can produce, end marker included. Sorted.
  virtual std::vector<std::string> vocabulary() const = 0;
  virtual std::unique_ptr<IncrementalDecoder> clone() const = 0;
};

// Back-off n-gram decoder over word tokens, order 1 to 3. best_next() looks
// up the longest known suffix of the history and returns its most frequent
// successor (ties go to the lexicographically smallest token); the end
// marker is the fallback.
class ToyDecoder final : public IncrementalDecoder {
 public:
  using History = std::vector<std::string>;

  explicit ToyDecoder(int order,
                      std::string end_marker = std::string(kDefaultEndMarker));

  // Counts every suffix history (lengths 0..order-1) of every position,
  // with the end marker after the last token of each utterance.
  static ToyDecoder train(std::span<const Utterance> corpus, int order,
                          std::string end_marker = std::string(kDefaultEndMarker));

  // Counts file: 'history_tokens \t next_token \t count'. The history is
  // space-separated and may be empty; it may not exceed order-1 tokens.
  static ToyDecoder parse_counts(std::istream& in, int order,
                                 const std::string& source_name = "<counts>",
                                 std::string end_marker = std::string(kDefaultEndMarker));
  static ToyDecoder load_counts(const std::filesystem::path& path, int order,
                                std::string end_marker = std::string(kDefaultEndMarker));

  void add_count(const History& history, const std::string& next,
                 std::int64_t count);

  // Successors of exactly this history, best first.
  std::vector<std::pair<std::string, std::int64_t>> ranked_successors(
      const History& history) const;

  int order() const { return order_; }
  const History& history() const { return history_; }
  void reset() { history_.clear(); }

  void step(const std::string& token) override;
  std::string best_next() const override;
  DecoderState snapshot() const override;
  void restore(const DecoderState& state) override;
  const std::string& end_marker() const override { return end_marker_; }
  std::vector<std::string> vocabulary() const override;
  std::unique_ptr<IncrementalDecoder> clone() const override;

 private:
  int order_;
  std::string end_marker_;
  std::map<History, std::map<std::string, std::int64_t>> counts_;
  std::map<History, std::string> best_;
  History history_;
};

// Greedy continuation of length k (shorter if the end marker comes first).
// The decoder is snapshotted before and restored after, so its observable
// state is unchanged. Throws ConfigurationError when k < 1.
std::vector<std::string> generate_pseudo(IncrementalDecoder& decoder, int k);

struct NoLookahead {};

// Wait for the next `depth` real tokens.
struct GroundTruthLookahead {
  int depth = 1;
};

// Decoder-generated lookahead; each extra decoding step costs
// per_step_overhead.
struct PseudoLookahead {
  int depth = 1;
  TimeSpan per_step_overhead = TimeSpan::seconds(0.010);
};

// Tokens drawn uniformly from the vocabulary.
struct RandomLookahead {
  int depth = 1;
  std::uint64_t seed = 0;
};

// Correct with probability `accuracy`, otherwise a uniform draw from the
// vocabulary excluding the correct token.
struct StochasticLookahead {
  double accuracy = 1.0;
  int depth = 1;
  std::uint64_t seed = 0;
};

using LookaheadStrategy =
    std::variant<NoLookahead, GroundTruthLookahead, PseudoLookahead,
                 RandomLookahead, StochasticLookahead>;

int depth(const LookaheadStrategy& s);
bool has_lookahead(const LookaheadStrategy& s);
// Throws ConfigurationError.
void validate(const LookaheadStrategy& s);
// Copy with the seed replaced (no-op for strategies without one).
LookaheadStrategy with_seed(const LookaheadStrategy& s, std::uint64_t seed);

// Short textual form, also accepted by parse_strategy:
//   none | gt[:k] | pseudo[:k[:overhead_s]] | random[:k[:seed]]
//   | stochastic:p[:k[:seed]]
std::string to_string(const LookaheadStrategy& s);
LookaheadStrategy parse_strategy(std::string_view text);

struct LookaheadStep {
  std::vector<std::string> predicted;
  std::vector<bool> correct;
  TimePoint ready_time;
};

struct LookaheadAnnotation {
  std::string strategy;
  int depth = 0;
  std::string end_marker = std::string(kDefaultEndMarker);
  // One step per token of the utterance.
  std::vector<LookaheadStep> steps;
};

// Predicts lookahead for every token of the utterance.
//
// Ready time of step t: emit(t) for None, Random and Stochastic;
// emit(min(t + k, n - 1)) for GroundTruth; for Pseudo, emit(t) plus
// k * per_step_overhead, capped at the GroundTruth ready time since the real
// tokens would be in hand by then. Positions past the end of the trace
// compare against the end marker. Correctness ignores ASCII case.
//
// Pseudo requires a decoder; the decoder is walked over the utterance and
// restored to its entry state before returning. Random and Stochastic use
// `vocabulary`, or the decoder's when it is empty.
// Throws ConfigurationError on a missing decoder or vocabulary.
LookaheadAnnotation annotate(const Utterance& utterance,
                             const LookaheadStrategy& strategy,
                             IncrementalDecoder* decoder = nullptr,
                             std::span<const std::string> vocabulary = {});

// Fraction of steps whose first predicted token is correct.
// Throws EmptyInput when no step carries a prediction.
double lookahead_accuracy(const LookaheadAnnotation& annotation);

}  // namespace s2st
