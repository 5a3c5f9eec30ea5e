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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "s2st/emission.hpp"
#include "s2st/lookahead.hpp"
#include "s2st/time.hpp"
#include "s2st/timeline.hpp"

namespace s2st {

// Word -> phoneme sequence. Unknown words fall back to one pseudo-phoneme
// per UTF-8 character.
class Lexicon {
 public:
  Lexicon() = default;

  // Throws ConfigurationError on an empty phoneme sequence.
  void add(std::string word, std::vector<std::string> phonemes);

  // Exact match first, then ASCII-lowercased, then grapheme fallback.
  std::vector<std::string> phonemes(const std::string& word) const;
  bool contains(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }

  // 'word \t phoneme phoneme ...'
  static Lexicon parse(std::istream& in, const std::string& source_name = "<lexicon>");
  static Lexicon load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

// Phoneme -> base duration in frames.
struct DurationTable {
  std::map<std::string, std::int64_t, std::less<>> base_frames;
  // Used for phonemes missing from the table (e.g. grapheme fallback).
  std::int64_t default_frames = 7;
  TimeSpan frame_hop = TimeSpan::seconds(0.0116);

  std::int64_t base(const std::string& phoneme) const;
  TimeSpan frames_to_time(std::int64_t frames) const {
    return frame_hop * static_cast<double>(frames);
  }
  // Throws ConfigurationError.
  void validate() const;

  // 'phoneme \t base_frames'
  static DurationTable parse(std::istream& in,
                             const std::string& source_name = "<durations>");
  static DurationTable load(const std::filesystem::path& path);
};

// Multiplicative duration modifiers.
//
// eos_stretch applies to the last word of an input that ends with the EOS
// token. no_lookahead_stretch applies to words synthesized without any
// lookahead; its default, 1.30, is the ratio of average synthesized length
// without and with lookahead (7.7 s / 5.9 s). The eos_stretch default is a
// convention, not a measured value.
struct ContextModifiers {
  double alpha = 1.0;
  double eos_stretch = 1.15;
  double no_lookahead_stretch = 1.30;

  // Throws ConfigurationError unless alpha in (0, 1.5], stretches >= 1.
  void validate() const;
};

struct SynthesisContext {
  bool is_final_input = false;
  bool has_lookahead = true;
};

// max(1, round(base * factor)), with exact halves rounding up even when the
// product lands a few ulps below them.
std::int64_t scaled_frames(std::int64_t base, double factor);

// Phonemes of one word with their base frame counts.
struct WordUnits {
  std::string word;
  std::vector<std::string> phonemes;
  std::vector<std::int64_t> base_frames;
};

WordUnits resolve_word(const std::string& word, const Lexicon& lexicon,
                       const DurationTable& table);

// Frames of each word in `units` under the modifiers and context.
std::vector<std::int64_t> word_frames(std::span<const WordUnits> units,
                                      const ContextModifiers& modifiers,
                                      SynthesisContext context);

// Per-word frame counts for a word sequence synthesized as one input.
// Throws EmptyInput when words is empty.
std::vector<std::int64_t> predict_durations(std::span<const std::string> words,
                                            const Lexicon& lexicon,
                                            const DurationTable& table,
                                            const ContextModifiers& modifiers,
                                            SynthesisContext context);

struct ComputeModel {
  TimeSpan fixed_overhead = TimeSpan::seconds(0.02);
  TimeSpan per_frame_cost = TimeSpan::seconds(0.0005);

  // Cost of synthesizing `frames` frames (committed plus lookahead).
  TimeSpan cost(std::int64_t frames_synthesized) const {
    return fixed_overhead +
           per_frame_cost * static_cast<double>(frames_synthesized);
  }
};

// One synthesis step: words [first_word, first_word + committed.size()) are
// emitted; lookahead words are synthesized but their frames are dropped.
struct PlannedChunk {
  SynthesisChunk chunk;
  std::size_t first_word = 0;
  std::vector<WordUnits> committed;
  std::vector<WordUnits> lookahead;
  SynthesisContext context;
  std::vector<std::int64_t> committed_frames;
  std::int64_t frames_synthesized = 0;
  std::int64_t frames_emitted = 0;
};

struct ChunkPlan {
  std::vector<PlannedChunk> chunks;
  ContextModifiers modifiers;
  ComputeModel compute;
  TimeSpan frame_hop;

  std::vector<SynthesisChunk> synthesis_chunks() const;
  std::int64_t total_frames_emitted() const;
  std::int64_t total_frames_synthesized() const;
  TimeSpan total_duration() const;
};

struct PlanOptions {
  // Merge consecutive steps whose ready times coincide into one chunk.
  bool merge_coincident = false;
};

// Plans one chunk per commit step of the annotation. A step with any
// prediction (even just the end marker) counts as having lookahead; the
// step consuming an EOS-flagged token is a final input, drops its lookahead
// and never takes the no-lookahead stretch.
//
// Throws MalformedInput when the annotation does not match the utterance.
ChunkPlan plan_chunks(const Utterance& utterance,
                      const LookaheadAnnotation& annotation,
                      const Lexicon& lexicon, const DurationTable& table,
                      const ContextModifiers& modifiers,
                      const ComputeModel& compute, PlanOptions options = {});

// Re-derives every frame count with a new alpha (per-phoneme rounding) and
// reapplies the compute model; ready times are kept.
// Throws ConfigurationError unless 0 < alpha <= 1.5.
ChunkPlan scale_plan(const ChunkPlan& plan, double alpha);

}  // namespace s2st
