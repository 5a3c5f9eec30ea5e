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

#include "s2st/synth.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "text_util.hpp"

namespace s2st {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Splits into UTF-8 code points; stray continuation bytes stay attached to
// the preceding character.
std::vector<std::string> graphemes(std::string_view word) {
  std::vector<std::string> out;
  for (char c : word) {
    const auto byte = static_cast<unsigned char>(c);
    if ((byte & 0xC0) == 0x80 && !out.empty()) {
      out.back().push_back(c);
    } else {
      out.emplace_back(1, c);
    }
  }
  return out;
}

}  // namespace

void Lexicon::add(std::string word, std::vector<std::string> phonemes) {
  if (word.empty()) throw ConfigurationError("lexicon: empty word");
  if (phonemes.empty()) {
    throw ConfigurationError("lexicon: word '" + word + "' has no phonemes");
  }
  entries_[std::move(word)] = std::move(phonemes);
}

bool Lexicon::contains(const std::string& word) const {
  return entries_.contains(word) || entries_.contains(ascii_lower(word));
}

std::vector<std::string> Lexicon::phonemes(const std::string& word) const {
  if (auto it = entries_.find(word); it != entries_.end()) return it->second;
  const std::string lower = ascii_lower(word);
  if (auto it = entries_.find(lower); it != entries_.end()) return it->second;
  return graphemes(lower);
}

Lexicon Lexicon::parse(std::istream& in, const std::string& source_name) {
  Lexicon lex;
  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(source_name, line_no, "expected 'word \\t phonemes'");
    }
    const std::string word(text::trim(line.substr(0, tab)));
    auto phones = text::words(line.substr(tab + 1));
    if (word.empty() || phones.empty()) {
      throw ParseError(source_name, line_no, "empty word or phoneme sequence");
    }
    lex.add(word, std::move(phones));
  });
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open lexicon " + path.string());
  return parse(in, path.string());
}

std::int64_t DurationTable::base(const std::string& phoneme) const {
  if (auto it = base_frames.find(phoneme); it != base_frames.end()) {
    return it->second;
  }
  return default_frames;
}

void DurationTable::validate() const {
  if (default_frames < 1) {
    throw ConfigurationError("duration table: default_frames must be >= 1");
  }
  if (frame_hop.seconds() <= 0.0) {
    throw ConfigurationError("duration table: frame hop must be positive");
  }
  for (const auto& [phoneme, frames] : base_frames) {
    if (frames < 1) {
      throw ConfigurationError("duration table: '" + phoneme +
                               "' has fewer than 1 frame");
    }
  }
}

DurationTable DurationTable::parse(std::istream& in,
                                   const std::string& source_name) {
  DurationTable table;
  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(source_name, line_no, "expected 'phoneme \\t frames'");
    }
    const std::string phoneme(text::trim(fields[0]));
    const auto frames = text::parse_int(fields[1]);
    if (phoneme.empty() || !frames || *frames < 1) {
      throw ParseError(source_name, line_no,
                       "base duration must be a positive integer");
    }
    table.base_frames[phoneme] = *frames;
  });
  return table;
}

DurationTable DurationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open duration table " + path.string());
  return parse(in, path.string());
}

void ContextModifiers::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.5)) {
    throw ConfigurationError("duration scale alpha must lie in (0, 1.5]");
  }
  if (!(eos_stretch >= 1.0) || !std::isfinite(eos_stretch)) {
    throw ConfigurationError("eos_stretch must be >= 1");
  }
  if (!(no_lookahead_stretch >= 1.0) || !std::isfinite(no_lookahead_stretch)) {
    throw ConfigurationError("no_lookahead_stretch must be >= 1");
  }
}

std::int64_t scaled_frames(std::int64_t base, double factor) {
  // 10 * 1.15 evaluates to 11.4999...; the slack keeps such halves rounding
  // up as they would in exact arithmetic.
  const double x = static_cast<double>(base) * factor;
  const auto frames = static_cast<std::int64_t>(std::floor(x + 0.5 + 1e-9));
  return std::max<std::int64_t>(1, frames);
}

WordUnits resolve_word(const std::string& word, const Lexicon& lexicon,
                       const DurationTable& table) {
  WordUnits units{word, lexicon.phonemes(word), {}};
  units.base_frames.reserve(units.phonemes.size());
  for (const auto& p : units.phonemes) units.base_frames.push_back(table.base(p));
  return units;
}

std::vector<std::int64_t> word_frames(std::span<const WordUnits> units,
                                      const ContextModifiers& modifiers,
                                      SynthesisContext context) {
  const double shared =
      modifiers.alpha *
      (context.has_lookahead ? 1.0 : modifiers.no_lookahead_stretch);
  std::vector<std::int64_t> out;
  out.reserve(units.size());
  for (std::size_t w = 0; w < units.size(); ++w) {
    const bool stretched_end = context.is_final_input && w + 1 == units.size();
    const double factor = shared * (stretched_end ? modifiers.eos_stretch : 1.0);
    std::int64_t frames = 0;
    for (const std::int64_t base : units[w].base_frames) {
      frames += scaled_frames(base, factor);
    }
    out.push_back(frames);
  }
  return out;
}

std::vector<std::int64_t> predict_durations(std::span<const std::string> words,
                                            const Lexicon& lexicon,
                                            const DurationTable& table,
                                            const ContextModifiers& modifiers,
                                            SynthesisContext context) {
  if (words.empty()) throw EmptyInput("predict_durations: no words");
  modifiers.validate();
  std::vector<WordUnits> units;
  units.reserve(words.size());
  for (const auto& w : words) units.push_back(resolve_word(w, lexicon, table));
  return word_frames(units, modifiers, context);
}

namespace {

std::int64_t sum(const std::vector<std::int64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

// Fills the frame counts, compute time and duration of a chunk from its
// units and context.
void derive(PlannedChunk& pc, const ContextModifiers& modifiers,
            const ComputeModel& compute, TimeSpan frame_hop) {
  pc.committed_frames = word_frames(pc.committed, modifiers, pc.context);
  SynthesisContext lookahead_context{false, true};
  const auto lookahead_frames =
      word_frames(pc.lookahead, modifiers, lookahead_context);
  pc.frames_emitted = sum(pc.committed_frames);
  pc.frames_synthesized = pc.frames_emitted + sum(lookahead_frames);
  pc.chunk.frame_count = pc.frames_emitted;
  pc.chunk.play_duration = frame_hop * static_cast<double>(pc.frames_emitted);
  pc.chunk.compute_time = compute.cost(pc.frames_synthesized);
}

}  // namespace

ChunkPlan plan_chunks(const Utterance& utterance,
                      const LookaheadAnnotation& annotation,
                      const Lexicon& lexicon, const DurationTable& table,
                      const ContextModifiers& modifiers,
                      const ComputeModel& compute, PlanOptions options) {
  if (utterance.tokens.empty()) {
    throw EmptyUtterance("plan_chunks: utterance '" + utterance.utterance_id +
                         "' has no tokens");
  }
  if (annotation.steps.size() != utterance.tokens.size()) {
    throw MalformedInput("plan_chunks: annotation has " +
                         std::to_string(annotation.steps.size()) +
                         " steps for " + std::to_string(utterance.tokens.size()) +
                         " tokens in '" + utterance.utterance_id + "'");
  }
  modifiers.validate();
  table.validate();

  ChunkPlan plan;
  plan.modifiers = modifiers;
  plan.compute = compute;
  plan.frame_hop = table.frame_hop;

  for (std::size_t t = 0; t < utterance.tokens.size(); ++t) {
    const TokenEvent& token = utterance.tokens[t];
    const LookaheadStep& step = annotation.steps[t];
    const bool is_final = token.is_eos;

    std::vector<WordUnits> lookahead;
    if (!is_final) {
      for (const auto& p : step.predicted) {
        if (p == annotation.end_marker) break;
        lookahead.push_back(resolve_word(p, lexicon, table));
      }
    }
    const SynthesisContext context{is_final, is_final || !step.predicted.empty()};
    WordUnits word = resolve_word(token.text, lexicon, table);

    const bool merge =
        options.merge_coincident && !plan.chunks.empty() &&
        approx_equal(plan.chunks.back().chunk.ready_time.seconds(),
                     step.ready_time.seconds());
    if (merge) {
      PlannedChunk& pc = plan.chunks.back();
      pc.committed.push_back(std::move(word));
      pc.chunk.words.push_back(token.text);
      pc.lookahead = std::move(lookahead);
      pc.context = context;
      pc.chunk.ready_time = max(pc.chunk.ready_time, step.ready_time);
      continue;
    }
    PlannedChunk pc;
    pc.chunk.chunk_index = plan.chunks.size();
    pc.chunk.words = {token.text};
    pc.chunk.ready_time = step.ready_time;
    pc.first_word = t;
    pc.committed.push_back(std::move(word));
    pc.lookahead = std::move(lookahead);
    pc.context = context;
    plan.chunks.push_back(std::move(pc));
  }

  for (auto& pc : plan.chunks) derive(pc, plan.modifiers, compute, plan.frame_hop);
  return plan;
}

ChunkPlan scale_plan(const ChunkPlan& plan, double alpha) {
  ContextModifiers modifiers = plan.modifiers;
  modifiers.alpha = alpha;
  modifiers.validate();
  ChunkPlan out = plan;
  out.modifiers = modifiers;
  for (auto& pc : out.chunks) derive(pc, modifiers, out.compute, out.frame_hop);
  return out;
}

std::vector<SynthesisChunk> ChunkPlan::synthesis_chunks() const {
  std::vector<SynthesisChunk> out;
  out.reserve(chunks.size());
  for (const auto& pc : chunks) out.push_back(pc.chunk);
  return out;
}

std::int64_t ChunkPlan::total_frames_emitted() const {
  std::int64_t total = 0;
  for (const auto& pc : chunks) total += pc.frames_emitted;
  return total;
}

std::int64_t ChunkPlan::total_frames_synthesized() const {
  std::int64_t total = 0;
  for (const auto& pc : chunks) total += pc.frames_synthesized;
  return total;
}

TimeSpan ChunkPlan::total_duration() const {
  return frame_hop * static_cast<double>(total_frames_emitted());
}

}  // namespace s2st
