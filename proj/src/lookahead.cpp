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

#include "s2st/lookahead.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "rng.hpp"
#include "text_util.hpp"

namespace s2st {

ToyDecoder::ToyDecoder(int order, std::string end_marker)
    : order_(order), end_marker_(std::move(end_marker)) {
  if (order < 1 || order > 3) {
    throw ConfigurationError("toy decoder order must be 1, 2 or 3");
  }
  if (end_marker_.empty()) throw ConfigurationError("empty end marker");
}

ToyDecoder ToyDecoder::train(std::span<const Utterance> corpus, int order,
                             std::string end_marker) {
  ToyDecoder d(order, std::move(end_marker));
  const std::size_t window = static_cast<std::size_t>(order - 1);
  for (const auto& u : corpus) {
    std::vector<std::string> seq = u.words();
    seq.push_back(d.end_marker_);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t max_len = std::min(window, i);
      for (std::size_t len = 0; len <= max_len; ++len) {
        History h(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                  seq.begin() + static_cast<std::ptrdiff_t>(i));
        d.add_count(h, seq[i], 1);
      }
    }
  }
  return d;
}

ToyDecoder ToyDecoder::parse_counts(std::istream& in, int order,
                                    const std::string& source_name,
                                    std::string end_marker) {
  ToyDecoder d(order, std::move(end_marker));
  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(source_name, line_no,
                       "expected 'history \\t next \\t count'");
    }
    History h = text::words(fields[0]);
    if (h.size() > static_cast<std::size_t>(order - 1)) {
      throw ParseError(source_name, line_no,
                       "history longer than order - 1 tokens");
    }
    const std::string next(text::trim(fields[1]));
    if (next.empty()) throw ParseError(source_name, line_no, "empty next token");
    const auto count = text::parse_int(fields[2]);
    if (!count || *count <= 0) {
      throw ParseError(source_name, line_no, "count must be a positive integer");
    }
    d.add_count(h, next, *count);
  });
  return d;
}

ToyDecoder ToyDecoder::load_counts(const std::filesystem::path& path, int order,
                                   std::string end_marker) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open counts file " + path.string());
  return parse_counts(in, order, path.string(), std::move(end_marker));
}

void ToyDecoder::add_count(const History& history, const std::string& next,
                           std::int64_t count) {
  auto& successors = counts_[history];
  successors[next] += count;
  // std::map iterates in lexicographic order, so the first maximum wins ties.
  const auto best = std::max_element(
      successors.begin(), successors.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  best_[history] = best->first;
}

std::vector<std::pair<std::string, std::int64_t>> ToyDecoder::ranked_successors(
    const History& history) const {
  std::vector<std::pair<std::string, std::int64_t>> out;
  const auto it = counts_.find(history);
  if (it == counts_.end()) return out;
  out.assign(it->second.begin(), it->second.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

void ToyDecoder::step(const std::string& token) {
  history_.push_back(token);
  const std::size_t window = static_cast<std::size_t>(order_ - 1);
  if (history_.size() > window) {
    history_.erase(history_.begin(),
                   history_.end() - static_cast<std::ptrdiff_t>(window));
  }
}

std::string ToyDecoder::best_next() const {
  for (std::size_t len = history_.size() + 1; len-- > 0;) {
    const History suffix(history_.end() - static_cast<std::ptrdiff_t>(len),
                         history_.end());
    if (const auto it = best_.find(suffix); it != best_.end()) {
      return it->second;
    }
  }
  return end_marker_;
}

DecoderState ToyDecoder::snapshot() const { return DecoderState(history_); }

void ToyDecoder::restore(const DecoderState& state) {
  history_ = state.as<History>();
}

std::vector<std::string> ToyDecoder::vocabulary() const {
  std::set<std::string> vocab{end_marker_};
  for (const auto& [history, successors] : counts_) {
    vocab.insert(history.begin(), history.end());
    for (const auto& entry : successors) vocab.insert(entry.first);
  }
  return {vocab.begin(), vocab.end()};
}

std::unique_ptr<IncrementalDecoder> ToyDecoder::clone() const {
  return std::make_unique<ToyDecoder>(*this);
}

namespace {

// Restores the decoder on scope exit, including during unwinding.
class StateGuard {
 public:
  explicit StateGuard(IncrementalDecoder& d) : decoder_(d), saved_(d.snapshot()) {}
  ~StateGuard() { decoder_.restore(saved_); }
  StateGuard(const StateGuard&) = delete;
  StateGuard& operator=(const StateGuard&) = delete;

 private:
  IncrementalDecoder& decoder_;
  DecoderState saved_;
};

}  // namespace

std::vector<std::string> generate_pseudo(IncrementalDecoder& decoder, int k) {
  if (k < 1) throw ConfigurationError("pseudo lookahead depth must be >= 1");
  StateGuard guard(decoder);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::string next = decoder.best_next();
    const bool done = next == decoder.end_marker();
    out.push_back(std::move(next));
    if (done) break;
    decoder.step(out.back());
  }
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int depth(const LookaheadStrategy& s) {
  return std::visit(Overloaded{[](const NoLookahead&) { return 0; },
                               [](const auto& v) { return v.depth; }},
                    s);
}

bool has_lookahead(const LookaheadStrategy& s) {
  return !std::holds_alternative<NoLookahead>(s);
}

void validate(const LookaheadStrategy& s) {
  if (has_lookahead(s) && depth(s) < 1) {
    throw ConfigurationError("lookahead depth must be >= 1 in " + to_string(s));
  }
  if (const auto* st = std::get_if<StochasticLookahead>(&s)) {
    if (!(st->accuracy >= 0.0 && st->accuracy <= 1.0)) {
      throw ConfigurationError("stochastic accuracy must lie in [0, 1]");
    }
  }
}

LookaheadStrategy with_seed(const LookaheadStrategy& s, std::uint64_t seed) {
  LookaheadStrategy out = s;
  if (auto* r = std::get_if<RandomLookahead>(&out)) r->seed = seed;
  if (auto* st = std::get_if<StochasticLookahead>(&out)) st->seed = seed;
  return out;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string to_string(const LookaheadStrategy& s) {
  return std::visit(
      Overloaded{
          [](const NoLookahead&) { return std::string("none"); },
          [](const GroundTruthLookahead& g) {
            return "gt:" + std::to_string(g.depth);
          },
          [](const PseudoLookahead& p) {
            return "pseudo:" + std::to_string(p.depth) + ":" +
                   format_number(p.per_step_overhead.seconds());
          },
          [](const RandomLookahead& r) {
            return "random:" + std::to_string(r.depth) + ":" +
                   std::to_string(r.seed);
          },
          [](const StochasticLookahead& st) {
            return "stochastic:" + format_number(st.accuracy) + ":" +
                   std::to_string(st.depth) + ":" + std::to_string(st.seed);
          }},
      s);
}

LookaheadStrategy parse_strategy(std::string_view text) {
  const auto parts = text::split(text::trim(text), ':');
  const auto fail = [&](const std::string& why) -> LookaheadStrategy {
    throw ConfigurationError("bad lookahead strategy '" + std::string(text) +
                             "': " + why);
  };
  const auto int_at = [&](std::size_t i, std::int64_t fallback) {
    if (i >= parts.size()) return fallback;
    const auto v = text::parse_int(parts[i]);
    if (!v) fail("expected an integer at field " + std::to_string(i + 1));
    return *v;
  };
  const auto seed_at = [&](std::size_t i) -> std::uint64_t {
    const auto v = int_at(i, 0);
    if (v < 0) fail("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  };
  const std::string_view kind = parts[0];
  LookaheadStrategy s;
  if (kind == "none") {
    if (parts.size() != 1) return fail("takes no parameters");
    s = NoLookahead{};
  } else if (kind == "gt" || kind == "ground_truth") {
    if (parts.size() > 2) return fail("too many fields");
    s = GroundTruthLookahead{static_cast<int>(int_at(1, 1))};
  } else if (kind == "pseudo") {
    if (parts.size() > 3) return fail("too many fields");
    PseudoLookahead p;
    p.depth = static_cast<int>(int_at(1, 1));
    if (parts.size() > 2) {
      const auto o = text::parse_double(parts[2]);
      if (!o || !(*o >= 0.0)) return fail("overhead must be a non-negative number");
      p.per_step_overhead = TimeSpan::seconds(*o);
    }
    s = p;
  } else if (kind == "random") {
    if (parts.size() > 3) return fail("too many fields");
    s = RandomLookahead{static_cast<int>(int_at(1, 1)), seed_at(2)};
  } else if (kind == "stochastic") {
    if (parts.size() < 2 || parts.size() > 4) return fail("expected stochastic:p[:k[:seed]]");
    const auto p = text::parse_double(parts[1]);
    if (!p) return fail("accuracy must be a number");
    s = StochasticLookahead{*p, static_cast<int>(int_at(2, 1)), seed_at(3)};
  } else {
    return fail("unknown kind");
  }
  validate(s);
  return s;
}

namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool same_token(std::string_view a, std::string_view b) {
  return fold(a) == fold(b);
}

// Token at position i of the utterance, or the end marker past its end.
const std::string& actual_at(const Utterance& u, std::size_t i,
                             const std::string& end_marker) {
  return i < u.tokens.size() ? u.tokens[i].text : end_marker;
}

// Uniform draw from vocab excluding `correct` (case-folded).
const std::string& draw_wrong(rng::Stream& rng,
                              std::span<const std::string> vocab,
                              const std::string& correct) {
  const std::string key = fold(correct);
  std::size_t wrong = 0;
  for (const auto& v : vocab) wrong += fold(v) != key;
  if (wrong == 0) {
    throw ConfigurationError(
        "vocabulary has no token other than the correct one");
  }
  std::uint64_t pick = rng.index(wrong);
  for (const auto& v : vocab) {
    if (fold(v) == key) continue;
    if (pick-- == 0) return v;
  }
  return vocab.back();  // unreachable
}

}  // namespace

LookaheadAnnotation annotate(const Utterance& utterance,
                             const LookaheadStrategy& strategy,
                             IncrementalDecoder* decoder,
                             std::span<const std::string> vocabulary) {
  validate(strategy);
  LookaheadAnnotation out;
  out.strategy = to_string(strategy);
  out.depth = depth(strategy);
  if (decoder != nullptr) out.end_marker = decoder->end_marker();

  const bool needs_vocab = std::holds_alternative<RandomLookahead>(strategy) ||
                           std::holds_alternative<StochasticLookahead>(strategy);
  std::vector<std::string> decoder_vocab;
  if (std::holds_alternative<PseudoLookahead>(strategy) && decoder == nullptr) {
    throw ConfigurationError("pseudo lookahead requires a decoder");
  }
  if (needs_vocab && vocabulary.empty()) {
    if (decoder == nullptr) {
      throw ConfigurationError(out.strategy +
                               " requires a vocabulary or a decoder");
    }
    decoder_vocab = decoder->vocabulary();
    vocabulary = decoder_vocab;
  }
  if (needs_vocab && vocabulary.empty()) {
    throw ConfigurationError(out.strategy + ": empty vocabulary");
  }

  const std::size_t n = utterance.tokens.size();
  const auto k = static_cast<std::size_t>(out.depth);
  const auto emit = [&](std::size_t i) {
    return utterance.tokens[std::min(i, n - 1)].emit_time;
  };
  const auto mark = [&](LookaheadStep& step, std::size_t t) {
    for (std::size_t j = 0; j < step.predicted.size(); ++j) {
      step.correct.push_back(same_token(
          step.predicted[j], actual_at(utterance, t + 1 + j, out.end_marker)));
    }
  };

  out.steps.resize(n);
  std::visit(
      Overloaded{
          [&](const NoLookahead&) {
            for (std::size_t t = 0; t < n; ++t) out.steps[t].ready_time = emit(t);
          },
          [&](const GroundTruthLookahead&) {
            for (std::size_t t = 0; t < n; ++t) {
              auto& step = out.steps[t];
              for (std::size_t j = 1; j <= k; ++j) {
                step.predicted.push_back(actual_at(utterance, t + j, out.end_marker));
              }
              mark(step, t);
              step.ready_time = emit(t + k);
            }
          },
          [&](const PseudoLookahead& p) {
            StateGuard guard(*decoder);
            const TimeSpan overhead =
                p.per_step_overhead * static_cast<double>(k);
            for (std::size_t t = 0; t < n; ++t) {
              auto& step = out.steps[t];
              decoder->step(utterance.tokens[t].text);
              step.predicted = generate_pseudo(*decoder, p.depth);
              mark(step, t);
              step.ready_time = min(emit(t) + overhead, emit(t + k));
            }
          },
          [&](const RandomLookahead& r) {
            rng::Stream rng(r.seed);
            for (std::size_t t = 0; t < n; ++t) {
              auto& step = out.steps[t];
              for (std::size_t j = 0; j < k; ++j) {
                step.predicted.push_back(vocabulary[rng.index(vocabulary.size())]);
              }
              mark(step, t);
              step.ready_time = emit(t);
            }
          },
          [&](const StochasticLookahead& st) {
            rng::Stream rng(st.seed);
            for (std::size_t t = 0; t < n; ++t) {
              auto& step = out.steps[t];
              for (std::size_t j = 0; j < k; ++j) {
                const std::string& truth =
                    actual_at(utterance, t + 1 + j, out.end_marker);
                step.predicted.push_back(rng.bernoulli(st.accuracy)
                                             ? truth
                                             : draw_wrong(rng, vocabulary, truth));
              }
              mark(step, t);
              step.ready_time = emit(t);
            }
          }},
      strategy);
  return out;
}

double lookahead_accuracy(const LookaheadAnnotation& annotation) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (const auto& step : annotation.steps) {
    if (step.predicted.empty()) continue;
    ++total;
    correct += step.correct.front() ? 1 : 0;
  }
  if (total == 0) throw EmptyInput("annotation carries no predictions");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace s2st
