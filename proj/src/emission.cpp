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

#include "s2st/emission.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "text_util.hpp"

namespace s2st {

void WaitKConfig::validate() const {
  if (k < 1) throw ConfigurationError("wait-k: k must be >= 1");
  if (pre_decision_segments < 1) {
    throw ConfigurationError("wait-k: pre_decision_segments must be >= 1");
  }
  if (segment.seconds() <= 0.0) {
    throw ConfigurationError("wait-k: segment length must be positive");
  }
}

std::vector<std::string> Utterance::words() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::vector<TimePoint> waitk_emit_times(std::size_t n_tokens,
                                        const WaitKConfig& cfg,
                                        TimeSpan source_duration) {
  if (n_tokens == 0) {
    throw EmptyUtterance("waitk_emit_times: n_tokens must be >= 1");
  }
  cfg.validate();
  const double period = cfg.token_period().seconds();
  std::vector<TimePoint> out;
  out.reserve(n_tokens);
  TimePoint prev = TimePoint::origin();
  for (std::size_t t = 1; t <= n_tokens; ++t) {
    const double read =
        static_cast<double>(static_cast<std::size_t>(cfg.k) + t - 1) * period;
    const TimePoint available =
        TimePoint::at(std::min(read, source_duration.seconds()));
    prev = max(available, prev) + cfg.st_compute_per_token;
    out.push_back(prev);
  }
  return out;
}

void make_strictly_increasing(std::span<TimePoint> times) {
  // Work on the microsecond grid so the fixed six-decimal trace format
  // preserves strict ordering exactly.
  std::int64_t prev = -1;
  for (auto& t : times) {
    std::int64_t us = std::llround(t.seconds() * 1e6);
    if (us <= prev) us = prev + 1;
    t = TimePoint::at(static_cast<double>(us) / 1e6);
    prev = us;
  }
}

Utterance make_waitk_utterance(std::string utterance_id,
                               std::span<const std::string> words,
                               const WaitKConfig& cfg,
                               TimeSpan source_duration) {
  auto times = waitk_emit_times(words.size(), cfg, source_duration);
  make_strictly_increasing(times);
  Utterance u;
  u.utterance_id = std::move(utterance_id);
  u.source_duration = source_duration;
  for (std::size_t i = 0; i < words.size(); ++i) {
    u.tokens.push_back({i, words[i], times[i], i + 1 == words.size()});
  }
  return u;
}

Utterance retime_constant(const Utterance& u, TimeSpan period) {
  if (period.seconds() <= 0.0) {
    throw ConfigurationError("token period must be positive");
  }
  Utterance out = u;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    out.tokens[i].emit_time =
        TimePoint::at(period.seconds() * static_cast<double>(i + 1));
  }
  return out;
}

Utterance retime_waitk(const Utterance& u, const WaitKConfig& cfg) {
  if (u.tokens.empty()) return u;
  const double unbounded =
      cfg.token_period().seconds() *
      static_cast<double>(static_cast<std::size_t>(cfg.k) + u.tokens.size());
  const TimeSpan source =
      u.source_duration.value_or(TimeSpan::seconds(unbounded));
  auto times = waitk_emit_times(u.tokens.size(), cfg, source);
  make_strictly_increasing(times);
  Utterance out = u;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    out.tokens[i].emit_time = times[i];
  }
  return out;
}

void validate_utterance(const Utterance& u) {
  const auto fail = [&](std::size_t i, const std::string& what) {
    throw MalformedInput("utterance '" + u.utterance_id + "', token " +
                         std::to_string(i) + ": " + what);
  };
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    const TokenEvent& t = u.tokens[i];
    if (t.index != i) fail(i, "index " + std::to_string(t.index) + " out of sequence");
    if (t.text.empty()) fail(i, "empty token text");
    if (i > 0 && t.emit_time.seconds() <
                     u.tokens[i - 1].emit_time.seconds() + kTimeTolerance - 1e-12) {
      fail(i, "emit_time " + format_seconds(t.emit_time.seconds()) +
                  " does not strictly increase");
    }
    if (t.is_eos && i + 1 != u.tokens.size()) fail(i, "EOS flag before the last token");
  }
}

std::vector<Utterance> parse_trace(std::istream& in,
                                   const std::string& source_name) {
  std::vector<Utterance> utterances;
  std::map<std::string, std::size_t, std::less<>> by_id;
  const auto slot = [&](std::string_view id) -> Utterance& {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      it = by_id.emplace(std::string(id), utterances.size()).first;
      utterances.push_back(Utterance{std::string(id), {}, std::nullopt});
    }
    return utterances[it->second];
  };

  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto fail = [&](const std::string& what) {
      throw ParseError(source_name, line_no, what);
    };
    const auto fields = text::split(line, '\t');
    if (fields[0] == "@source_duration") {
      if (fields.size() != 3) fail("@source_duration needs 3 fields");
      const auto s = text::parse_double(fields[2]);
      if (!s || !std::isfinite(*s) || *s < 0.0) fail("bad source duration");
      if (fields[1].empty()) fail("empty utterance id");
      slot(fields[1]).source_duration = TimeSpan::seconds(*s);
      return;
    }
    if (fields.size() != 5) {
      fail("expected 5 tab-separated fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail("empty utterance id");
    const auto index = text::parse_int(fields[1]);
    if (!index || *index < 0) fail("bad token index");
    const auto t = text::parse_double(fields[3]);
    if (!t || !std::isfinite(*t) || *t < 0.0) fail("bad emit time");
    const auto eos = text::trim(fields[4]);
    if (eos != "0" && eos != "1") fail("eos flag must be 0 or 1");
    slot(fields[0]).tokens.push_back({static_cast<std::size_t>(*index),
                                      std::string(fields[2]), TimePoint::at(*t),
                                      eos == "1"});
  });

  for (const auto& u : utterances) validate_utterance(u);
  return utterances;
}

std::vector<Utterance> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open trace " + path.string());
  return parse_trace(in, path.string());
}

void write_trace(std::ostream& out, std::span<const Utterance> utterances) {
  for (const auto& u : utterances) {
    if (u.source_duration) {
      out << "@source_duration\t" << u.utterance_id << '\t'
          << format_seconds(u.source_duration->seconds()) << '\n';
    }
    for (const auto& t : u.tokens) {
      out << u.utterance_id << '\t' << t.index << '\t' << t.text << '\t'
          << format_seconds(t.emit_time.seconds()) << '\t'
          << (t.is_eos ? 1 : 0) << '\n';
    }
  }
}

void save_trace(const std::filesystem::path& path,
                std::span<const Utterance> utterances) {
  std::ofstream out(path);
  if (!out) throw MalformedInput("cannot write trace " + path.string());
  write_trace(out, utterances);
}

std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", s);
  std::string out(buf);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

}  // namespace s2st
