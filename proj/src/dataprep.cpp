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

#include "s2st/dataprep.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "rng.hpp"
#include "text_util.hpp"

namespace s2st {

std::pair<std::size_t, std::size_t> prefix_lengths(std::size_t length) {
  return {(length + 2) / 3, (2 * length + 2) / 3};
}

std::vector<ManifestEntry> augment_prefixes(std::span<const ManifestEntry> manifest,
                                            std::uint64_t seed) {
  if (manifest.empty()) throw EmptyInput("augment_prefixes: empty manifest");
  rng::Stream rng(seed);
  std::vector<ManifestEntry> out;
  out.reserve(manifest.size() * 2);
  for (const auto& entry : manifest) {
    if (!entry.is_full) {
      throw MalformedInput("augment_prefixes: '" + entry.sentence_id +
                           "' is not a full sentence");
    }
    if (entry.words.empty()) {
      throw MalformedInput("augment_prefixes: '" + entry.sentence_id +
                           "' has no words");
    }
    out.push_back(entry);
    const auto [third, two_thirds] = prefix_lengths(entry.words.size());
    const std::size_t length = rng.index(2) == 0 ? third : two_thirds;
    if (length >= entry.words.size()) continue;
    out.push_back(ManifestEntry{
        entry.sentence_id + ":prefix" + std::to_string(length),
        {entry.words.begin(),
         entry.words.begin() + static_cast<std::ptrdiff_t>(length)},
        false});
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                          const std::string& source_name,
                                          bool assume_full) {
  std::vector<ManifestEntry> out;
  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(source_name, line_no, "expected 'sentence_id \\t words'");
    }
    ManifestEntry e;
    e.sentence_id = std::string(text::trim(line.substr(0, tab)));
    e.words = text::words(line.substr(tab + 1));
    if (e.sentence_id.empty()) throw ParseError(source_name, line_no, "empty sentence id");
    e.is_full = !e.words.empty() && e.words.back() == kEosToken;
    if (e.is_full) e.words.pop_back();
    if (assume_full) e.is_full = true;
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         bool assume_full) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open manifest " + path.string());
  return parse_manifest(in, path.string(), assume_full);
}

void write_manifest(std::ostream& out, std::span<const ManifestEntry> entries) {
  for (const auto& e : entries) {
    out << e.sentence_id << '\t';
    for (std::size_t i = 0; i < e.words.size(); ++i) {
      if (i > 0) out << ' ';
      out << e.words[i];
    }
    if (e.is_full) out << (e.words.empty() ? "" : " ") << kEosToken;
    out << '\n';
  }
}

std::vector<AlignedUtterance> parse_alignment(std::istream& in,
                                              const std::string& source_name) {
  std::vector<AlignedUtterance> out;
  std::map<std::string, std::size_t, std::less<>> by_id;
  text::for_each_record(in, [&](std::string_view line, std::size_t line_no) {
    const auto fail = [&](const std::string& why) {
      throw ParseError(source_name, line_no, why);
    };
    const auto fields = text::split(line, '\t');
    const std::string_view id = text::trim(fields[0]);
    if (id.empty()) fail("empty utterance id");
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      it = by_id.emplace(std::string(id), out.size()).first;
      out.push_back({std::string(id), {}});
    }
    if (fields.size() == 1) return;
    if (fields.size() != 4) fail("expected 'utterance_id \\t word \\t start \\t end'");
    const std::string word(text::trim(fields[1]));
    const auto start = text::parse_double(fields[2]);
    const auto end = text::parse_double(fields[3]);
    if (word.empty()) fail("empty word");
    if (!start || !end || !std::isfinite(*start) || !std::isfinite(*end) ||
        *start < 0.0 || *end < *start) {
      fail("need 0 <= start <= end");
    }
    out[it->second].words.push_back({word, *start, *end});
  });
  return out;
}

AlignmentConversion alignment_to_trace(std::span<const AlignedUtterance> alignment) {
  AlignmentConversion result;
  for (const auto& a : alignment) {
    if (a.words.empty()) {
      result.warnings.push_back("utterance '" + a.utterance_id +
                                "' has no words; skipped");
      continue;
    }
    Utterance u;
    u.utterance_id = a.utterance_id;
    std::vector<TimePoint> times;
    for (std::size_t i = 0; i < a.words.size(); ++i) {
      if (i > 0 && a.words[i].end < a.words[i - 1].end) {
        throw MalformedInput("utterance '" + a.utterance_id + "': word " +
                             std::to_string(i) + " ends before word " +
                             std::to_string(i - 1));
      }
      times.push_back(TimePoint::at(a.words[i].end));
    }
    make_strictly_increasing(times);
    for (std::size_t i = 0; i < a.words.size(); ++i) {
      u.tokens.push_back({i, a.words[i].word, times[i], i + 1 == a.words.size()});
    }
    u.source_duration = TimeSpan::seconds(a.words.back().end);
    result.utterances.push_back(std::move(u));
  }
  return result;
}

}  // namespace s2st
