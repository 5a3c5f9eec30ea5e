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
#include <span>
#include <string>
#include <vector>

#include "s2st/emission.hpp"

namespace s2st {

inline constexpr std::string_view kEosToken = "<EOS>";

// Training manifest line. Full sentences end with the EOS token; prefixes
// do not.
struct ManifestEntry {
  std::string sentence_id;
  std::vector<std::string> words;
  bool is_full = true;
};

// Candidate prefix lengths for a sentence of `length` words:
// ceil(length / 3) and ceil(2 * length / 3).
std::pair<std::size_t, std::size_t> prefix_lengths(std::size_t length);

// Keeps every full sentence and adds one prefix per sentence, its length
// drawn uniformly (seeded) between the two candidates. A draw equal to the
// full length is skipped. Output order: each full entry followed by its
// prefix. Prefix ids are '<sentence_id>:prefix<length>'.
//
// Throws EmptyInput for an empty manifest and MalformedInput for partial or
// empty input entries.
std::vector<ManifestEntry> augment_prefixes(std::span<const ManifestEntry> manifest,
                                            std::uint64_t seed);

// 'sentence_id \t word word ... [<EOS>]'. On read, entries ending in <EOS>
// are full and the marker is stripped. With assume_full, every entry read
// is full regardless of the marker.
std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                          const std::string& source_name = "<manifest>",
                                          bool assume_full = false);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         bool assume_full = false);
void write_manifest(std::ostream& out, std::span<const ManifestEntry> entries);

struct AlignedWord {
  std::string word;
  double start = 0.0;
  double end = 0.0;
};

struct AlignedUtterance {
  std::string utterance_id;
  std::vector<AlignedWord> words;
};

// 'utterance_id \t word \t start_s \t end_s'. A line with only an utterance
// id declares an utterance without words.
std::vector<AlignedUtterance> parse_alignment(std::istream& in,
                                              const std::string& source_name = "<alignment>");

struct AlignmentConversion {
  std::vector<Utterance> utterances;
  std::vector<std::string> warnings;
};

// One token per word, emitted at the word's end time. Ties are nudged
// forward by one microsecond; the last token carries EOS and the source
// duration is the last end time. Utterances without words are skipped with
// a warning. Throws MalformedInput when end times decrease.
AlignmentConversion alignment_to_trace(std::span<const AlignedUtterance> alignment);

}  // namespace s2st
