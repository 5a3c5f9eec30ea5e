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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

namespace s2st {
namespace {

ManifestEntry sentence(const std::string& id, std::size_t n) {
  ManifestEntry e{id, {}, true};
  for (std::size_t i = 0; i < n; ++i) e.words.push_back(id + "_" + std::to_string(i));
  return e;
}

TEST(PrefixLengths, CeilOfThirds) {
  EXPECT_EQ(prefix_lengths(9), (std::pair<std::size_t, std::size_t>{3, 6}));
  EXPECT_EQ(prefix_lengths(10), (std::pair<std::size_t, std::size_t>{4, 7}));
  EXPECT_EQ(prefix_lengths(1), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(prefix_lengths(2), (std::pair<std::size_t, std::size_t>{1, 2}));
}

TEST(AugmentPrefixes, NineWordSentence) {
  const std::vector manifest{sentence("s", 9)};
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const auto out = augment_prefixes(manifest, seed);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_TRUE(out[0].is_full);
    EXPECT_EQ(out[0].words, manifest[0].words);
    EXPECT_FALSE(out[1].is_full);
    const std::size_t len = out[1].words.size();
    seen.insert(len);
    EXPECT_TRUE(len == 3 || len == 6);
    EXPECT_TRUE(std::equal(out[1].words.begin(), out[1].words.end(),
                           manifest[0].words.begin()));
  }
  EXPECT_EQ(seen, (std::set<std::size_t>{3, 6}));
}

TEST(AugmentPrefixes, OneWordSentenceHasNoPrefix) {
  const std::vector manifest{sentence("s", 1)};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto out = augment_prefixes(manifest, seed);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_TRUE(out[0].is_full);
  }
}

TEST(AugmentPrefixes, DeterministicBytes) {
  std::vector<ManifestEntry> manifest;
  for (int i = 0; i < 50; ++i) manifest.push_back(sentence("s" + std::to_string(i), 3 + i % 11));
  std::ostringstream a, b, c;
  write_manifest(a, augment_prefixes(manifest, 42));
  write_manifest(b, augment_prefixes(manifest, 42));
  write_manifest(c, augment_prefixes(manifest, 43));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(AugmentPrefixes, Errors) {
  EXPECT_THROW(augment_prefixes({}, 0), EmptyInput);
  auto partial = sentence("p", 4);
  partial.is_full = false;
  const std::vector bad{partial};
  EXPECT_THROW(augment_prefixes(bad, 0), MalformedInput);
  const std::vector empty{ManifestEntry{"e", {}, true}};
  EXPECT_THROW(augment_prefixes(empty, 0), MalformedInput);
}

TEST(Manifest, EosMarksFullEntries) {
  std::istringstream in("a\thello world <EOS>\nb\thello\n");
  const auto entries = parse_manifest(in);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_TRUE(entries[0].is_full);
  EXPECT_EQ(entries[0].words.size(), 2u);
  EXPECT_FALSE(entries[1].is_full);
  std::ostringstream out;
  write_manifest(out, entries);
  EXPECT_EQ(out.str(), "a\thello world <EOS>\nb\thello\n");
}

std::vector<AlignedUtterance> alignment(const std::string& text) {
  std::istringstream in(text);
  return parse_alignment(in);
}

TEST(AlignmentToTrace, PassesEndTimesThrough) {
  const auto conv = alignment_to_trace(
      alignment("u\tla\t0.0\t0.4\nu\tcasa\t0.4\t0.9\nu\tazul\t0.95\t1.3\n"));
  ASSERT_EQ(conv.utterances.size(), 1u);
  const auto& tokens = conv.utterances[0].tokens;
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_DOUBLE_EQ(tokens[0].emit_time.seconds(), 0.4);
  EXPECT_DOUBLE_EQ(tokens[1].emit_time.seconds(), 0.9);
  EXPECT_DOUBLE_EQ(tokens[2].emit_time.seconds(), 1.3);
  EXPECT_FALSE(tokens[1].is_eos);
  EXPECT_TRUE(tokens[2].is_eos);
}

TEST(AlignmentToTrace, JittersTies) {
  const auto conv = alignment_to_trace(alignment("u\ta\t0.1\t0.5\nu\tb\t0.2\t0.5\n"));
  std::ostringstream out;
  write_trace(out, conv.utterances);
  EXPECT_EQ(out.str(),
            "@source_duration\tu\t0.500000\n"
            "u\t0\ta\t0.500000\t0\n"
            "u\t1\tb\t0.500001\t1\n");
}

TEST(AlignmentToTrace, SkipsEmptyUtterances) {
  const auto conv = alignment_to_trace(alignment("empty\nu\ta\t0.0\t0.2\n"));
  ASSERT_EQ(conv.utterances.size(), 1u);
  EXPECT_EQ(conv.utterances[0].utterance_id, "u");
  ASSERT_EQ(conv.warnings.size(), 1u);
  EXPECT_NE(conv.warnings[0].find("empty"), std::string::npos);
}

TEST(AlignmentToTrace, DecreasingEndsAreRejected) {
  try {
    alignment_to_trace(alignment("utt9\ta\t0.0\t0.6\nutt9\tb\t0.1\t0.5\n"));
    FAIL() << "expected MalformedInput";
  } catch (const MalformedInput& e) {
    EXPECT_NE(std::string(e.what()).find("utt9"), std::string::npos);
  }
  EXPECT_THROW(alignment("u\ta\t0.5\t0.2\n"), ParseError);
}

TEST(AlignmentToTrace, OutputAlwaysLoads) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    std::ostringstream text;
    for (int u = 0; u < 3; ++u) {
      double end = 0.0;
      for (std::size_t w = 0; w < 1 + rng() % 10; ++w) {
        // Frequent exact ties and sub-microsecond steps.
        end += (rng() % 3 == 0) ? 0.0 : 1e-7 * static_cast<double>(rng() % 20);
        text << "u" << u << "\tw" << w << "\t0\t" << end << "\n";
      }
    }
    const auto conv = alignment_to_trace(alignment(text.str()));
    std::stringstream buf;
    write_trace(buf, conv.utterances);
    EXPECT_NO_THROW(parse_trace(buf)) << text.str();
  }
}

}  // namespace
}  // namespace s2st
