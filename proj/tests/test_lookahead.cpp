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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"

namespace s2st {
namespace {

// a -> b -> c -> end, order 2.
ToyDecoder chain_decoder() {
  std::istringstream in("a\tb\t1\nb\tc\t1\nc\t</s>\t1\n");
  return ToyDecoder::parse_counts(in, 2);
}

Utterance trace(const std::vector<std::string>& words,
                const std::vector<double>& times, bool eos = true) {
  Utterance u;
  u.utterance_id = "u";
  for (std::size_t i = 0; i < words.size(); ++i) {
    u.tokens.push_back({i, words[i], TimePoint::at(times[i]),
                        eos && i + 1 == words.size()});
  }
  return u;
}

TEST(ToyDecoder, GreedyChain) {
  ToyDecoder d = chain_decoder();
  d.step("a");
  EXPECT_EQ(generate_pseudo(d, 1), (std::vector<std::string>{"b"}));
  EXPECT_EQ(generate_pseudo(d, 3), (std::vector<std::string>{"b", "c", "</s>"}));
  EXPECT_EQ(generate_pseudo(d, 5), (std::vector<std::string>{"b", "c", "</s>"}));
}

TEST(ToyDecoder, PseudoDoesNotDisturbRealOutput) {
  ToyDecoder with = chain_decoder();
  ToyDecoder control = chain_decoder();
  with.step("a");
  control.step("a");
  generate_pseudo(with, 2);
  with.step("b");
  control.step("b");
  EXPECT_EQ(with.best_next(), "c");
  EXPECT_EQ(with.best_next(), control.best_next());
}

TEST(ToyDecoder, TiesBreakLexicographically) {
  std::istringstream in("x\tzeta\t2\nx\talpha\t2\nx\tmid\t1\n");
  ToyDecoder d = ToyDecoder::parse_counts(in, 2);
  d.step("x");
  EXPECT_EQ(d.best_next(), "alpha");
  const auto ranked = d.ranked_successors({"x"});
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].first, "alpha");
  EXPECT_EQ(ranked[1].first, "zeta");
  EXPECT_EQ(ranked[2].first, "mid");
}

TEST(ToyDecoder, BacksOffAndFallsBackToEndMarker) {
  std::istringstream in("\tthe\t5\nthe cat\tsat\t1\n");
  ToyDecoder d = ToyDecoder::parse_counts(in, 3);
  EXPECT_EQ(d.best_next(), "the");
  d.step("the");
  EXPECT_EQ(d.best_next(), "the");  // no "the" bigram: unigram back-off
  d.step("cat");
  EXPECT_EQ(d.best_next(), "sat");

  ToyDecoder empty(2);
  EXPECT_EQ(empty.best_next(), "</s>");
}

TEST(ToyDecoder, CountsFileErrors) {
  std::istringstream long_history("a b\tc\t1\n");
  EXPECT_THROW(ToyDecoder::parse_counts(long_history, 2), ParseError);
  std::istringstream bad_count("a\tb\tzero\n");
  EXPECT_THROW(ToyDecoder::parse_counts(bad_count, 2), ParseError);
  EXPECT_THROW(ToyDecoder(4), ConfigurationError);
}

TEST(ToyDecoder, TrainedOnCorpusPredictsIt) {
  const auto u = trace({"a", "b", "c"}, {0.1, 0.2, 0.3});
  const std::vector corpus{u};
  ToyDecoder d = ToyDecoder::train(corpus, 2);
  // Unigram counts tie at the empty history; "</s>" sorts first.
  EXPECT_EQ(d.best_next(), "</s>");
  d.step("a");
  EXPECT_EQ(d.best_next(), "b");
  d.step("b");
  d.step("c");
  EXPECT_EQ(d.best_next(), "</s>");
  EXPECT_EQ(d.vocabulary(), (std::vector<std::string>{"</s>", "a", "b", "c"}));
}

TEST(ToyDecoder, RandomInterleavingsKeepOutputs) {
  std::mt19937_64 rng(23);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    ToyDecoder d(1 + static_cast<int>(rng() % 3));
    for (int i = 0; i < 40; ++i) {
      std::vector<std::string> h;
      for (std::size_t j = 0; j < rng() % static_cast<std::size_t>(d.order()); ++j) {
        h.push_back(vocab[rng() % vocab.size()]);
      }
      d.add_count(h, vocab[rng() % vocab.size()], 1 + static_cast<std::int64_t>(rng() % 5));
    }
    ToyDecoder control = d;
    for (int t = 0; t < 20; ++t) {
      if (rng() % 2) generate_pseudo(d, 1 + static_cast<int>(rng() % 4));
      const std::string tok = vocab[rng() % vocab.size()];
      d.step(tok);
      control.step(tok);
      ASSERT_EQ(d.best_next(), control.best_next());
    }
  }
}

TEST(Annotate, GroundTruthIsAlwaysCorrect) {
  const auto u = trace({"a", "B", "c"}, {0.28, 0.56, 0.84});
  const auto ann = annotate(u, GroundTruthLookahead{1});
  ASSERT_EQ(ann.steps.size(), 3u);
  EXPECT_EQ(ann.steps[0].predicted, (std::vector<std::string>{"B"}));
  EXPECT_EQ(ann.steps[2].predicted, (std::vector<std::string>{"</s>"}));
  EXPECT_NEAR(ann.steps[0].ready_time.seconds(), 0.56, 1e-12);
  EXPECT_NEAR(ann.steps[1].ready_time.seconds(), 0.84, 1e-12);
  EXPECT_NEAR(ann.steps[2].ready_time.seconds(), 0.84, 1e-12);
  EXPECT_DOUBLE_EQ(lookahead_accuracy(ann), 1.0);

  const auto deep = annotate(u, GroundTruthLookahead{2});
  EXPECT_EQ(deep.steps[1].predicted, (std::vector<std::string>{"c", "</s>"}));
  EXPECT_NEAR(deep.steps[0].ready_time.seconds(), 0.84, 1e-12);
}

TEST(Annotate, NoneHasNoPredictions) {
  const auto u = trace({"a", "b"}, {0.3, 0.6});
  const auto ann = annotate(u, NoLookahead{});
  EXPECT_TRUE(ann.steps[0].predicted.empty());
  EXPECT_NEAR(ann.steps[1].ready_time.seconds(), 0.6, 1e-12);
  EXPECT_THROW(lookahead_accuracy(ann), EmptyInput);
}

TEST(Annotate, PseudoUsesDecoderAndRestoresIt) {
  const auto u = trace({"a", "b", "c"}, {0.28, 0.56, 0.84});
  ToyDecoder d = chain_decoder();
  const auto ann = annotate(u, PseudoLookahead{1, TimeSpan::seconds(0.01)}, &d);
  EXPECT_TRUE(d.history().empty());
  EXPECT_EQ(ann.steps[0].predicted, (std::vector<std::string>{"b"}));
  EXPECT_NEAR(ann.steps[0].ready_time.seconds(), 0.29, 1e-12);
  EXPECT_NEAR(ann.steps[2].ready_time.seconds(), 0.84, 1e-12);  // capped
  EXPECT_DOUBLE_EQ(lookahead_accuracy(ann), 1.0);
  EXPECT_THROW(annotate(u, PseudoLookahead{}), ConfigurationError);
}

TEST(Annotate, CaseFoldedCorrectness) {
  const auto u = trace({"a", "b"}, {0.1, 0.2});
  std::istringstream in("a\tB\t1\n");
  ToyDecoder d = ToyDecoder::parse_counts(in, 2);
  const auto ann = annotate(u, PseudoLookahead{}, &d);
  EXPECT_TRUE(ann.steps[0].correct[0]);
}

TEST(Annotate, PseudoReadyNeverLaterThanGroundTruth) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> words;
    std::vector<double> times;
    double t = 0.0;
    for (std::size_t i = 0; i < 2 + rng() % 15; ++i) {
      t += 0.001 + 0.001 * static_cast<double>(rng() % 400);
      words.push_back("w" + std::to_string(rng() % 6));
      times.push_back(t);
    }
    const auto u = trace(words, times);
    const int k = 1 + static_cast<int>(rng() % 3);
    const double overhead = 0.001 * static_cast<double>(rng() % 100);
    const std::vector corpus{u};
    ToyDecoder d = ToyDecoder::train(corpus, 2);
    const auto pseudo = annotate(u, PseudoLookahead{k, TimeSpan::seconds(overhead)}, &d);
    const auto truth = annotate(u, GroundTruthLookahead{k});
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double p = pseudo.steps[i].ready_time.seconds();
      const double g = truth.steps[i].ready_time.seconds();
      EXPECT_LE(p, g + 1e-12);
      const double own = u.tokens[i].emit_time.seconds() + k * overhead;
      if (own < g - 1e-9) EXPECT_LT(p, g);
    }
  }
}

TEST(Annotate, StochasticExtremesAndReproducibility) {
  std::vector<std::string> words;
  std::vector<double> times;
  for (int i = 0; i < 200; ++i) {
    words.push_back("w" + std::to_string(i % 17));
    times.push_back(0.1 * (i + 1));
  }
  const auto u = trace(words, times);
  const std::vector<std::string> vocab{"</s>", "w0", "w1", "w2", "w3", "w4", "w5",
                                       "w6", "w7", "w8", "w9", "w10", "w11", "w12",
                                       "w13", "w14", "w15", "w16"};
  const auto perfect = annotate(u, StochasticLookahead{1.0, 1, 4}, nullptr, vocab);
  const auto truth = annotate(u, GroundTruthLookahead{1});
  for (std::size_t i = 0; i < words.size(); ++i) {
    EXPECT_EQ(perfect.steps[i].correct, truth.steps[i].correct);
  }
  const auto never = annotate(u, StochasticLookahead{0.0, 2, 4}, nullptr, vocab);
  for (const auto& step : never.steps) {
    for (bool c : step.correct) EXPECT_FALSE(c);
  }
  const auto a = annotate(u, StochasticLookahead{0.5, 1, 99}, nullptr, vocab);
  const auto b = annotate(u, StochasticLookahead{0.5, 1, 99}, nullptr, vocab);
  for (std::size_t i = 0; i < words.size(); ++i) {
    EXPECT_EQ(a.steps[i].predicted, b.steps[i].predicted);
  }
  EXPECT_THROW(annotate(u, StochasticLookahead{0.5, 1, 1}), ConfigurationError);
}

TEST(Annotate, StochasticAccuracyNearTarget) {
  std::vector<std::string> words;
  std::vector<double> times;
  for (int i = 0; i < 10000; ++i) {
    words.push_back("w" + std::to_string(i % 50));
    times.push_back(0.01 * (i + 1));
  }
  const auto u = trace(words, times);
  std::vector<std::string> vocab;
  for (int i = 0; i < 50; ++i) vocab.push_back("w" + std::to_string(i));
  vocab.push_back("</s>");
  const auto ann = annotate(u, StochasticLookahead{0.7, 1, 2024}, nullptr, vocab);
  EXPECT_NEAR(lookahead_accuracy(ann), 0.7, 0.03);
}

TEST(Accuracy, Arithmetic) {
  LookaheadAnnotation ann;
  for (int i = 0; i < 10; ++i) {
    ann.steps.push_back({{"x"}, {i < 7}, TimePoint::at(0.0)});
  }
  EXPECT_DOUBLE_EQ(lookahead_accuracy(ann), 0.7);
  LookaheadAnnotation empty;
  EXPECT_THROW(lookahead_accuracy(empty), EmptyInput);
}

TEST(Strategy, ParseAndPrint) {
  EXPECT_EQ(to_string(parse_strategy("gt")), "gt:1");
  EXPECT_EQ(to_string(parse_strategy("pseudo:2:0.02")), "pseudo:2:0.02");
  EXPECT_EQ(to_string(parse_strategy("stochastic:0.7:1:5")), "stochastic:0.7:1:5");
  EXPECT_EQ(to_string(parse_strategy("none")), "none");
  EXPECT_EQ(depth(parse_strategy("random:3")), 3);
  EXPECT_THROW(parse_strategy("gt:0"), ConfigurationError);
  EXPECT_THROW(parse_strategy("stochastic:1.5"), ConfigurationError);
  EXPECT_THROW(parse_strategy("beam:2"), ConfigurationError);
  EXPECT_THROW(parse_strategy("none:1"), ConfigurationError);
}

}  // namespace
}  // namespace s2st
