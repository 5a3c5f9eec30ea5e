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

#include "s2st/timeline.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace s2st {
namespace {

SynthesisChunk chunk(std::size_t index, double ready, double compute,
                     double duration) {
  SynthesisChunk c;
  c.chunk_index = index;
  c.ready_time = TimePoint::at(ready);
  c.compute_time = TimeSpan::seconds(compute);
  c.play_duration = TimeSpan::seconds(duration);
  return c;
}

// Constant inter-ready gap r, duration d, zero compute, N chunks.
std::vector<SynthesisChunk> constant_rate(double r, double d, int n) {
  std::vector<SynthesisChunk> out;
  for (int i = 0; i < n; ++i) out.push_back(chunk(i, r * (i + 1), 0.0, d));
  return out;
}

TEST(SchedulePlayback, SingleChunkEndsWithInput) {
  const std::vector chunks{chunk(0, 0.0, 0.0, 2.0)};
  const auto r = schedule_playback(chunks, TimePoint::at(2.0));
  EXPECT_DOUBLE_EQ(r.report.final_latency, 0.0);
  EXPECT_FALSE(r.report.output_before_input);
  EXPECT_DOUBLE_EQ(r.report.start_latency.seconds(), 0.0);
}

TEST(SchedulePlayback, QueueRecurrenceThreeChunks) {
  const std::vector chunks{chunk(0, 0.28, 0, 1.0), chunk(1, 0.56, 0, 1.0),
                           chunk(2, 0.84, 0, 1.0)};
  const auto r = schedule_playback(chunks, TimePoint::at(0.84));
  ASSERT_EQ(r.schedule.entries.size(), 3u);
  EXPECT_NEAR(r.schedule.entries[0].play_end.seconds(), 1.28, 1e-12);
  EXPECT_NEAR(r.schedule.entries[1].play_end.seconds(), 2.28, 1e-12);
  EXPECT_NEAR(r.schedule.entries[2].play_end.seconds(), 3.28, 1e-12);
  EXPECT_NEAR(r.report.final_latency, 2.44, 1e-12);
  EXPECT_NEAR(r.report.per_chunk_queue_wait[1].seconds(), 0.72, 1e-12);
  EXPECT_NEAR(r.report.per_chunk_queue_wait[2].seconds(), 1.44, 1e-12);
}

TEST(SchedulePlayback, TokenRateCongestion) {
  const auto fast = schedule_playback(constant_rate(0.22, 0.28, 20),
                                      TimePoint::at(0.22 * 20));
  const auto paced = schedule_playback(constant_rate(0.28, 0.28, 20),
                                       TimePoint::at(0.28 * 20));
  EXPECT_NEAR(fast.report.output_end.seconds(), 5.82, 1e-9);
  EXPECT_NEAR(fast.report.final_latency, 1.42, 1e-9);
  EXPECT_NEAR(paced.report.final_latency, 0.28, 1e-9);
  EXPECT_NEAR(fast.report.final_latency - paced.report.final_latency, 1.14, 1e-9);
}

TEST(SchedulePlayback, NegativeLatencyIsFlagged) {
  const std::vector chunks{chunk(0, 0.0, 0.0, 0.5)};
  const auto r = schedule_playback(chunks, TimePoint::at(2.0));
  EXPECT_NEAR(r.report.final_latency, -1.5, 1e-12);
  EXPECT_TRUE(r.report.output_before_input);
}

TEST(SchedulePlayback, Errors) {
  EXPECT_THROW(schedule_playback({}, TimePoint::at(1.0)), EmptyUtterance);
  const std::vector bad{chunk(1, 0, 0, 1), chunk(1, 1, 0, 1)};
  EXPECT_THROW(schedule_playback(bad, TimePoint::at(1.0)), MalformedInput);
  const std::vector backwards{chunk(2, 0, 0, 1), chunk(1, 1, 0, 1)};
  EXPECT_THROW(schedule_playback(backwards, TimePoint::at(1.0)), MalformedInput);
}

TEST(ValidateSchedule, ConstructedSchedulePasses) {
  const auto chunks = constant_rate(0.22, 0.28, 5);
  const auto r = schedule_playback(chunks, TimePoint::at(1.1));
  EXPECT_TRUE(validate_schedule(r.schedule, chunks).ok());
}

TEST(ValidateSchedule, DetectsOverlap) {
  const std::vector chunks{chunk(0, 0, 0, 1), chunk(1, 0, 0, 1), chunk(2, 0, 0, 1)};
  PlaybackSchedule s{{{0, TimePoint::at(0), TimePoint::at(1)},
                      {1, TimePoint::at(1), TimePoint::at(2)},
                      {2, TimePoint::at(1.5), TimePoint::at(2.5)}}};
  const auto v = validate_schedule(s, chunks);
  EXPECT_EQ(v.violation, ScheduleViolation::kOverlap);
  EXPECT_EQ(v.index, 2u);
}

TEST(ValidateSchedule, DetectsCausality) {
  const std::vector chunks{chunk(0, 0.5, 0, 1)};
  PlaybackSchedule s{{{0, TimePoint::at(0.2), TimePoint::at(1.2)}}};
  const auto v = validate_schedule(s, chunks);
  EXPECT_EQ(v.violation, ScheduleViolation::kCausality);
  EXPECT_EQ(v.index, 0u);
}

TEST(ValidateSchedule, DetectsOrderingAndSize) {
  const std::vector chunks{chunk(0, 0, 0, 1), chunk(1, 0, 0, 1)};
  PlaybackSchedule swapped{{{1, TimePoint::at(0), TimePoint::at(1)},
                            {0, TimePoint::at(1), TimePoint::at(2)}}};
  EXPECT_EQ(validate_schedule(swapped, chunks).violation,
            ScheduleViolation::kOrdering);
  PlaybackSchedule short_schedule{{{0, TimePoint::at(0), TimePoint::at(1)}}};
  EXPECT_EQ(validate_schedule(short_schedule, chunks).violation,
            ScheduleViolation::kSizeMismatch);
}

TEST(ScheduleProperties, MatchesTickOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ms = testing::random_ms_chunks(rng);
    const auto expected = testing::tick_oracle(ms);
    const auto chunks = testing::to_chunks(ms);
    const auto r = schedule_playback(chunks, chunks.back().ready_time);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      EXPECT_NEAR(r.schedule.entries[i].play_start.seconds(),
                  static_cast<double>(expected[i].start_ms) / 1000.0, 1e-3);
      EXPECT_NEAR(r.schedule.entries[i].play_end.seconds(),
                  static_cast<double>(expected[i].end_ms) / 1000.0, 1e-3);
    }
  }
}

TEST(ScheduleProperties, MonotoneInDurationAndReadiness) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    auto chunks = testing::random_chunks(rng);
    const TimePoint input_end = chunks.back().ready_time;
    const double base = schedule_playback(chunks, input_end).report.final_latency;
    const std::size_t i = rng() % chunks.size();

    auto longer = chunks;
    longer[i].play_duration += TimeSpan::seconds(bump(rng));
    EXPECT_GE(schedule_playback(longer, input_end).report.final_latency,
              base - kTimeTolerance);

    auto later = chunks;
    later[i].ready_time = later[i].ready_time + TimeSpan::seconds(bump(rng));
    EXPECT_GE(schedule_playback(later, input_end).report.final_latency,
              base - kTimeTolerance);
  }
}

TEST(ScheduleProperties, ShiftInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> shift(0.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto chunks = testing::random_chunks(rng);
    const TimePoint input_end = chunks.back().ready_time;
    const auto base = schedule_playback(chunks, input_end).report;
    const double t = shift(rng);
    for (auto& c : chunks) c.ready_time = c.ready_time + TimeSpan::seconds(t);
    const auto moved =
        schedule_playback(chunks, input_end + TimeSpan::seconds(t)).report;
    EXPECT_NEAR(moved.start_latency.seconds(), base.start_latency.seconds() + t, 1e-9);
    // Idle gaps in playback can absorb the shift but never amplify it.
    EXPECT_LE(moved.final_latency, base.final_latency + 1e-9);
    EXPECT_GE(moved.final_latency, base.final_latency - t - 1e-9);
  }
}

TEST(ScheduleProperties, CongestionClosedForm) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> rate(0.05, 0.5);
  std::uniform_int_distribution<int> count(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = rate(rng);
    const double d = r + std::uniform_real_distribution<double>(0.001, 0.5)(rng);
    const int n = count(rng);
    const auto rep = schedule_playback(constant_rate(r, d, n), TimePoint::at(r * n)).report;
    EXPECT_NEAR(rep.final_latency, r + n * (d - r), 1e-9);
  }
}

}  // namespace
}  // namespace s2st
