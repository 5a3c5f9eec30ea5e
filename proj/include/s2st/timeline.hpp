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
#include <span>
#include <string>
#include <vector>

#include "s2st/time.hpp"

namespace s2st {

// One emitted audio segment of an incremental synthesizer.
//
// ready_time is when every input the chunk depends on (committed words and
// any lookahead) was available; compute_time is the synthesis cost and
// play_duration the length of the emitted audio.
struct SynthesisChunk {
  std::size_t chunk_index = 0;
  std::vector<std::string> words;
  TimePoint ready_time;
  TimeSpan compute_time;
  TimeSpan play_duration;
  std::int64_t frame_count = 0;
};

struct PlaybackEntry {
  std::size_t chunk_index = 0;
  TimePoint play_start;
  TimePoint play_end;
};

struct PlaybackSchedule {
  std::vector<PlaybackEntry> entries;
};

struct LatencyReport {
  TimePoint input_end;
  TimePoint output_end;
  // play_start of the first chunk, measured from the time origin.
  TimeSpan start_latency;
  // output_end - input_end. Signed; output_before_input is set when the
  // output finished earlier than the input by more than the tolerance.
  double final_latency = 0.0;
  bool output_before_input = false;
  // Time each chunk spent waiting for the previous chunk to stop playing
  // after it was computed.
  std::vector<TimeSpan> per_chunk_queue_wait;
};

struct ScheduleResult {
  PlaybackSchedule schedule;
  LatencyReport report;
};

// Plays chunks back to back on a single output device:
//
//   play_start(i) = max(ready(i) + compute(i), play_end(i-1)),  play_end(-1) = 0
//   play_end(i)   = play_start(i) + duration(i)
//
// Computation of chunk i may overlap playback of chunk i-1.
//
// Throws EmptyUtterance for an empty list and MalformedInput when chunk
// indices are not strictly increasing.
ScheduleResult schedule_playback(std::span<const SynthesisChunk> chunks,
                                 TimePoint input_end);

enum class ScheduleViolation {
  kNone,
  kSizeMismatch,
  kOrdering,
  kNegativeLength,
  kOverlap,
  kCausality,
};

const char* to_string(ScheduleViolation v);

struct ScheduleValidation {
  ScheduleViolation violation = ScheduleViolation::kNone;
  std::size_t index = 0;
  std::string message;

  bool ok() const { return violation == ScheduleViolation::kNone; }
};

// Checks a schedule against the chunks it was built from and reports the
// first violated invariant. Never throws on invalid schedules.
ScheduleValidation validate_schedule(const PlaybackSchedule& schedule,
                                     std::span<const SynthesisChunk> chunks);

}  // namespace s2st
