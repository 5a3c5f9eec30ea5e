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

#include <algorithm>

namespace s2st {

ScheduleResult schedule_playback(std::span<const SynthesisChunk> chunks,
                                 TimePoint input_end) {
  if (chunks.empty()) {
    throw EmptyUtterance("schedule_playback: no chunks to schedule");
  }

  ScheduleResult result;
  auto& entries = result.schedule.entries;
  auto& waits = result.report.per_chunk_queue_wait;
  entries.reserve(chunks.size());
  waits.reserve(chunks.size());

  TimePoint device_free = TimePoint::origin();
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const SynthesisChunk& c = chunks[i];
    if (i > 0 && c.chunk_index <= chunks[i - 1].chunk_index) {
      throw MalformedInput("schedule_playback: chunk index " +
                           std::to_string(c.chunk_index) + " at position " +
                           std::to_string(i) + " is not increasing");
    }
    const TimePoint computed = c.ready_time + c.compute_time;
    const TimePoint start = max(computed, device_free);
    const TimePoint end = start + c.play_duration;
    entries.push_back({c.chunk_index, start, end});
    waits.push_back(TimeSpan::seconds(start - computed));
    device_free = end;
  }

  LatencyReport& report = result.report;
  report.input_end = input_end;
  report.output_end = entries.back().play_end;
  report.start_latency = entries.front().play_start.since_origin();
  report.final_latency = report.output_end - input_end;
  report.output_before_input = report.final_latency < -kTimeTolerance;
  return result;
}

const char* to_string(ScheduleViolation v) {
  switch (v) {
    case ScheduleViolation::kNone:
      return "none";
    case ScheduleViolation::kSizeMismatch:
      return "size-mismatch";
    case ScheduleViolation::kOrdering:
      return "ordering";
    case ScheduleViolation::kNegativeLength:
      return "negative-length";
    case ScheduleViolation::kOverlap:
      return "overlap";
    case ScheduleViolation::kCausality:
      return "causality";
  }
  return "unknown";
}

namespace {

ScheduleValidation violation(ScheduleViolation kind, std::size_t index,
                             std::string message) {
  return {kind, index, std::move(message)};
}

}  // namespace

ScheduleValidation validate_schedule(const PlaybackSchedule& schedule,
                                     std::span<const SynthesisChunk> chunks) {
  const auto& entries = schedule.entries;
  if (entries.size() != chunks.size()) {
    return violation(ScheduleViolation::kSizeMismatch,
                     std::min(entries.size(), chunks.size()),
                     "schedule has " + std::to_string(entries.size()) +
                         " entries for " + std::to_string(chunks.size()) +
                         " chunks");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const PlaybackEntry& e = entries[i];
    if (e.chunk_index != chunks[i].chunk_index ||
        (i > 0 && e.chunk_index <= entries[i - 1].chunk_index)) {
      return violation(ScheduleViolation::kOrdering, i,
                       "entry " + std::to_string(i) + " has chunk index " +
                           std::to_string(e.chunk_index));
    }
    if (definitely_before(e.play_end, e.play_start)) {
      return violation(ScheduleViolation::kNegativeLength, i,
                       "play_end precedes play_start");
    }
    if (i > 0 && definitely_before(e.play_start, entries[i - 1].play_end)) {
      return violation(ScheduleViolation::kOverlap, i,
                       "starts before previous chunk finished playing");
    }
    const TimePoint computed = chunks[i].ready_time + chunks[i].compute_time;
    if (definitely_before(e.play_start, computed)) {
      return violation(ScheduleViolation::kCausality, i,
                       "starts before its inputs were ready and computed");
    }
  }
  return {};
}

}  // namespace s2st
