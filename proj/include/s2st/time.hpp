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

#include <cmath>
#include <compare>
#include <string>

#include "s2st/error.hpp"

namespace s2st {

// All time comparisons in the library use this tolerance (seconds).
inline constexpr double kTimeTolerance = 1e-6;

namespace detail {

inline double checked_seconds(double s, const char* what) {
  if (!std::isfinite(s) || s < 0.0) {
    throw ConfigurationError(std::string(what) +
                             " must be finite and non-negative, got " +
                             std::to_string(s));
  }
  return s;
}

}  // namespace detail

// Non-negative length of time in seconds.
class TimeSpan {
 public:
  constexpr TimeSpan() = default;

  static TimeSpan seconds(double s) {
    return TimeSpan(detail::checked_seconds(s, "TimeSpan"));
  }
  static TimeSpan millis(double ms) { return seconds(ms / 1000.0); }

  constexpr double seconds() const { return s_; }

  friend TimeSpan operator+(TimeSpan a, TimeSpan b) {
    return TimeSpan(a.s_ + b.s_);
  }
  TimeSpan& operator+=(TimeSpan o) {
    s_ += o.s_;
    return *this;
  }
  // Scaling by a negative factor is rejected.
  friend TimeSpan operator*(TimeSpan a, double f) { return seconds(a.s_ * f); }
  friend TimeSpan operator*(double f, TimeSpan a) { return a * f; }

  friend constexpr auto operator<=>(TimeSpan, TimeSpan) = default;

 private:
  constexpr explicit TimeSpan(double s) : s_(s) {}
  double s_ = 0.0;
};

// Point on the utterance time axis; t = 0 is the start of the source (or of
// the token trace when no source is modeled).
class TimePoint {
 public:
  constexpr TimePoint() = default;

  static TimePoint at(double s) {
    return TimePoint(detail::checked_seconds(s, "TimePoint"));
  }
  static constexpr TimePoint origin() { return TimePoint(); }

  constexpr double seconds() const { return s_; }

  // Span from the origin to this point.
  TimeSpan since_origin() const { return TimeSpan::seconds(s_); }

  friend TimePoint operator+(TimePoint p, TimeSpan d) {
    return TimePoint(p.s_ + d.seconds());
  }
  // Signed difference in seconds.
  friend double operator-(TimePoint a, TimePoint b) { return a.s_ - b.s_; }

  friend constexpr auto operator<=>(TimePoint, TimePoint) = default;

 private:
  constexpr explicit TimePoint(double s) : s_(s) {}
  double s_ = 0.0;
};

inline TimePoint max(TimePoint a, TimePoint b) { return a < b ? b : a; }
inline TimePoint min(TimePoint a, TimePoint b) { return b < a ? b : a; }

// a is before b by more than the tolerance.
inline bool definitely_before(TimePoint a, TimePoint b) {
  return a.seconds() < b.seconds() - kTimeTolerance;
}

inline bool approx_equal(double a, double b, double tol = kTimeTolerance) {
  return std::fabs(a - b) <= tol;
}

}  // namespace s2st
