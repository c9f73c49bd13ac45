// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cotr {

/// Round to nearest integer, ties to even (0.5 -> 0, 1.5 -> 2).
inline double round_half_even(double x) {
  double fl = std::floor(x);
  double diff = x - fl;
  if (diff > 0.5) return fl + 1.0;
  if (diff < 0.5) return fl;
  return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

/// Renders seconds as zero-padded `mm:ss`. Minutes are not rolled into an
/// hour field, so 3723 s renders as "62:03".
inline std::string format_timestamp(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw std::invalid_argument("format_timestamp: seconds must be finite and non-negative");
  }
  const auto total = static_cast<std::int64_t>(round_half_even(seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(total / 60),
                static_cast<long long>(total % 60));
  return buf;
}

struct TimestampMatch {
  std::size_t length = 0;  // bytes consumed
  double seconds = 0.0;
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::size_t digit_run(std::string_view s, std::size_t pos) {
  std::size_t n = 0;
  while (pos + n < s.size() && is_digit(s[pos + n])) ++n;
  return n;
}

inline int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

// A token must not run into further digits, another `:dd` group or a
// decimal fraction.
inline bool right_boundary_ok(std::string_view s, std::size_t end) {
  if (end >= s.size()) return true;
  char c = s[end];
  if (is_digit(c)) return false;
  if ((c == ':' || c == '.') && end + 1 < s.size() && is_digit(s[end + 1])) return false;
  return true;
}

}  // namespace detail

/// Tries to read `h:mm:ss` or `m:ss`/`mm:ss`/`mmm:ss` starting exactly at
/// `pos`. The token must not be preceded by a digit or colon.
/// `max_minute_digits` bounds the minutes field of the `m:ss` form.
inline std::optional<TimestampMatch> match_timestamp_at(std::string_view s, std::size_t pos,
                                                        std::size_t max_minute_digits = 3) {
  using detail::digit_run;
  using detail::is_digit;
  using detail::to_int;
  if (pos >= s.size() || !is_digit(s[pos])) return std::nullopt;
  if (pos > 0 && (is_digit(s[pos - 1]) || s[pos - 1] == ':')) return std::nullopt;

  const std::size_t n1 = digit_run(s, pos);
  std::size_t p = pos + n1;
  if (p >= s.size() || s[p] != ':' || digit_run(s, p + 1) != 2) return std::nullopt;
  const int first = to_int(s.substr(pos, n1));
  const int second = to_int(s.substr(p + 1, 2));
  p += 3;

  if (p < s.size() && s[p] == ':' && digit_run(s, p + 1) == 2) {
    // h:mm:ss; on any failure the whole token is rejected rather than
    // re-read as a shorter mm:ss.
    const int third = to_int(s.substr(p + 1, 2));
    const std::size_t end = p + 3;
    if (n1 > 2 || second > 59 || third > 59 || !detail::right_boundary_ok(s, end)) return std::nullopt;
    return TimestampMatch{end - pos, first * 3600.0 + second * 60.0 + third};
  }

  if (n1 > max_minute_digits || second > 59 || !detail::right_boundary_ok(s, p)) return std::nullopt;
  return TimestampMatch{p - pos, first * 60.0 + second};
}

/// Parses a whole string as a single timestamp. Accepts up to four minute
/// digits so every format_timestamp output below 10000 minutes reads back.
inline std::optional<double> parse_timestamp(std::string_view s) {
  auto m = match_timestamp_at(s, 0, 4);
  if (!m || m->length != s.size()) return std::nullopt;
  return m->seconds;
}

}  // namespace cotr
