// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotr/core.hpp"
#include "cotr/timestamp.hpp"

namespace cotr {

/// Result of parsing raw model output. `format_ok` holds iff a non-empty
/// `<thinking>` section is followed by a non-empty `<answer>` section.
struct ParsedOutput {
  ChainOfTime chain;
  bool format_ok = false;
  std::string raw;
};

namespace detail {

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() && ascii_lower(hay[i + k]) == ascii_lower(needle[k])) ++k;
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// A segment with no letters or digits ("**", "...") is not a step.
inline bool has_content(std::string_view s) {
  for (char c : s)
    if (is_alnum(c) || static_cast<unsigned char>(c) >= 0x80) return true;
  return false;
}

// Length of a `Step <k>:` marker at `pos`, or 0.
inline std::size_t step_marker_at(std::string_view s, std::size_t pos) {
  if (pos > 0 && is_alnum(s[pos - 1])) return 0;
  if (find_ci(s.substr(pos, 4), "step") != 0) return 0;
  std::size_t p = pos + 4;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  std::size_t digits = digit_run(s, p);
  if (digits == 0) return 0;
  p += digits;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  if (p >= s.size() || s[p] != ':') return 0;
  return p + 1 - pos;
}

inline void push_segment(std::vector<std::string>& out, std::string_view seg) {
  seg = trim(seg);
  if (has_content(seg)) out.emplace_back(seg);
}

// Span separator starting at `pos` (after optional whitespace has been
// skipped by the caller). Returns bytes consumed or 0.
inline std::size_t span_separator_at(std::string_view s, std::size_t pos, bool had_space) {
  if (pos >= s.size()) return 0;
  if (s[pos] == '-' || s[pos] == '~') return 1;
  if (s.substr(pos, 3) == "\xE2\x80\x93" || s.substr(pos, 3) == "\xE2\x80\x94") return 3;  // en/em dash
  if (had_space && pos + 2 < s.size() && ascii_lower(s[pos]) == 't' && ascii_lower(s[pos + 1]) == 'o' &&
      is_space(s[pos + 2])) {
    return 2;
  }
  return 0;
}

inline std::size_t skip_spaces(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
  return pos;
}

}  // namespace detail

/// Splits a thinking section into step texts. Precedence: two or more
/// `Step <k>:` markers, then line breaks, then sentence terminators
/// (. ! ?) followed by whitespace.
inline std::vector<std::string> segment_steps(std::string_view text) {
  using namespace detail;
  std::vector<std::string> out;

  std::vector<std::size_t> markers;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::size_t len = step_marker_at(text, i); len > 0) {
      markers.push_back(i);
      i += len - 1;
    }
  }
  if (markers.size() >= 2) {
    push_segment(out, text.substr(0, markers.front()));
    for (std::size_t k = 0; k < markers.size(); ++k) {
      std::size_t end = k + 1 < markers.size() ? markers[k + 1] : text.size();
      push_segment(out, text.substr(markers[k], end - markers[k]));
    }
    return out;
  }

  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      push_segment(lines, text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (lines.size() >= 2) return lines;

  // Colons in mm:ss and decimal points are never followed by whitespace,
  // so they do not end a sentence here.
  start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    if (j < text.size() && is_space(text[j])) {
      push_segment(out, text.substr(start, j - start));
      start = j;
    }
    i = j - 1;
  }
  push_segment(out, text.substr(start));
  return out;
}

/// Extracts explicit time anchors left to right. A span `a-b` (separators
/// -, en dash, em dash, "to", ~) takes precedence over reading its
/// endpoints as points. Everything is normalized against `duration_s`.
inline std::vector<TimeAnchor> extract_anchors(std::string_view text, double duration_s) {
  using namespace detail;
  std::vector<TimeAnchor> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto first = match_timestamp_at(text, pos);
    if (!first) {
      ++pos;
      continue;
    }
    std::size_t end = pos + first->length;
    std::size_t p = skip_spaces(text, end);
    if (std::size_t sep = span_separator_at(text, p, p > end); sep > 0) {
      std::size_t q = skip_spaces(text, p + sep);
      if (auto second = match_timestamp_at(text, q)) {
        out.push_back(normalize_anchor(first->seconds, second->seconds, duration_s));
        pos = q + second->length;
        continue;
      }
    }
    out.push_back(normalize_anchor(first->seconds, std::nullopt, duration_s));
    pos = end;
  }
  return out;
}

/// Total parser for raw model output; never throws on malformed text.
/// Without an `<answer>` tag, text trailing `</thinking>` is salvaged as the
/// answer (format_ok stays false).
inline ParsedOutput parse_output(std::string_view raw, double duration_s) {
  using namespace detail;
  constexpr std::string_view kThinkOpen = "<thinking>", kThinkClose = "</thinking>";
  constexpr std::string_view kAnsOpen = "<answer>", kAnsClose = "</answer>";
  constexpr auto npos = std::string_view::npos;

  ParsedOutput out;
  out.raw = std::string(raw);

  std::size_t t_open = find_ci(raw, kThinkOpen);
  std::size_t t_close = find_ci(raw, kThinkClose, t_open == npos ? 0 : t_open + kThinkOpen.size());
  std::size_t a_search_from = t_close != npos ? t_close + kThinkClose.size() : (t_open != npos ? t_open : 0);
  std::size_t a_open = find_ci(raw, kAnsOpen, a_search_from);
  std::size_t a_close = a_open == npos ? npos : find_ci(raw, kAnsClose, a_open + kAnsOpen.size());

  std::string_view thinking;
  if (t_open != npos) {
    std::size_t b = t_open + kThinkOpen.size();
    std::size_t e = t_close != npos ? t_close : (a_open != npos ? a_open : raw.size());
    thinking = raw.substr(b, e - b);
  } else if (t_close != npos) {
    thinking = raw.substr(0, t_close);
  } else {
    thinking = raw.substr(0, a_open != npos ? a_open : raw.size());
  }

  std::string_view answer;
  if (a_open != npos) {
    std::size_t b = a_open + kAnsOpen.size();
    std::size_t e = a_close != npos ? a_close : raw.size();
    answer = raw.substr(b, e - b);
  } else if (t_close != npos) {
    answer = raw.substr(t_close + kThinkClose.size());
  }
  answer = trim(answer);

  // Stray tags inside a section are not content.
  std::string think_text(thinking);
  for (auto tag : {kThinkOpen, kThinkClose, kAnsOpen, kAnsClose}) {
    for (std::size_t i = find_ci(think_text, tag); i != npos; i = find_ci(think_text, tag, i)) {
      think_text.replace(i, tag.size(), " ");
    }
  }

  for (auto& seg : segment_steps(think_text)) {
    ReasoningStep step;
    step.anchors = extract_anchors(seg, duration_s);
    step.text = std::move(seg);
    out.chain.steps.push_back(std::move(step));
  }
  out.chain.answer = std::string(answer);

  out.format_ok = t_open != npos && t_close != npos && a_open != npos && a_close != npos &&
                  !is_blank(trim(thinking)) && !answer.empty();
  return out;
}

}  // namespace cotr
