// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cotr {

inline constexpr std::string_view kVersion = "0.3.0";

/// Raised when an external adapter (judge endpoint, model server, frame
/// store) fails. Never converted into a correctness verdict.
struct TransportError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class AnchorKind { Point, Span };

/// A point timestamp or a closed temporal span, in seconds. A point is a
/// zero-width span (end_s == start_s) so interval math has one code path.
struct TimeAnchor {
  AnchorKind kind = AnchorKind::Point;
  double start_s = 0.0;
  double end_s = 0.0;

  static TimeAnchor point(double t) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("point anchor must be finite and >= 0");
    return {AnchorKind::Point, t, t};
  }

  static TimeAnchor span(double start, double end) {
    if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0 || end < start) {
      throw std::invalid_argument("span anchor requires 0 <= start <= end");
    }
    return {AnchorKind::Span, start, end};
  }

  bool is_point() const { return kind == AnchorKind::Point; }
  bool is_span() const { return kind == AnchorKind::Span; }
  double length() const { return end_s - start_s; }
  double center() const { return 0.5 * (start_s + end_s); }

  friend bool operator==(const TimeAnchor&, const TimeAnchor&) = default;
};

/// Clamps to [0, duration_s], swaps reversed endpoints and collapses
/// zero-width spans to points.
inline TimeAnchor normalize_anchor(double raw_start_s, std::optional<double> raw_end_s, double duration_s) {
  if (!std::isfinite(raw_start_s)) throw std::invalid_argument("anchor start is not finite");
  if (raw_end_s && !std::isfinite(*raw_end_s)) throw std::invalid_argument("anchor end is not finite");
  if (!std::isfinite(duration_s) || duration_s <= 0.0) throw std::invalid_argument("duration must be positive and finite");

  auto clamp = [duration_s](double t) { return std::clamp(t, 0.0, duration_s); };
  double lo = clamp(raw_start_s);
  if (!raw_end_s) return {AnchorKind::Point, lo, lo};
  double hi = clamp(*raw_end_s);
  if (hi < lo) std::swap(lo, hi);
  if (hi == lo) return {AnchorKind::Point, lo, lo};
  return {AnchorKind::Span, lo, hi};
}

inline TimeAnchor normalize_anchor(const TimeAnchor& a, double duration_s) {
  return normalize_anchor(a.start_s, a.is_span() ? std::optional<double>(a.end_s) : std::nullopt, duration_s);
}

/// One reasoning step n_t = <text, anchors>. Reference chains carry exactly
/// one anchor per step; parsed predictions carry any number.
struct ReasoningStep {
  std::string text;
  std::vector<TimeAnchor> anchors;

  bool anchored() const { return !anchors.empty(); }
  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

struct ChainOfTime {
  std::vector<ReasoningStep> steps;
  std::string answer;

  std::vector<TimeAnchor> all_anchors() const {
    std::vector<TimeAnchor> out;
    for (const auto& s : steps) out.insert(out.end(), s.anchors.begin(), s.anchors.end());
    return out;
  }

  std::size_t anchored_step_count() const {
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const ReasoningStep& s) { return s.anchored(); }));
  }

  friend bool operator==(const ChainOfTime&, const ChainOfTime&) = default;
};

enum class Sport { AmericanFootball, IceHockey, Soccer, Basketball, Volleyball };
enum class TaskType { Perception, Temporal, Tactical, Causal, Counterfactual };

inline constexpr Sport kAllSports[] = {Sport::AmericanFootball, Sport::IceHockey, Sport::Soccer, Sport::Basketball,
                                       Sport::Volleyball};
inline constexpr TaskType kAllTaskTypes[] = {TaskType::Perception, TaskType::Temporal, TaskType::Tactical,
                                             TaskType::Causal, TaskType::Counterfactual};

inline std::string_view to_string(Sport s) {
  switch (s) {
    case Sport::AmericanFootball: return "american_football";
    case Sport::IceHockey: return "ice_hockey";
    case Sport::Soccer: return "soccer";
    case Sport::Basketball: return "basketball";
    case Sport::Volleyball: return "volleyball";
  }
  return "unknown";
}

inline std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::Perception: return "perception";
    case TaskType::Temporal: return "temporal";
    case TaskType::Tactical: return "tactical";
    case TaskType::Causal: return "causal";
    case TaskType::Counterfactual: return "counterfactual";
  }
  return "unknown";
}

inline Sport sport_from_string(std::string_view s) {
  for (Sport v : kAllSports)
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown sport: " + std::string(s));
}

inline TaskType task_type_from_string(std::string_view s) {
  for (TaskType v : kAllTaskTypes)
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown task type: " + std::string(s));
}

/// One benchmark item. `video_id` and `duration_s` are metadata only.
struct Sample {
  std::string sample_id;
  std::string video_id;
  double duration_s = 0.0;
  Sport sport = Sport::Soccer;
  TaskType task_type = TaskType::Perception;
  std::string question;
  std::string reference_answer;
  ChainOfTime reference_chain;
  // Fields not in the schema, kept as raw JSON text on read. Not written back
  // and not part of equality.
  std::map<std::string, std::string> unknown_fields;

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.sample_id == b.sample_id && a.video_id == b.video_id && a.duration_s == b.duration_s &&
           a.sport == b.sport && a.task_type == b.task_type && a.question == b.question &&
           a.reference_answer == b.reference_answer && a.reference_chain == b.reference_chain;
  }
};

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

/// Throws std::invalid_argument describing the first violated invariant.
inline void validate_sample(const Sample& s) {
  if (s.sample_id.empty()) throw std::invalid_argument("sample_id is empty");
  if (!std::isfinite(s.duration_s) || s.duration_s <= 0.0) throw std::invalid_argument("duration_s must be positive");
  if (s.reference_chain.steps.empty()) throw std::invalid_argument("reference chain has no steps");
  for (std::size_t i = 0; i < s.reference_chain.steps.size(); ++i) {
    const auto& step = s.reference_chain.steps[i];
    const std::string where = "reference step " + std::to_string(i + 1);
    if (is_blank(step.text)) throw std::invalid_argument(where + " has empty text");
    if (step.anchors.size() != 1) throw std::invalid_argument(where + " must carry exactly one anchor");
    const auto& a = step.anchors.front();
    if (a.start_s < 0.0 || a.end_s < a.start_s || a.end_s > s.duration_s) {
      throw std::invalid_argument(where + " anchor lies outside [0, duration_s]");
    }
  }
}

struct RewardConfig {
  double lambda_fmt = 0.5;
  double lambda_acc = 1.0;
  double lambda_temporal = 1.0;
  double alpha = 0.5;
  double point_tolerance_s = 10.0;

  void validate() const {
    if (!(lambda_fmt >= 0.0) || !(lambda_acc >= 0.0) || !(lambda_temporal >= 0.0)) {
      throw std::invalid_argument("reward weights must be non-negative");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (!(point_tolerance_s > 0.0) || !std::isfinite(point_tolerance_s)) {
      throw std::invalid_argument("point_tolerance_s must be positive");
    }
  }

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct RewardBreakdown {
  double r_fmt = 0.0;
  double r_acc = 0.0;
  double r_cov = 0.0;
  double r_cor = 0.0;
  double r_temporal = 0.0;
  double total = 0.0;
};

struct JudgeVerdict {
  std::string sample_id;
  std::string judge_id;
  bool correct = false;
};

}  // namespace cotr
