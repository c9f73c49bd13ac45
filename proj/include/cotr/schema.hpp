// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotr/core.hpp"

// JSON encoding of the domain types. Anchors are {"start_s", "end_s"} with
// start_s == end_s for points; a reasoning step is {"text", "anchors"}.

namespace cotr {

using json = nlohmann::json;

inline void to_json(json& j, const TimeAnchor& a) { j = json{{"start_s", a.start_s}, {"end_s", a.end_s}}; }

/// Equal endpoints decode as a point, otherwise a span. No clamping here;
/// decode_sample normalizes against a duration.
inline void from_json(const json& j, TimeAnchor& a) {
  const double s = j.at("start_s").get<double>();
  const double e = j.contains("end_s") ? j.at("end_s").get<double>() : s;
  a = (s == e) ? TimeAnchor::point(s) : TimeAnchor::span(s, e);
}

inline void to_json(json& j, const ReasoningStep& s) { j = json{{"text", s.text}, {"anchors", s.anchors}}; }

inline void from_json(const json& j, ReasoningStep& s) {
  s.text = j.at("text").get<std::string>();
  s.anchors = j.value("anchors", std::vector<TimeAnchor>{});
}

inline void to_json(json& j, const ChainOfTime& c) { j = json{{"steps", c.steps}, {"answer", c.answer}}; }

inline void from_json(const json& j, ChainOfTime& c) {
  c.steps = j.at("steps").get<std::vector<ReasoningStep>>();
  c.answer = j.value("answer", std::string{});
}

inline void to_json(json& j, const RewardConfig& c) {
  j = json{{"lambda_fmt", c.lambda_fmt},
           {"lambda_acc", c.lambda_acc},
           {"lambda_temporal", c.lambda_temporal},
           {"alpha", c.alpha},
           {"point_tolerance_s", c.point_tolerance_s}};
}

inline void from_json(const json& j, RewardConfig& c) {
  RewardConfig d;
  c.lambda_fmt = j.value("lambda_fmt", d.lambda_fmt);
  c.lambda_acc = j.value("lambda_acc", d.lambda_acc);
  c.lambda_temporal = j.value("lambda_temporal", d.lambda_temporal);
  c.alpha = j.value("alpha", d.alpha);
  c.point_tolerance_s = j.value("point_tolerance_s", d.point_tolerance_s);
  c.validate();
}

inline void to_json(json& j, const RewardBreakdown& b) {
  j = json{{"r_fmt", b.r_fmt}, {"r_acc", b.r_acc},           {"r_cov", b.r_cov},
           {"r_cor", b.r_cor}, {"r_temporal", b.r_temporal}, {"total", b.total}};
}

inline void from_json(const json& j, RewardBreakdown& b) {
  b.r_fmt = j.at("r_fmt").get<double>();
  b.r_acc = j.at("r_acc").get<double>();
  b.r_cov = j.at("r_cov").get<double>();
  b.r_cor = j.at("r_cor").get<double>();
  b.r_temporal = j.at("r_temporal").get<double>();
  b.total = j.at("total").get<double>();
}

inline void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"sample_id", v.sample_id}, {"judge_id", v.judge_id}, {"correct", v.correct}};
}

inline void from_json(const json& j, JudgeVerdict& v) {
  v.sample_id = j.at("sample_id").get<std::string>();
  v.judge_id = j.at("judge_id").get<std::string>();
  v.correct = j.at("correct").get<bool>();
  if (v.sample_id.empty() || v.judge_id.empty()) throw std::invalid_argument("verdict ids must be non-empty");
}

/// Writes only schema fields; unknown fields are dropped.
inline void to_json(json& j, const Sample& s) {
  j = json{{"sample_id", s.sample_id},
           {"video_id", s.video_id},
           {"duration_s", s.duration_s},
           {"sport", std::string(to_string(s.sport))},
           {"task_type", std::string(to_string(s.task_type))},
           {"question", s.question},
           {"reference_answer", s.reference_answer},
           {"reference_chain", s.reference_chain}};
}

/// Decodes one dataset record. Anchors are normalized against duration_s;
/// every adjustment (swap, clamp) is reported through `warnings`. Throws
/// on missing fields or violated invariants.
inline Sample decode_sample(const json& j, std::vector<std::string>* warnings = nullptr) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  Sample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.video_id = j.at("video_id").get<std::string>();
  s.duration_s = j.at("duration_s").get<double>();
  s.sport = sport_from_string(j.at("sport").get<std::string>());
  s.task_type = task_type_from_string(j.at("task_type").get<std::string>());
  s.question = j.at("question").get<std::string>();
  s.reference_answer = j.at("reference_answer").get<std::string>();
  if (!(s.duration_s > 0.0)) throw std::invalid_argument("duration_s must be positive");

  const json& chain = j.at("reference_chain");
  s.reference_chain.answer = chain.value("answer", std::string{});
  const auto& steps = chain.at("steps");
  if (!steps.is_array()) throw std::invalid_argument("reference_chain.steps is not an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const json& js = steps[i];
    ReasoningStep step;
    step.text = js.at("text").get<std::string>();
    const json& anchors = js.at("anchors");
    if (!anchors.is_array()) throw std::invalid_argument("step anchors is not an array");
    for (const auto& ja : anchors) {
      const double raw_s = ja.at("start_s").get<double>();
      const double raw_e = ja.contains("end_s") ? ja.at("end_s").get<double>() : raw_s;
      TimeAnchor a = normalize_anchor(raw_s, raw_e == raw_s ? std::nullopt : std::optional<double>(raw_e), s.duration_s);
      if (warnings && (a.start_s != std::min(raw_s, raw_e) || a.end_s != std::max(raw_s, raw_e))) {
        warnings->push_back("step " + std::to_string(i + 1) + ": anchor clamped to [0, duration_s]");
      }
      if (warnings && raw_e < raw_s) warnings->push_back("step " + std::to_string(i + 1) + ": anchor endpoints swapped");
      step.anchors.push_back(a);
    }
    s.reference_chain.steps.push_back(std::move(step));
  }

  static const char* const kKnown[] = {"sample_id", "video_id",         "duration_s",     "sport",
                                       "task_type", "reference_answer", "reference_chain", "question"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) s.unknown_fields[key] = value.dump();
  }

  validate_sample(s);
  return s;
}

inline void from_json(const json& j, Sample& s) { s = decode_sample(j); }

}  // namespace cotr
