// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cotr/core.hpp"
#include "cotr/parser.hpp"

namespace cotr {

struct JudgeRequest {
  std::string sample_id;
  std::string question;
  std::string reference_answer;
  std::string predicted_answer;
};

/// External correctness oracle for open-ended answers. Implementations
/// throw TransportError when no verdict can be obtained.
class JudgeAdapter {
 public:
  virtual ~JudgeAdapter() = default;
  virtual std::string id() const = 0;
  virtual JudgeVerdict judge(const JudgeRequest& request) = 0;
};

enum class AccuracyMode { ExactNormalized, Containment, ExternalJudge };

inline std::string_view to_string(AccuracyMode m) {
  switch (m) {
    case AccuracyMode::ExactNormalized: return "exact";
    case AccuracyMode::Containment: return "containment";
    case AccuracyMode::ExternalJudge: return "judge";
  }
  return "unknown";
}

inline AccuracyMode accuracy_mode_from_string(std::string_view s) {
  for (auto m : {AccuracyMode::ExactNormalized, AccuracyMode::Containment, AccuracyMode::ExternalJudge})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown accuracy mode: " + std::string(s));
}

/// Case-folds ASCII, drops ASCII punctuation and collapses whitespace.
inline std::string normalize_answer(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

inline double format_reward(const ParsedOutput& parsed) { return parsed.format_ok ? 1.0 : 0.0; }

/// An empty normalized prediction never earns credit.
inline double accuracy_reward(std::string_view pred_answer, std::string_view reference_answer, AccuracyMode mode,
                              JudgeAdapter* judge = nullptr, const JudgeRequest* context = nullptr) {
  if (mode == AccuracyMode::ExternalJudge) {
    if (judge == nullptr) throw std::invalid_argument("ExternalJudge mode requires a judge adapter");
    JudgeRequest req = context ? *context : JudgeRequest{};
    req.predicted_answer = std::string(pred_answer);
    req.reference_answer = std::string(reference_answer);
    return judge->judge(req).correct ? 1.0 : 0.0;
  }
  const std::string p = normalize_answer(pred_answer);
  const std::string r = normalize_answer(reference_answer);
  if (p.empty() || r.empty()) return 0.0;
  if (mode == AccuracyMode::ExactNormalized) return p == r ? 1.0 : 0.0;
  return (p.find(r) != std::string::npos || r.find(p) != std::string::npos) ? 1.0 : 0.0;
}

/// Fraction of steps carrying at least one anchor; 0 for no steps.
inline double coverage_reward(std::span<const ReasoningStep> steps) {
  if (steps.empty()) return 0.0;
  auto anchored = std::count_if(steps.begin(), steps.end(), [](const ReasoningStep& s) { return s.anchored(); });
  return static_cast<double>(anchored) / static_cast<double>(steps.size());
}

/// Interval IoU with points as zero-width intervals. Two zero-width
/// intervals score 1 only when identical.
inline double interval_iou(const TimeAnchor& a, const TimeAnchor& b) {
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double uni = a.length() + b.length() - inter;
  if (uni <= 0.0) return (a.start_s == b.start_s && a.end_s == b.end_s) ? 1.0 : 0.0;
  return inter / uni;
}

/// Span-span: IoU. Point-point: linear ramp 1 - d/tol. Point-span: 1 inside
/// the span, otherwise the ramp on the gap to the nearest endpoint.
inline double anchor_similarity(const TimeAnchor& gt, const TimeAnchor& pred, double point_tolerance_s) {
  auto ramp = [point_tolerance_s](double d) { return std::max(0.0, 1.0 - d / point_tolerance_s); };
  if (gt.is_span() && pred.is_span()) return interval_iou(gt, pred);
  if (gt.is_point() && pred.is_point()) return ramp(std::abs(gt.start_s - pred.start_s));
  const TimeAnchor& p = gt.is_point() ? gt : pred;
  const TimeAnchor& s = gt.is_point() ? pred : gt;
  if (p.start_s >= s.start_s && p.start_s <= s.end_s) return 1.0;
  return ramp(p.start_s < s.start_s ? s.start_s - p.start_s : p.start_s - s.end_s);
}

/// Mean over ground-truth anchors of the best similarity against any
/// predicted anchor. Predicted anchors may serve several ground-truth
/// anchors (best match, not an assignment).
template <typename Similarity>
double best_match_alignment(std::span<const TimeAnchor> gt, std::span<const TimeAnchor> pred, Similarity&& similarity) {
  if (gt.empty()) throw std::invalid_argument("best-match alignment needs at least one ground-truth anchor");
  double sum = 0.0;
  for (const auto& g : gt) {
    double best = 0.0;
    for (const auto& p : pred) best = std::max(best, similarity(g, p));
    sum += best;
  }
  return sum / static_cast<double>(gt.size());
}

inline double correctness_reward(std::span<const TimeAnchor> gt, std::span<const TimeAnchor> pred,
                                 double point_tolerance_s) {
  return best_match_alignment(gt, pred, [point_tolerance_s](const TimeAnchor& g, const TimeAnchor& p) {
    return anchor_similarity(g, p, point_tolerance_s);
  });
}

inline double temporal_reward(double r_cov, double r_cor, double alpha) { return alpha * r_cov + (1.0 - alpha) * r_cor; }

inline RewardBreakdown compose_reward(double r_fmt, double r_acc, double r_cov, double r_cor, const RewardConfig& cfg) {
  RewardBreakdown b;
  b.r_fmt = r_fmt;
  b.r_acc = r_acc;
  b.r_cov = r_cov;
  b.r_cor = r_cor;
  b.r_temporal = temporal_reward(r_cov, r_cor, cfg.alpha);
  b.total = cfg.lambda_fmt * b.r_fmt + cfg.lambda_acc * b.r_acc + cfg.lambda_temporal * b.r_temporal;
  return b;
}

/// R = l_fmt*r_fmt + l_acc*r_acc + l_temporal*(alpha*r_cov + (1-alpha)*r_cor),
/// with the sample's reference anchors as ground truth.
inline RewardBreakdown total_reward(const ParsedOutput& parsed, const Sample& sample, const RewardConfig& cfg,
                                    AccuracyMode mode, JudgeAdapter* judge = nullptr) {
  cfg.validate();
  const auto gt = sample.reference_chain.all_anchors();
  const auto pred = parsed.chain.all_anchors();
  JudgeRequest ctx{sample.sample_id, sample.question, sample.reference_answer, parsed.chain.answer};
  const double r_acc = accuracy_reward(parsed.chain.answer, sample.reference_answer, mode, judge, &ctx);
  return compose_reward(format_reward(parsed), r_acc, coverage_reward(parsed.chain.steps),
                        correctness_reward(gt, pred, cfg.point_tolerance_s), cfg);
}

}  // namespace cotr
