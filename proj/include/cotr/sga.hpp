// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cotr/core.hpp"
#include "cotr/parser.hpp"
#include "cotr/reward.hpp"

namespace cotr {

/// Per-sample step-wise grounding alignment record.
struct SgaRecord {
  std::string sample_id;
  double anchor_rate = 0.0;
  double grounding_score = 0.0;
  std::optional<bool> correct;
};

enum class GroundingScheme {
  Mixed,      // same similarity as the correctness reward
  StrictIoU,  // zero-width IoU for points
};

/// Strict interval IoU; identical points score 1, other point pairs 0.
inline double span_iou(const TimeAnchor& a, const TimeAnchor& b) { return interval_iou(a, b); }

/// Best-match alignment of predicted anchors to the reference anchors. Under
/// the mixed scheme this is exactly correctness_reward.
inline double sample_grounding_score(const ChainOfTime& pred, const ChainOfTime& ref, double point_tolerance_s,
                                     GroundingScheme scheme = GroundingScheme::Mixed) {
  const auto gt = ref.all_anchors();
  const auto p = pred.all_anchors();
  if (scheme == GroundingScheme::StrictIoU) return best_match_alignment(gt, p, span_iou);
  return correctness_reward(gt, p, point_tolerance_s);
}

/// Fraction of scores strictly greater than `tau`.
inline double hit_at(std::span<const double> scores, double tau) {
  if (scores.empty()) throw std::invalid_argument("hit_at: empty score list");
  auto hits = std::count_if(scores.begin(), scores.end(), [tau](double s) { return s > tau; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty list");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Mean per-output step coverage (outputs without steps count as 0).
inline double anchor_rate(std::span<const ParsedOutput> outputs) {
  if (outputs.empty()) throw std::invalid_argument("anchor_rate: empty output list");
  double s = 0.0;
  for (const auto& o : outputs) s += coverage_reward(o.chain.steps);
  return s / static_cast<double>(outputs.size());
}

/// Fraction of outputs citing at least one anchor anywhere.
inline double anchor_presence_rate(std::span<const ParsedOutput> outputs) {
  if (outputs.empty()) throw std::invalid_argument("anchor_presence_rate: empty output list");
  auto n = std::count_if(outputs.begin(), outputs.end(),
                         [](const ParsedOutput& o) { return o.chain.anchored_step_count() > 0; });
  return static_cast<double>(n) / static_cast<double>(outputs.size());
}

/// Mean over unordered judge pairs of the per-sample agreement fraction.
inline double pairwise_agreement(const std::map<std::string, std::vector<bool>>& verdicts) {
  if (verdicts.size() < 2) throw std::invalid_argument("pairwise_agreement needs at least 2 judges");
  const std::size_t n = verdicts.begin()->second.size();
  for (const auto& [id, v] : verdicts)
    if (v.size() != n) throw std::invalid_argument("pairwise_agreement: misaligned verdicts for judge " + id);
  if (n == 0) throw std::invalid_argument("pairwise_agreement: no samples");

  double total = 0.0;
  int pairs = 0;
  for (auto a = verdicts.begin(); a != verdicts.end(); ++a) {
    for (auto b = std::next(a); b != verdicts.end(); ++b) {
      std::size_t agree = 0;
      for (std::size_t i = 0; i < n; ++i) agree += a->second[i] == b->second[i] ? 1 : 0;
      total += static_cast<double>(agree) / static_cast<double>(n);
      ++pairs;
    }
  }
  return total / pairs;
}

/// Fleiss' kappa over an N x K matrix of rater counts with n raters per
/// item.
inline double fleiss_kappa(const std::vector<std::vector<int>>& counts) {
  if (counts.empty()) throw std::invalid_argument("fleiss_kappa: no items");
  const std::size_t k = counts.front().size();
  if (k < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 categories");
  int raters = -1;
  for (const auto& row : counts) {
    if (row.size() != k) throw std::invalid_argument("fleiss_kappa: ragged count matrix");
    int sum = 0;
    for (int c : row) {
      if (c < 0) throw std::invalid_argument("fleiss_kappa: negative count");
      sum += c;
    }
    if (raters < 0) raters = sum;
    if (sum != raters) throw std::invalid_argument("fleiss_kappa: rows must sum to the same rater count");
  }
  if (raters < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 raters");

  const double n = raters;
  const double items = static_cast<double>(counts.size());
  std::vector<double> col(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : counts) {
    double agree = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      agree += static_cast<double>(row[j]) * (row[j] - 1);
      col[j] += row[j];
    }
    p_bar += agree / (n * (n - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (double c : col) {
    const double pj = c / (items * n);
    p_e += pj * pj;
  }
  if (p_bar == 1.0) return 1.0;
  if (p_e == 1.0) throw std::domain_error("fleiss_kappa: degenerate marginals (expected agreement is 1)");
  return (p_bar - p_e) / (1.0 - p_e);
}

/// Builds the per-item count matrix (K = 2: incorrect, correct) from aligned
/// boolean verdicts of several judges.
inline std::vector<std::vector<int>> binary_count_matrix(const std::map<std::string, std::vector<bool>>& verdicts) {
  if (verdicts.empty()) throw std::invalid_argument("no verdicts");
  const std::size_t n = verdicts.begin()->second.size();
  std::vector<std::vector<int>> counts(n, std::vector<int>(2, 0));
  for (const auto& [id, v] : verdicts) {
    if (v.size() != n) throw std::invalid_argument("misaligned verdicts for judge " + id);
    for (std::size_t i = 0; i < n; ++i) ++counts[i][v[i] ? 1 : 0];
  }
  return counts;
}

/// Cohen's kappa for two raters over binary verdicts, with expected
/// agreement from the product of marginals.
inline double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cohen_kappa: length mismatch");
  if (a.empty()) throw std::invalid_argument("cohen_kappa: empty verdict lists");
  const double n = static_cast<double>(a.size());
  double agree = 0.0, a_true = 0.0, b_true = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i] ? 1.0 : 0.0;
    a_true += a[i] ? 1.0 : 0.0;
    b_true += b[i] ? 1.0 : 0.0;
  }
  const double p_o = agree / n;
  const double p_e = (a_true / n) * (b_true / n) + (1.0 - a_true / n) * (1.0 - b_true / n);
  if (p_o == 1.0) return 1.0;
  if (p_e == 1.0) throw std::domain_error("cohen_kappa: degenerate marginals");
  return (p_o - p_e) / (1.0 - p_e);
}

struct TaskBreakdown {
  std::map<TaskType, double> per_task;    // only categories with samples
  std::map<TaskType, std::size_t> counts;
  double macro_average = 0.0;             // unweighted mean over present categories
  double micro_average = 0.0;             // per-sample mean
};

inline TaskBreakdown task_breakdown(std::span<const std::pair<TaskType, bool>> records) {
  if (records.empty()) throw std::invalid_argument("task_breakdown: no records");
  TaskBreakdown out;
  std::map<TaskType, std::size_t> correct;
  std::size_t total_correct = 0;
  for (const auto& [task, ok] : records) {
    ++out.counts[task];
    correct[task] += ok ? 1 : 0;
    total_correct += ok ? 1 : 0;
  }
  double sum = 0.0;
  for (const auto& [task, n] : out.counts) {
    const double acc = static_cast<double>(correct[task]) / static_cast<double>(n);
    out.per_task[task] = acc;
    sum += acc;
  }
  out.macro_average = sum / static_cast<double>(out.per_task.size());
  out.micro_average = static_cast<double>(total_correct) / static_cast<double>(records.size());
  return out;
}

}  // namespace cotr
