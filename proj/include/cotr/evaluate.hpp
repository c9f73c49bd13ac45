// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotr/core.hpp"
#include "cotr/dataset.hpp"
#include "cotr/parser.hpp"
#include "cotr/reward.hpp"
#include "cotr/schema.hpp"
#include "cotr/sga.hpp"

namespace cotr {

struct EvalConfig {
  RewardConfig reward;
  AccuracyMode accuracy_mode = AccuracyMode::ExternalJudge;
  double hit_threshold = 0.5;
  int workers = 4;
};

/// Everything computed for one (sample, prediction) pair. Optional fields
/// are absent when undefined: accuracy after a judge failure, grounding
/// when the reference carries no anchors.
struct SampleRecord {
  std::string sample_id;
  TaskType task_type = TaskType::Perception;
  bool format_ok = false;
  std::size_t n_steps = 0;
  std::size_t n_anchored_steps = 0;
  double coverage = 0.0;
  std::optional<bool> correct;
  std::optional<RewardBreakdown> reward;
  std::optional<double> grounding_score;
  std::optional<double> grounding_score_strict;
  std::string judge_error;
};

/// Objective SGA table: Acc, Anchor%, mIoU, Hit@tau.
struct SgaTable {
  std::size_t n_evaluated = 0;
  std::size_t n_scored = 0;    // with an accuracy verdict
  std::size_t n_grounded = 0;  // with reference anchors
  std::optional<double> accuracy;
  double anchor_rate = 0.0;
  double anchor_presence_rate = 0.0;
  std::optional<double> miou;
  std::optional<double> miou_strict;
  std::optional<double> hit;
  double hit_threshold = 0.5;
};

struct AgreementBlock {
  std::vector<std::string> judges;  // judges entering pairwise/Fleiss
  std::size_t n_samples = 0;
  std::optional<double> pairwise_agreement;
  std::optional<double> fleiss_kappa;
  std::string reference_judge;
  std::map<std::string, double> cohen_vs_reference;
};

struct RunReport {
  std::string toolkit_version{kVersion};
  json config;
  std::vector<SampleRecord> records;
  SgaTable sga;
  std::optional<TaskBreakdown> tasks;
  std::optional<AgreementBlock> agreement;
  std::vector<std::string> unmatched_predictions;
  std::vector<std::string> missing_predictions;
  std::optional<json> human_assessment;

  std::size_t unscored() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const SampleRecord& r) { return !r.correct.has_value(); }));
  }
};

/// Scores one prediction. Judge transport failures leave `correct` and
/// `reward` empty and record the error; they never count as incorrect.
inline SampleRecord score_sample(const Sample& sample, const std::string& raw, const EvalConfig& cfg,
                                 JudgeAdapter* judge) {
  SampleRecord rec;
  rec.sample_id = sample.sample_id;
  rec.task_type = sample.task_type;
  const ParsedOutput parsed = parse_output(raw, sample.duration_s);
  rec.format_ok = parsed.format_ok;
  rec.n_steps = parsed.chain.steps.size();
  rec.n_anchored_steps = parsed.chain.anchored_step_count();
  rec.coverage = coverage_reward(parsed.chain.steps);

  const auto gt = sample.reference_chain.all_anchors();
  if (!gt.empty()) {
    rec.grounding_score = sample_grounding_score(parsed.chain, sample.reference_chain, cfg.reward.point_tolerance_s);
    rec.grounding_score_strict =
        sample_grounding_score(parsed.chain, sample.reference_chain, cfg.reward.point_tolerance_s, GroundingScheme::StrictIoU);
  }

  try {
    JudgeRequest ctx{sample.sample_id, sample.question, sample.reference_answer, parsed.chain.answer};
    const double r_acc = accuracy_reward(parsed.chain.answer, sample.reference_answer, cfg.accuracy_mode, judge, &ctx);
    rec.correct = r_acc == 1.0;
    rec.reward = compose_reward(format_reward(parsed), r_acc, rec.coverage, rec.grounding_score.value_or(0.0), cfg.reward);
  } catch (const TransportError& e) {
    rec.judge_error = e.what();
  }
  return rec;
}

/// Dataset-level aggregates; a pure reduction over per-sample records.
inline void aggregate(RunReport& report, double hit_threshold) {
  const auto& recs = report.records;
  SgaTable t;
  t.hit_threshold = hit_threshold;
  t.n_evaluated = recs.size();

  std::vector<std::pair<TaskType, bool>> verdicts;
  std::vector<double> grounding, grounding_strict;
  double coverage_sum = 0.0;
  std::size_t with_anchor = 0;
  for (const auto& r : recs) {
    coverage_sum += r.coverage;
    with_anchor += r.n_anchored_steps > 0 ? 1 : 0;
    if (r.correct) verdicts.emplace_back(r.task_type, *r.correct);
    if (r.grounding_score) grounding.push_back(*r.grounding_score);
    if (r.grounding_score_strict) grounding_strict.push_back(*r.grounding_score_strict);
  }
  if (!recs.empty()) {
    t.anchor_rate = coverage_sum / static_cast<double>(recs.size());
    t.anchor_presence_rate = static_cast<double>(with_anchor) / static_cast<double>(recs.size());
  }
  t.n_scored = verdicts.size();
  if (!verdicts.empty()) {
    report.tasks = task_breakdown(verdicts);
    t.accuracy = report.tasks->micro_average;
  } else {
    report.tasks.reset();
  }
  t.n_grounded = grounding.size();
  if (!grounding.empty()) {
    t.miou = mean_of(grounding);
    t.miou_strict = mean_of(grounding_strict);
    t.hit = hit_at(grounding, hit_threshold);
  }
  report.sga = t;
}

/// Aligns verdicts by sample over the samples every judge rated. Pairwise
/// agreement and Fleiss' kappa cover all judges except `reference_judge`
/// (typically human raters); Cohen's kappa compares each of them with it.
inline AgreementBlock compute_agreement(const std::vector<JudgeVerdict>& verdicts,
                                        const std::string& reference_judge = "human") {
  std::map<std::string, std::map<std::string, bool>> by_judge;
  for (const auto& v : verdicts) by_judge[v.judge_id][v.sample_id] = v.correct;
  if (by_judge.size() < 2) throw std::invalid_argument("agreement needs verdicts from at least 2 judges");

  std::set<std::string> common;
  for (const auto& [sid, _] : by_judge.begin()->second) common.insert(sid);
  for (const auto& [judge, m] : by_judge) {
    std::set<std::string> keep;
    for (const auto& sid : common)
      if (m.count(sid)) keep.insert(sid);
    common = std::move(keep);
  }
  if (common.empty()) throw std::invalid_argument("judges share no rated samples");

  std::map<std::string, std::vector<bool>> aligned;
  for (const auto& [judge, m] : by_judge) {
    auto& vec = aligned[judge];
    for (const auto& sid : common) vec.push_back(m.at(sid));
  }

  AgreementBlock out;
  out.n_samples = common.size();
  out.reference_judge = aligned.count(reference_judge) ? reference_judge : std::string{};
  std::map<std::string, std::vector<bool>> raters;
  for (const auto& [judge, vec] : aligned)
    if (judge != out.reference_judge) raters[judge] = vec;
  for (const auto& [judge, _] : raters) out.judges.push_back(judge);

  if (raters.size() >= 2) {
    out.pairwise_agreement = pairwise_agreement(raters);
    try {
      out.fleiss_kappa = fleiss_kappa(binary_count_matrix(raters));
    } catch (const std::domain_error&) {
    }
  }
  if (!out.reference_judge.empty()) {
    for (const auto& [judge, vec] : raters) {
      try {
        out.cohen_vs_reference[judge] = cohen_kappa(vec, aligned.at(out.reference_judge));
      } catch (const std::domain_error&) {
      }
    }
  }
  return out;
}

/// Scores every prediction whose sample_id is in the dataset, fanning out
/// over `cfg.workers` threads. Records keep dataset order, so the report is
/// deterministic for a deterministic judge.
inline RunReport evaluate_run(const std::vector<Sample>& samples, const std::vector<Prediction>& predictions,
                              const EvalConfig& cfg, JudgeAdapter* judge) {
  cfg.reward.validate();
  if (cfg.accuracy_mode == AccuracyMode::ExternalJudge && judge == nullptr) {
    throw std::invalid_argument("ExternalJudge accuracy mode requires a judge");
  }
  RunReport report;

  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (by_id.count(p.sample_id)) {
      report.unmatched_predictions.push_back(p.sample_id + " (duplicate)");
      continue;
    }
    by_id.emplace(p.sample_id, &p);
  }
  std::set<std::string> known;
  std::vector<std::pair<const Sample*, const Prediction*>> work;
  for (const auto& s : samples) {
    known.insert(s.sample_id);
    auto it = by_id.find(s.sample_id);
    if (it == by_id.end()) {
      report.missing_predictions.push_back(s.sample_id);
    } else {
      work.emplace_back(&s, it->second);
    }
  }
  for (const auto& p : predictions)
    if (!known.count(p.sample_id)) report.unmatched_predictions.push_back(p.sample_id);

  report.records.resize(work.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        report.records[i] = score_sample(*work[i].first, work[i].second->raw_text, cfg, judge);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::min(static_cast<std::size_t>(std::max(cfg.workers, 1)), std::max<std::size_t>(work.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  aggregate(report, cfg.hit_threshold);
  return report;
}

}  // namespace cotr
