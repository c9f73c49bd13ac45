// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotr/evaluate.hpp"
#include "cotr/schema.hpp"

namespace cotr {

enum class ReportFormat { Json, Markdown };

namespace detail {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pct(const std::optional<double>& v) { return v ? fixed(100.0 * *v, 2) : "n/a"; }

}  // namespace detail

inline void to_json(json& j, const SampleRecord& r) {
  using detail::opt;
  j = json{{"sample_id", r.sample_id},
           {"task_type", std::string(to_string(r.task_type))},
           {"format_ok", r.format_ok},
           {"n_steps", r.n_steps},
           {"n_anchored_steps", r.n_anchored_steps},
           {"coverage", r.coverage},
           {"correct", opt(r.correct)},
           {"reward", opt(r.reward)},
           {"grounding_score", opt(r.grounding_score)},
           {"grounding_score_strict", opt(r.grounding_score_strict)}};
  if (!r.judge_error.empty()) j["judge_error"] = r.judge_error;
}

inline void from_json(const json& j, SampleRecord& r) {
  using detail::opt_from;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.task_type = task_type_from_string(j.at("task_type").get<std::string>());
  r.format_ok = j.at("format_ok").get<bool>();
  r.n_steps = j.at("n_steps").get<std::size_t>();
  r.n_anchored_steps = j.at("n_anchored_steps").get<std::size_t>();
  r.coverage = j.at("coverage").get<double>();
  r.correct = opt_from<bool>(j, "correct");
  r.reward = opt_from<RewardBreakdown>(j, "reward");
  r.grounding_score = opt_from<double>(j, "grounding_score");
  r.grounding_score_strict = opt_from<double>(j, "grounding_score_strict");
  r.judge_error = j.value("judge_error", std::string{});
}

inline json sga_to_json(const SgaTable& t) {
  using detail::opt;
  return json{{"n_evaluated", t.n_evaluated},
              {"n_scored", t.n_scored},
              {"n_grounded", t.n_grounded},
              {"accuracy", opt(t.accuracy)},
              {"anchor_rate", t.anchor_rate},
              {"anchor_presence_rate", t.anchor_presence_rate},
              {"miou", opt(t.miou)},
              {"miou_strict_iou", opt(t.miou_strict)},
              {"hit", opt(t.hit)},
              {"hit_threshold", t.hit_threshold}};
}

inline json tasks_to_json(const TaskBreakdown& tb) {
  json per = json::object(), counts = json::object();
  for (const auto& [task, acc] : tb.per_task) per[std::string(to_string(task))] = acc;
  for (const auto& [task, n] : tb.counts) counts[std::string(to_string(task))] = n;
  return json{{"per_task", per}, {"counts", counts}, {"average", tb.macro_average}, {"micro_average", tb.micro_average}};
}

inline json agreement_to_json(const AgreementBlock& a) {
  return json{{"judges", a.judges},
              {"n_samples", a.n_samples},
              {"pairwise_agreement", detail::opt(a.pairwise_agreement)},
              {"fleiss_kappa", detail::opt(a.fleiss_kappa)},
              {"reference_judge", a.reference_judge},
              {"cohen_kappa_vs_reference", a.cohen_vs_reference}};
}

inline json report_to_json(const RunReport& r) {
  json j{{"toolkit_version", r.toolkit_version},
         {"config", r.config},
         {"records", r.records},
         {"sga", sga_to_json(r.sga)},
         {"tasks", r.tasks ? tasks_to_json(*r.tasks) : json(nullptr)},
         {"agreement", r.agreement ? agreement_to_json(*r.agreement) : json(nullptr)},
         {"unmatched_predictions", r.unmatched_predictions},
         {"missing_predictions", r.missing_predictions},
         {"unscored", r.unscored()}};
  if (r.human_assessment) j["human_assessment"] = *r.human_assessment;
  return j;
}

inline std::string report_to_markdown(const RunReport& r) {
  using detail::fixed;
  using detail::pct;
  const SgaTable& t = r.sga;
  std::string md = "# Evaluation report\n\n";
  md += "toolkit " + r.toolkit_version + "; " + std::to_string(t.n_evaluated) + " samples evaluated, " +
        std::to_string(t.n_scored) + " with an accuracy verdict, " + std::to_string(r.unscored()) + " unscored.\n\n";

  md += "## Step-wise grounding alignment\n\n";
  md += "| Acc (%) | Anchor (%) | mIoU | H@" + fixed(t.hit_threshold, 1) + " (%) |\n";
  md += "|---:|---:|---:|---:|\n";
  md += "| " + pct(t.accuracy) + " | " + pct(t.anchor_rate) + " | " + (t.miou ? fixed(*t.miou, 4) : "n/a") + " | " +
        pct(t.hit) + " |\n\n";
  md += "Anchor presence (samples with any anchor): " + pct(t.anchor_presence_rate) +
        "%. Strict-IoU mIoU: " + (t.miou_strict ? fixed(*t.miou_strict, 4) : "n/a") + ".\n\n";

  if (r.tasks) {
    md += "## Accuracy by task type\n\n|";
    std::string rule = "|";
    std::string row = "|";
    for (const auto& [task, acc] : r.tasks->per_task) {
      std::string name(to_string(task));
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      md += " " + name + " |";
      rule += "---:|";
      row += " " + fixed(100.0 * acc, 2) + " |";
    }
    md += " Avg. |\n" + rule + "---:|\n" + row + " " + fixed(100.0 * r.tasks->macro_average, 2) + " |\n\n";
    md += "Per-sample (micro) accuracy: " + fixed(100.0 * r.tasks->micro_average, 2) + "%.\n\n";
  }

  if (r.agreement) {
    const auto& a = *r.agreement;
    md += "## Judge agreement\n\n";
    md += "Judges: ";
    for (std::size_t i = 0; i < a.judges.size(); ++i) md += (i ? ", " : "") + a.judges[i];
    md += " over " + std::to_string(a.n_samples) + " samples.\n\n";
    md += "| Avg. pairwise agreement (%) | Fleiss' kappa |\n|---:|---:|\n";
    md += "| " + pct(a.pairwise_agreement) + " | " + (a.fleiss_kappa ? fixed(*a.fleiss_kappa, 4) : "n/a") + " |\n\n";
    if (!a.cohen_vs_reference.empty()) {
      md += "| Judge | Cohen's kappa vs " + a.reference_judge + " |\n|---|---:|\n";
      for (const auto& [judge, k] : a.cohen_vs_reference) md += "| " + judge + " | " + fixed(k, 4) + " |\n";
      md += "\n";
    }
  }

  if (r.human_assessment) md += "## Human assessment\n\n```json\n" + r.human_assessment->dump(2) + "\n```\n\n";
  if (!r.missing_predictions.empty())
    md += "Samples without a prediction: " + std::to_string(r.missing_predictions.size()) + ".\n";
  if (!r.unmatched_predictions.empty())
    md += "Predictions without a sample: " + std::to_string(r.unmatched_predictions.size()) + ".\n";
  return md;
}

inline std::string emit_report(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::Markdown) return report_to_markdown(r);
  return report_to_json(r).dump(2) + "\n";
}

}  // namespace cotr
