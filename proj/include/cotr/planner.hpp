// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cotr/core.hpp"
#include "cotr/parser.hpp"

namespace cotr {

/// Anchor-triggered sampling parameters. The observation window of a point
/// anchor is implied by L and the stride: (L - 1) * stride_s.
struct PlannerConfig {
  int frames_per_clip = 8;     // L
  double stride_s = 2.0;
  int clips_per_span = 3;      // J
  int max_turns = 8;

  void validate() const {
    if (frames_per_clip < 1) throw std::invalid_argument("frames_per_clip must be >= 1");
    if (clips_per_span < 1) throw std::invalid_argument("clips_per_span must be >= 1");
    if (max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
    if (!(stride_s > 0.0) || !std::isfinite(stride_s)) throw std::invalid_argument("stride_s must be positive");
  }
};

using Clip = std::vector<double>;

struct SamplingPlan {
  TimeAnchor anchor;
  std::vector<Clip> clips;

  std::size_t frame_count() const {
    std::size_t n = 0;
    for (const auto& c : clips) n += c.size();
    return n;
  }
};

/// L frames at a fixed stride centred on `center`, clamped into
/// [0, duration_s]; timestamps that coincide after clamping are merged.
inline Clip centered_clip(double center, const PlannerConfig& cfg, double duration_s) {
  Clip clip;
  clip.reserve(static_cast<std::size_t>(cfg.frames_per_clip));
  const double offset = 0.5 * (cfg.frames_per_clip - 1);
  for (int i = 0; i < cfg.frames_per_clip; ++i) {
    const double t = std::clamp(center + (i - offset) * cfg.stride_s, 0.0, duration_s);
    if (clip.empty() || clip.back() != t) clip.push_back(t);
  }
  return clip;
}

/// Point anchors get one centred clip; spans get J clips centred on the
/// midpoints of J equal bins across the span.
inline SamplingPlan plan_for_anchor(const TimeAnchor& anchor, const PlannerConfig& cfg, double duration_s) {
  cfg.validate();
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  SamplingPlan plan{anchor, {}};
  if (anchor.is_point()) {
    plan.clips.push_back(centered_clip(anchor.start_s, cfg, duration_s));
    return plan;
  }
  const double bin = anchor.length() / cfg.clips_per_span;
  for (int j = 0; j < cfg.clips_per_span; ++j) {
    plan.clips.push_back(centered_clip(anchor.start_s + (j + 0.5) * bin, cfg, duration_s));
  }
  return plan;
}

/// Plans for every anchor of one step, capped at J clips in total so a
/// step never requests more than J * L frames.
inline std::vector<SamplingPlan> plan_for_step(const ReasoningStep& step, const PlannerConfig& cfg, double duration_s) {
  std::vector<SamplingPlan> plans;
  std::size_t budget = static_cast<std::size_t>(cfg.clips_per_span);
  for (const auto& a : step.anchors) {
    if (budget == 0) break;
    SamplingPlan p = plan_for_anchor(a, cfg, duration_s);
    if (p.clips.size() > budget) p.clips.resize(budget);
    budget -= p.clips.size();
    plans.push_back(std::move(p));
  }
  return plans;
}

/// Fetches frames for planned timestamps. Must tolerate concurrent calls.
class FrameRetriever {
 public:
  virtual ~FrameRetriever() = default;
  virtual std::vector<std::string> fetch(const std::string& video_ref, std::span<const double> timestamps) = 0;
};

/// Maps each timestamp to the nearest stored frame file in a directory.
/// File stems must end in a frame index (e.g. `frame_000123.ppm`); the
/// timestamp of index i is i / fps.
class DirectoryFrameRetriever : public FrameRetriever {
 public:
  DirectoryFrameRetriever(const std::filesystem::path& dir, double fps) {
    if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
    if (!std::filesystem::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      const std::string stem = e.path().stem().string();
      std::size_t b = stem.size();
      while (b > 0 && std::isdigit(static_cast<unsigned char>(stem[b - 1]))) --b;
      if (b == stem.size()) continue;
      frames_.emplace(std::stod(stem.substr(b)) / fps, e.path().string());
    }
    if (frames_.empty()) throw std::invalid_argument("no numbered frames in " + dir.string());
  }

  std::vector<std::string> fetch(const std::string&, std::span<const double> timestamps) override {
    std::vector<std::string> out;
    out.reserve(timestamps.size());
    for (double t : timestamps) {
      auto hi = frames_.lower_bound(t);
      if (hi == frames_.end()) {
        out.push_back(std::prev(hi)->second);
      } else if (hi == frames_.begin() || hi->first - t <= t - std::prev(hi)->first) {
        out.push_back(hi->second);
      } else {
        out.push_back(std::prev(hi)->second);
      }
    }
    return out;
  }

  std::size_t size() const { return frames_.size(); }

 private:
  std::multimap<double, std::string> frames_;
};

/// Returns synthetic references `<video>@<seconds>` without touching disk.
class SyntheticFrameRetriever : public FrameRetriever {
 public:
  std::vector<std::string> fetch(const std::string& video_ref, std::span<const double> timestamps) override {
    std::vector<std::string> out;
    for (double t : timestamps) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", t);
      out.push_back(video_ref + "@" + buf);
    }
    return out;
  }
};

struct StepRevision {
  std::string text;
  // Raw (start, optional end) pairs; normalized by the loop.
  std::vector<std::pair<double, std::optional<double>>> anchors;
  std::optional<std::string> early_answer;
};

/// Model side of the anchor-observe-infer loop.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual std::string generate_chain(const std::string& video_ref, const std::string& question) = 0;
  virtual StepRevision verify_step(const std::string& question, const ReasoningStep& step,
                                   std::span<const std::string> frame_refs) = 0;
  virtual std::string final_answer(const std::string& question, const ChainOfTime& refined) = 0;
};

struct TurnRecord {
  int turn = 0;                 // 1-based
  std::size_t step_index = 0;
  std::vector<SamplingPlan> plans;
  std::size_t frames_requested = 0;
  std::vector<std::string> frame_refs;
  ReasoningStep before;
  ReasoningStep after;
  bool revised = false;
  bool early_answer = false;
};

struct ObservationTrace {
  std::string initial_raw;
  ChainOfTime initial_chain;
  std::vector<TurnRecord> turns;
  std::size_t adapter_calls = 0;

  std::size_t frames_requested() const {
    std::size_t n = 0;
    for (const auto& t : turns) n += t.frames_requested;
    return n;
  }
};

struct ObservationResult {
  ChainOfTime refined;  // answer holds the final answer
  ObservationTrace trace;
};

/// Adapter failure inside the loop, carrying everything recorded so far.
struct ObservationError : public TransportError {
  ObservationError(const std::string& what, ObservationTrace partial)
      : TransportError(what), trace(std::move(partial)) {}
  ObservationTrace trace;
};

/// Anchor-observe-infer: parse an initial anchored chain, then for each
/// anchored step (at most max_turns) plan local clips, retrieve frames,
/// and let the model verify and revise the step. Unanchored steps are
/// skipped. An early answer from verification ends the loop and becomes
/// the final answer; otherwise the model answers from the refined chain.
inline ObservationResult observe_infer(const Sample& sample, ObservationModel& model, FrameRetriever& retriever,
                                       const PlannerConfig& cfg) {
  cfg.validate();
  ObservationTrace trace;
  auto fail = [&](const char* stage, const std::exception& e) -> ObservationError {
    return ObservationError(std::string(stage) + ": " + e.what(), trace);
  };

  try {
    ++trace.adapter_calls;
    trace.initial_raw = model.generate_chain(sample.video_id, sample.question);
  } catch (const std::exception& e) {
    throw fail("generate_chain", e);
  }
  trace.initial_chain = parse_output(trace.initial_raw, sample.duration_s).chain;
  ChainOfTime chain = trace.initial_chain;

  std::optional<std::string> answer;
  int turn = 0;
  for (std::size_t i = 0; i < chain.steps.size() && turn < cfg.max_turns && !answer; ++i) {
    if (!chain.steps[i].anchored()) continue;
    TurnRecord rec;
    rec.turn = ++turn;
    rec.step_index = i;
    rec.before = chain.steps[i];
    rec.plans = plan_for_step(chain.steps[i], cfg, sample.duration_s);

    std::vector<double> timestamps;
    for (const auto& p : rec.plans)
      for (const auto& c : p.clips) timestamps.insert(timestamps.end(), c.begin(), c.end());
    rec.frames_requested = timestamps.size();

    try {
      ++trace.adapter_calls;
      rec.frame_refs = retriever.fetch(sample.video_id, timestamps);
    } catch (const std::exception& e) {
      trace.turns.push_back(std::move(rec));
      throw fail("frame retrieval", e);
    }

    StepRevision rev;
    try {
      ++trace.adapter_calls;
      rev = model.verify_step(sample.question, chain.steps[i], rec.frame_refs);
    } catch (const std::exception& e) {
      trace.turns.push_back(std::move(rec));
      throw fail("verify_step", e);
    }

    ReasoningStep revised;
    revised.text = is_blank(rev.text) ? chain.steps[i].text : rev.text;
    for (const auto& [start, end] : rev.anchors) {
      try {
        revised.anchors.push_back(normalize_anchor(start, end, sample.duration_s));
      } catch (const std::invalid_argument&) {
        // non-finite anchor from the adapter; dropped
      }
    }
    rec.after = revised;
    rec.revised = !(revised == chain.steps[i]);
    chain.steps[i] = std::move(revised);
    if (rev.early_answer && !is_blank(*rev.early_answer)) {
      rec.early_answer = true;
      answer = rev.early_answer;
    }
    trace.turns.push_back(std::move(rec));
  }

  if (!answer) {
    try {
      ++trace.adapter_calls;
      answer = model.final_answer(sample.question, chain);
    } catch (const std::exception& e) {
      throw fail("final_answer", e);
    }
  }
  chain.answer = *answer;
  return {std::move(chain), std::move(trace)};
}

}  // namespace cotr
