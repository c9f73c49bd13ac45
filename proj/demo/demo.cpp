// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

// Walks one raw model output through parsing, rewards, group advantages,
// the observation loop and the overlay.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cotr/cotr.hpp"

int main() {
  cotr::Sample sample;
  sample.sample_id = "demo-1";
  sample.video_id = "match-07";
  sample.duration_s = 600;
  sample.question = "Which side did the winning attack come from?";
  sample.reference_answer = "left wing";
  sample.reference_chain.steps = {
      {"the full back overlaps on the left", {cotr::TimeAnchor::span(60, 70)}},
      {"the cross is turned in at the near post", {cotr::TimeAnchor::point(135)}},
  };
  sample.reference_chain.answer = "left wing";

  const std::string raw =
      "<thinking>Step 1: [00:58-01:12] the full back overlaps on the left\n"
      "Step 2: at 02:20 the cross is turned in</thinking><answer>Left wing.</answer>";

  const auto parsed = cotr::parse_output(raw, sample.duration_s);
  std::printf("format_ok=%d steps=%zu\n", parsed.format_ok, parsed.chain.steps.size());
  for (const auto& step : parsed.chain.steps)
    for (const auto& a : step.anchors) std::printf("  anchor %s\n", cotr::render_anchor(a).c_str());

  const cotr::RewardConfig cfg;
  const auto r = cotr::total_reward(parsed, sample, cfg, cotr::AccuracyMode::ExactNormalized);
  std::printf("r_fmt=%.3f r_acc=%.3f r_cov=%.3f r_cor=%.4f total=%.4f\n", r.r_fmt, r.r_acc, r.r_cov, r.r_cor, r.total);

  const std::vector<double> group{r.total, 1.0, 0.25, r.total};
  std::printf("advantages:");
  for (double a : cotr::group_advantages(group)) std::printf(" %+.4f", a);
  std::printf("\n");

  cotr::ReplayModel model(std::map<std::string, std::string>{{cotr::ReplayModel::key(sample.video_id, sample.question), raw}});
  cotr::SyntheticFrameRetriever frames;
  const auto obs = cotr::observe_infer(sample, model, frames, cotr::PlannerConfig{});
  std::printf("atio: %zu turns, %zu frames requested, answer '%s'\n", obs.trace.turns.size(),
              obs.trace.frames_requested(), obs.refined.answer.c_str());

  cotr::Raster frame(96, 40);
  cotr::OverlayConfig ocfg;
  ocfg.scale = 1;
  const auto out = cotr::render_timestamp(frame, 135, ocfg);
  const auto box = cotr::label_box(cotr::format_timestamp(135), frame.width, ocfg, 1);
  for (int y = box.y; y < box.y + box.height; ++y) {
    for (int x = box.x; x < box.x + box.width; ++x) std::cout << (out.at(x, y).r ? '#' : '.');
    std::cout << "\n";
  }
  return 0;
}
