// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cotr/model_adapters.hpp"
#include "cotr/reward.hpp"
#include "oracles.hpp"

using cotr::TimeAnchor;

namespace {

cotr::Sample make_sample() {
  cotr::Sample s;
  s.sample_id = "s1";
  s.video_id = "v1";
  s.duration_s = 600;
  s.question = "Who scored?";
  s.reference_answer = "Goal by #9";
  s.reference_chain.steps = {{"the pass", {TimeAnchor::point(30)}}, {"the dribble", {TimeAnchor::span(60, 70)}}};
  s.reference_chain.answer = s.reference_answer;
  return s;
}

TimeAnchor random_anchor(std::mt19937_64& rng, double duration) {
  std::uniform_real_distribution<double> t(0.0, duration);
  std::bernoulli_distribution is_point(0.5);
  if (is_point(rng)) return TimeAnchor::point(t(rng));
  return cotr::normalize_anchor(t(rng), t(rng), duration);
}

oracle::Iv iv(const TimeAnchor& a) { return {a.start_s, a.end_s}; }

class ThrowingJudge : public cotr::JudgeAdapter {
 public:
  std::string id() const override { return "down"; }
  cotr::JudgeVerdict judge(const cotr::JudgeRequest&) override { throw cotr::TransportError("judge unreachable"); }
};

class AlwaysCorrectJudge : public cotr::JudgeAdapter {
 public:
  std::string id() const override { return "yes"; }
  cotr::JudgeVerdict judge(const cotr::JudgeRequest& r) override {
    last = r;
    return {r.sample_id, id(), true};
  }
  cotr::JudgeRequest last;
};

}  // namespace

TEST(FormatReward, TagsDecide) {
  EXPECT_EQ(cotr::format_reward(cotr::parse_output("<thinking>a</thinking><answer>b</answer>", 60)), 1.0);
  EXPECT_EQ(cotr::format_reward(cotr::parse_output("<thinking>a</thinking>", 60)), 0.0);
  EXPECT_EQ(cotr::format_reward(cotr::parse_output("plain text", 60)), 0.0);
}

TEST(AccuracyReward, Modes) {
  using cotr::AccuracyMode;
  EXPECT_EQ(cotr::accuracy_reward("Goal by #9!", "goal by 9", AccuracyMode::ExactNormalized), 1.0);
  EXPECT_EQ(cotr::accuracy_reward("goal", "goal by 9", AccuracyMode::ExactNormalized), 0.0);
  EXPECT_EQ(cotr::accuracy_reward("It was a goal by #9", "goal by 9", AccuracyMode::Containment), 1.0);
  EXPECT_EQ(cotr::accuracy_reward("", "goal", AccuracyMode::Containment), 0.0);
  EXPECT_EQ(cotr::accuracy_reward("...", "goal", AccuracyMode::Containment), 0.0);
  EXPECT_EQ(cotr::normalize_answer("  Hello,\tWORLD!  "), "hello world");
}

TEST(AccuracyReward, ExternalJudgeNeedsAJudge) {
  EXPECT_THROW(cotr::accuracy_reward("a", "b", cotr::AccuracyMode::ExternalJudge), std::invalid_argument);
  AlwaysCorrectJudge judge;
  cotr::JudgeRequest ctx{"s7", "q?", "ref", "pred"};
  EXPECT_EQ(cotr::accuracy_reward("pred", "ref", cotr::AccuracyMode::ExternalJudge, &judge, &ctx), 1.0);
  EXPECT_EQ(judge.last.sample_id, "s7");
  EXPECT_EQ(judge.last.question, "q?");
}

TEST(AccuracyReward, JudgeTransportErrorPropagates) {
  ThrowingJudge judge;
  auto parsed = cotr::parse_output("<thinking>a 00:30</thinking><answer>x</answer>", 600);
  EXPECT_THROW(cotr::total_reward(parsed, make_sample(), {}, cotr::AccuracyMode::ExternalJudge, &judge),
               cotr::TransportError);
}

TEST(CoverageReward, Examples) {
  std::vector<cotr::ReasoningStep> steps = {
      {"a", {TimeAnchor::point(1)}}, {"b", {}}, {"c", {TimeAnchor::point(2)}}, {"d", {TimeAnchor::span(1, 2)}}};
  EXPECT_DOUBLE_EQ(cotr::coverage_reward(steps), 0.75);
  steps[1].anchors.push_back(TimeAnchor::point(3));
  EXPECT_DOUBLE_EQ(cotr::coverage_reward(steps), 1.0);
  EXPECT_EQ(cotr::coverage_reward({}), 0.0);
}

TEST(AnchorSimilarity, Examples) {
  EXPECT_NEAR(cotr::anchor_similarity(TimeAnchor::span(10, 20), TimeAnchor::span(15, 25), 10), 5.0 / 15.0, 1e-12);
  EXPECT_EQ(cotr::anchor_similarity(TimeAnchor::point(30), TimeAnchor::point(30), 10), 1.0);
  EXPECT_NEAR(cotr::anchor_similarity(TimeAnchor::point(30), TimeAnchor::point(32), 10), 0.8, 1e-12);
  EXPECT_EQ(cotr::anchor_similarity(TimeAnchor::point(30), TimeAnchor::point(45), 10), 0.0);
  EXPECT_EQ(cotr::anchor_similarity(TimeAnchor::point(65), TimeAnchor::span(60, 70), 10), 1.0);
  EXPECT_NEAR(cotr::anchor_similarity(TimeAnchor::point(73), TimeAnchor::span(60, 70), 10), 0.7, 1e-12);
  EXPECT_NEAR(cotr::anchor_similarity(TimeAnchor::span(60, 70), TimeAnchor::point(57), 10), 0.7, 1e-12);
}

TEST(CorrectnessReward, Examples) {
  const std::vector<TimeAnchor> gt = {TimeAnchor::point(30), TimeAnchor::span(60, 70)};
  const std::vector<TimeAnchor> pred = {TimeAnchor::point(32), TimeAnchor::span(58, 72)};
  const double r = cotr::correctness_reward(gt, pred, 10);
  EXPECT_NEAR(r, (0.8 + 10.0 / 14.0) / 2.0, 1e-12);
  EXPECT_NEAR(r, 0.7571, 5e-5);
  EXPECT_EQ(cotr::correctness_reward(gt, gt, 10), 1.0);
  EXPECT_EQ(cotr::correctness_reward(gt, {}, 10), 0.0);
  EXPECT_THROW(cotr::correctness_reward({}, pred, 10), std::invalid_argument);
}

TEST(TemporalReward, Examples) {
  EXPECT_EQ(cotr::temporal_reward(1.0, 1.0, 0.3), 1.0);
  // r_cor is the unrounded mean(0.8, 10/14) from the correctness example.
  const double r_cor = (0.8 + 10.0 / 14.0) / 2.0;
  EXPECT_NEAR(cotr::temporal_reward(0.75, r_cor, 0.5), 0.7536, 5e-5);
  EXPECT_EQ(cotr::temporal_reward(0.4, 0.9, 0.0), 0.9);
}

TEST(TotalReward, Bounds) {
  const auto sample = make_sample();
  cotr::RewardConfig ones;
  ones.lambda_fmt = 1.0;
  const auto perfect = cotr::parse_output(cotr::render_chain(sample.reference_chain), sample.duration_s);
  auto b = cotr::total_reward(perfect, sample, ones, cotr::AccuracyMode::ExactNormalized);
  EXPECT_EQ(b.r_fmt, 1.0);
  EXPECT_EQ(b.r_acc, 1.0);
  EXPECT_EQ(b.r_cov, 1.0);
  EXPECT_EQ(b.r_cor, 1.0);
  EXPECT_EQ(b.r_temporal, 1.0);
  EXPECT_EQ(b.total, 3.0);

  b = cotr::total_reward(cotr::parse_output("", sample.duration_s), sample, ones, cotr::AccuracyMode::ExactNormalized);
  EXPECT_EQ(b.total, 0.0);
}

TEST(TotalReward, CompositionExample) {
  const auto b = cotr::compose_reward(1.0, 0.0, 0.75, (0.8 + 10.0 / 14.0) / 2.0, cotr::RewardConfig{});
  EXPECT_NEAR(b.r_temporal, 0.7536, 5e-5);
  EXPECT_NEAR(b.total, 1.2536, 5e-5);
}

TEST(TotalReward, InvalidConfigRejected) {
  cotr::RewardConfig bad;
  bad.alpha = -0.1;
  EXPECT_THROW(cotr::total_reward(cotr::parse_output("", 600), make_sample(), bad, cotr::AccuracyMode::Containment),
               std::invalid_argument);
}

TEST(RewardProperties, SimilaritySymmetryForLikeKinds) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> t(0, 1000);
  for (int i = 0; i < 5000; ++i) {
    const auto a = cotr::normalize_anchor(t(rng), t(rng), 1000), b = cotr::normalize_anchor(t(rng), t(rng), 1000);
    ASSERT_EQ(cotr::anchor_similarity(a, b, 10), cotr::anchor_similarity(b, a, 10));
    const auto p = TimeAnchor::point(t(rng)), q = TimeAnchor::point(t(rng));
    ASSERT_EQ(cotr::anchor_similarity(p, q, 7), cotr::anchor_similarity(q, p, 7));
  }
}

TEST(RewardProperties, AddingAPredictionNeverLowersCorrectness) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> n(1, 5);
  for (int i = 0; i < 3000; ++i) {
    std::vector<TimeAnchor> gt, pred;
    for (int k = n(rng); k > 0; --k) gt.push_back(random_anchor(rng, 300));
    for (int k = n(rng) - 1; k > 0; --k) pred.push_back(random_anchor(rng, 300));
    const double before = cotr::correctness_reward(gt, pred, 10);
    pred.push_back(random_anchor(rng, 300));
    ASSERT_GE(cotr::correctness_reward(gt, pred, 10), before);
  }
}

TEST(RewardProperties, ShiftInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> n(1, 5);
  std::uniform_int_distribution<int> shift(-200, 200);
  for (int i = 0; i < 3000; ++i) {
    std::vector<TimeAnchor> gt, pred, gt2, pred2;
    for (int k = n(rng); k > 0; --k) gt.push_back(random_anchor(rng, 300));
    for (int k = n(rng); k > 0; --k) pred.push_back(random_anchor(rng, 300));
    // Integer shifts keep the interval arithmetic exact.
    for (auto& a : gt) a = TimeAnchor{a.kind, std::round(a.start_s), std::round(a.end_s)};
    for (auto& a : pred) a = TimeAnchor{a.kind, std::round(a.start_s), std::round(a.end_s)};
    const double d = shift(rng);
    for (const auto& a : gt) gt2.push_back({a.kind, a.start_s + d, a.end_s + d});
    for (const auto& a : pred) pred2.push_back({a.kind, a.start_s + d, a.end_s + d});
    ASSERT_NEAR(cotr::correctness_reward(gt, pred, 10), cotr::correctness_reward(gt2, pred2, 10), 1e-12);
  }
}

TEST(RewardProperties, MatchesBruteForceOracle) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> ngt(1, 5), npred(0, 5);
  std::uniform_real_distribution<double> dur(1, 3600), tol(0.5, 30);
  for (int i = 0; i < 1000; ++i) {
    const double d = dur(rng), tau = tol(rng);
    std::vector<TimeAnchor> gt, pred;
    std::vector<oracle::Iv> ogt, opred;
    for (int k = ngt(rng); k > 0; --k) gt.push_back(random_anchor(rng, d)), ogt.push_back(iv(gt.back()));
    for (int k = npred(rng); k > 0; --k) pred.push_back(random_anchor(rng, d)), opred.push_back(iv(pred.back()));
    ASSERT_NEAR(cotr::correctness_reward(gt, pred, tau), oracle::brute_force_alignment(ogt, opred, tau), 1e-12);
  }
}

TEST(RewardProperties, ComponentsBoundedAndComposed) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0, 1), lam(0, 3);
  for (int i = 0; i < 2000; ++i) {
    cotr::RewardConfig cfg;
    cfg.lambda_fmt = lam(rng);
    cfg.lambda_acc = lam(rng);
    cfg.lambda_temporal = lam(rng);
    cfg.alpha = u(rng);
    const auto b = cotr::compose_reward(u(rng) < 0.5 ? 0 : 1, u(rng) < 0.5 ? 0 : 1, u(rng), u(rng), cfg);
    for (double c : {b.r_fmt, b.r_acc, b.r_cov, b.r_cor, b.r_temporal}) {
      ASSERT_GE(c, 0.0);
      ASSERT_LE(c, 1.0);
    }
    ASSERT_LE(b.total, cfg.lambda_fmt + cfg.lambda_acc + cfg.lambda_temporal + 1e-12);
  }
}
