// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cotr/core.hpp"
#include "cotr/schema.hpp"

using cotr::AnchorKind;
using cotr::TimeAnchor;

TEST(NormalizeAnchor, PointIdentity) {
  auto a = cotr::normalize_anchor(30.0, std::nullopt, 600);
  EXPECT_EQ(a, TimeAnchor::point(30.0));
  EXPECT_TRUE(a.is_point());
  EXPECT_EQ(a.end_s, a.start_s);
}

TEST(NormalizeAnchor, SwapsReversedEndpoints) {
  EXPECT_EQ(cotr::normalize_anchor(70.0, 60.0, 600), TimeAnchor::span(60.0, 70.0));
}

TEST(NormalizeAnchor, ClampsToDuration) {
  EXPECT_EQ(cotr::normalize_anchor(-5.0, 9000.0, 600), TimeAnchor::span(0.0, 600.0));
}

TEST(NormalizeAnchor, EqualEndpointsCollapseToPoint) {
  auto a = cotr::normalize_anchor(42.0, 42.0, 600);
  EXPECT_EQ(a.kind, AnchorKind::Point);
  // A span clamped to a single boundary value is a point too.
  EXPECT_EQ(cotr::normalize_anchor(700.0, 800.0, 600), TimeAnchor::point(600.0));
}

TEST(NormalizeAnchor, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(cotr::normalize_anchor(nan, std::nullopt, 600), std::invalid_argument);
  EXPECT_THROW(cotr::normalize_anchor(1.0, inf, 600), std::invalid_argument);
  EXPECT_THROW(cotr::normalize_anchor(1.0, std::nullopt, 0.0), std::invalid_argument);
}

TEST(NormalizeAnchor, IdempotentOnRandomInputs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-500.0, 5000.0);
  std::bernoulli_distribution has_end(0.6);
  for (int i = 0; i < 5000; ++i) {
    const double d = 1.0 + std::abs(u(rng));
    std::optional<double> end;
    if (has_end(rng)) end = u(rng);
    const auto once = cotr::normalize_anchor(u(rng), end, d);
    const auto twice = cotr::normalize_anchor(once, d);
    ASSERT_EQ(once, twice);
    ASSERT_GE(once.start_s, 0.0);
    ASSERT_LE(once.end_s, d);
    ASSERT_LE(once.start_s, once.end_s);
  }
}

TEST(Enums, RoundTripLowercaseNames) {
  for (auto s : cotr::kAllSports) EXPECT_EQ(cotr::sport_from_string(cotr::to_string(s)), s);
  for (auto t : cotr::kAllTaskTypes) EXPECT_EQ(cotr::task_type_from_string(cotr::to_string(t)), t);
  EXPECT_EQ(cotr::to_string(cotr::Sport::AmericanFootball), "american_football");
  EXPECT_EQ(cotr::to_string(cotr::Sport::IceHockey), "ice_hockey");
  EXPECT_THROW(cotr::sport_from_string("Soccer"), std::invalid_argument);
}

TEST(RewardConfig, DefaultsAndValidation) {
  cotr::RewardConfig c;
  EXPECT_DOUBLE_EQ(c.lambda_fmt, 0.5);
  EXPECT_DOUBLE_EQ(c.lambda_acc, 1.0);
  EXPECT_DOUBLE_EQ(c.lambda_temporal, 1.0);
  EXPECT_DOUBLE_EQ(c.alpha, 0.5);
  EXPECT_DOUBLE_EQ(c.point_tolerance_s, 10.0);
  EXPECT_NO_THROW(c.validate());
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.point_tolerance_s = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda_acc = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

namespace {

cotr::Sample random_sample(std::mt19937_64& rng, int id) {
  std::uniform_real_distribution<double> dur(10.0, 4000.0);
  std::uniform_int_distribution<int> steps(1, 6);
  cotr::Sample s;
  s.sample_id = "s" + std::to_string(id);
  s.video_id = "v" + std::to_string(id % 7);
  s.duration_s = dur(rng);
  s.sport = cotr::kAllSports[static_cast<std::size_t>(id) % 5];
  s.task_type = cotr::kAllTaskTypes[static_cast<std::size_t>(id * 3) % 5];
  s.question = "q \"quoted\" é " + std::to_string(id);
  s.reference_answer = "answer " + std::to_string(id);
  const int n = steps(rng);
  for (int k = 0; k < n; ++k) {
    std::uniform_real_distribution<double> t(0.0, s.duration_s);
    double a = t(rng), b = t(rng);
    TimeAnchor anchor = (k % 2) ? cotr::normalize_anchor(a, b, s.duration_s) : TimeAnchor::point(a);
    s.reference_chain.steps.push_back({"step text " + std::to_string(k), {anchor}});
  }
  s.reference_chain.answer = s.reference_answer;
  return s;
}

}  // namespace

TEST(Serialization, SampleRoundTripIsExact) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const cotr::Sample s = random_sample(rng, i);
    const std::string text = cotr::json(s).dump();
    const cotr::Sample back = cotr::decode_sample(cotr::json::parse(text));
    ASSERT_EQ(s, back) << text;
  }
}

TEST(Serialization, ChainRoundTripIsExact) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto chain = random_sample(rng, i).reference_chain;
    const auto back = cotr::json::parse(cotr::json(chain).dump()).get<cotr::ChainOfTime>();
    ASSERT_EQ(chain, back);
  }
}

TEST(Serialization, AnchorEncoding) {
  const auto j = cotr::json(TimeAnchor::point(12.5));
  EXPECT_EQ(j.dump(), R"({"end_s":12.5,"start_s":12.5})");
  EXPECT_EQ(cotr::json::parse(R"({"start_s":3,"end_s":9})").get<TimeAnchor>(), TimeAnchor::span(3, 9));
}

TEST(Serialization, UnknownFieldsPreservedOnReadDroppedOnWrite) {
  auto j = cotr::json::parse(R"({"sample_id":"a","video_id":"v","duration_s":60,"sport":"soccer",
    "task_type":"causal","question":"q","reference_answer":"r","extra":{"k":[1,2]},
    "reference_chain":{"steps":[{"text":"t","anchors":[{"start_s":1,"end_s":1}]}],"answer":"r"}})");
  const auto s = cotr::decode_sample(j);
  ASSERT_EQ(s.unknown_fields.count("extra"), 1u);
  EXPECT_EQ(cotr::json::parse(s.unknown_fields.at("extra")), cotr::json::parse(R"({"k":[1,2]})"));
  EXPECT_FALSE(cotr::json(s).contains("extra"));
}

TEST(Validation, ReferenceStepsCarryExactlyOneAnchor) {
  std::mt19937_64 rng(3);
  auto s = random_sample(rng, 1);
  EXPECT_NO_THROW(cotr::validate_sample(s));
  s.reference_chain.steps[0].anchors.push_back(TimeAnchor::point(1.0));
  EXPECT_THROW(cotr::validate_sample(s), std::invalid_argument);
  s.reference_chain.steps[0].anchors.clear();
  EXPECT_THROW(cotr::validate_sample(s), std::invalid_argument);
}

TEST(Validation, RejectsBlankStepTextAndEmptyChain) {
  std::mt19937_64 rng(4);
  auto s = random_sample(rng, 2);
  s.reference_chain.steps[0].text = "  \t ";
  EXPECT_THROW(cotr::validate_sample(s), std::invalid_argument);
  s.reference_chain.steps.clear();
  EXPECT_THROW(cotr::validate_sample(s), std::invalid_argument);
}

TEST(Validation, DecodeWarnsOnSwapAndClamp) {
  auto j = cotr::json::parse(R"({"sample_id":"a","video_id":"v","duration_s":100,"sport":"volleyball",
    "task_type":"tactical","question":"q","reference_answer":"r",
    "reference_chain":{"steps":[{"text":"t","anchors":[{"start_s":70,"end_s":60}]},
                                {"text":"u","anchors":[{"start_s":90,"end_s":130}]}],"answer":"r"}})");
  std::vector<std::string> warnings;
  const auto s = cotr::decode_sample(j, &warnings);
  EXPECT_EQ(s.reference_chain.steps[0].anchors[0], TimeAnchor::span(60, 70));
  EXPECT_EQ(s.reference_chain.steps[1].anchors[0], TimeAnchor::span(90, 100));
  EXPECT_EQ(warnings.size(), 2u);
}
