// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cotr/grpo.hpp"
#include "cotr/model_adapters.hpp"
#include "cotr/reward.hpp"
#include "oracles.hpp"

using cotr::TimeAnchor;

TEST(GroupAdvantages, Examples) {
  const std::vector<double> r = {1.0, 0.5, 0.0};
  const auto a = cotr::group_advantages(r, 1e-8);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_NEAR(a[0], 1.2247, 5e-5);
  EXPECT_NEAR(a[1], 0.0, 1e-12);
  EXPECT_NEAR(a[2], -1.2247, 5e-5);

  const std::vector<double> c = {0.7, 0.7, 0.7, 0.7};
  EXPECT_EQ(cotr::group_advantages(c), std::vector<double>(4, 0.0));

  const std::vector<double> two = {2.0, 0.0};
  const auto b = cotr::group_advantages(two);
  EXPECT_NEAR(b[0], 1.0, 1e-7);
  EXPECT_NEAR(b[1], -1.0, 1e-7);
}

TEST(GroupAdvantages, RejectsBadInput) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(cotr::group_advantages(one), std::invalid_argument);
  const std::vector<double> nan = {1.0, std::nan("")};
  EXPECT_THROW(cotr::group_advantages(nan), std::invalid_argument);
  const std::vector<double> ok = {1.0, 0.0};
  EXPECT_THROW(cotr::group_advantages(ok, 0.0), std::invalid_argument);
}

TEST(GroupAdvantages, PropertiesOnRandomGroups) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> u(0.0, 2.5), scale(0.1, 10.0), shift(-5.0, 5.0);
  for (int g = 0; g < 1000; ++g) {
    std::vector<double> r(static_cast<std::size_t>(size(rng)));
    for (auto& x : r) x = u(rng);
    const auto a = cotr::group_advantages(r, 1e-12);

    ASSERT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 0.0, 1e-9);

    const auto want = oracle::zscores(r, 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(a[i], want[i], 1e-9);

    std::vector<std::size_t> perm(r.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> rp(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rp[i] = r[perm[i]];
    const auto ap = cotr::group_advantages(rp, 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(ap[i], a[perm[i]], 1e-12);

    const double s = scale(rng), t = shift(rng);
    std::vector<double> rs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rs[i] = s * r[i] + t;
    const auto as = cotr::group_advantages(rs, 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(as[i], a[i], 1e-6);
  }
}

namespace {

/// Emits a perfect chain for one chosen seed and a chain with no anchors
/// otherwise; records every seed it was asked for.
class ScriptedPolicy : public cotr::ModelAdapter {
 public:
  ScriptedPolicy(std::string perfect, std::uint64_t good_seed) : perfect_(std::move(perfect)), good_(good_seed) {}
  std::string generate(const std::string&, const std::string&, std::uint64_t seed) override {
    seeds.push_back(seed);
    if (fail_on && seed == *fail_on) throw std::runtime_error("backend crashed");
    if (seed == good_) return perfect_;
    return "<thinking>I think something happened.</thinking><answer>no idea</answer>";
  }
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> fail_on;

 private:
  std::string perfect_;
  std::uint64_t good_;
};

cotr::Sample sample() {
  cotr::Sample s;
  s.sample_id = "g1";
  s.video_id = "v";
  s.duration_s = 600;
  s.question = "What happened?";
  s.reference_answer = "a goal";
  s.reference_chain.steps = {{"pass", {TimeAnchor::point(30)}}, {"shot", {TimeAnchor::span(60, 70)}}};
  s.reference_chain.answer = s.reference_answer;
  return s;
}

double reward(const cotr::ParsedOutput& p, const cotr::Sample& s) {
  cotr::RewardConfig cfg;
  return cotr::total_reward(p, s, cfg, cotr::AccuracyMode::ExactNormalized).total /
         (cfg.lambda_fmt + cfg.lambda_acc + cfg.lambda_temporal);
}

}  // namespace

TEST(CollectGroup, OrderSeedsAndAdvantages) {
  const auto s = sample();
  ScriptedPolicy policy(cotr::render_chain(s.reference_chain), 103);
  const auto g = cotr::collect_group(s, policy, 8, reward, 100);
  ASSERT_EQ(g.group.rewards.size(), 8u);
  EXPECT_EQ(g.group.sample_id, "g1");
  EXPECT_EQ(policy.seeds, (std::vector<std::uint64_t>{100, 101, 102, 103, 104, 105, 106, 107}));
  EXPECT_EQ(g.seeds, policy.seeds);
  for (double r : g.group.rewards) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
  EXPECT_DOUBLE_EQ(g.group.rewards[3], 1.0);

  const auto adv = cotr::group_advantages(g.group.rewards);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    if (i == 3) {
      EXPECT_GT(adv[i], 0.0);
    } else {
      EXPECT_LT(adv[i], 0.0);
    }
  }
}

TEST(CollectGroup, RejectsSingletonGroups) {
  auto s = sample();
  ScriptedPolicy policy("", 0);
  EXPECT_THROW(cotr::collect_group(s, policy, 1, reward), std::invalid_argument);
}

TEST(CollectGroup, AdapterFailureAbortsWithTransportError) {
  auto s = sample();
  ScriptedPolicy policy("", 0);
  policy.fail_on = 5;
  try {
    cotr::collect_group(s, policy, 8, reward, 0);
    FAIL() << "expected TransportError";
  } catch (const cotr::TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("seed 5"), std::string::npos) << e.what();
  }
  EXPECT_EQ(policy.seeds.size(), 6u);
}
