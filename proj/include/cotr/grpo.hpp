// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotr/core.hpp"
#include "cotr/parser.hpp"

namespace cotr {

inline constexpr double kDefaultAdvantageEpsilon = 1e-8;
inline constexpr int kDefaultGroupSize = 8;

struct RewardGroup {
  std::string sample_id;
  std::vector<double> rewards;
};

/// Group-relative advantages A_i = (r_i - mean) / (std_pop + epsilon).
/// A zero-variance group yields all zeros.
inline std::vector<double> group_advantages(std::span<const double> rewards, double epsilon = kDefaultAdvantageEpsilon) {
  if (rewards.size() < 2) throw std::invalid_argument("group_advantages needs at least 2 rewards");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  for (double r : rewards)
    if (!std::isfinite(r)) throw std::invalid_argument("group_advantages: non-finite reward");

  std::vector<double> out(rewards.size(), 0.0);
  auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  if (*lo == *hi) return out;

  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double denom = std::sqrt(ss / n) + epsilon;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

/// Rollout source for group collection. `generate` must be deterministic in
/// `seed` for reproducible groups; failures throw TransportError.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  virtual std::string generate(const std::string& video_ref, const std::string& question, std::uint64_t seed) = 0;
};

using RewardFn = std::function<double(const ParsedOutput&, const Sample&)>;

struct GroupRollouts {
  RewardGroup group;
  std::vector<ParsedOutput> outputs;
  std::vector<std::uint64_t> seeds;
};

/// Requests `group_size` rollouts with seeds base_seed, base_seed+1, ...,
/// scores each one and keeps emission order. Any adapter failure aborts the
/// whole group.
inline GroupRollouts collect_group(const Sample& sample, ModelAdapter& model, int group_size, const RewardFn& reward_fn,
                                   std::uint64_t base_seed = 0) {
  if (group_size < 2) throw std::invalid_argument("group size must be at least 2");
  GroupRollouts out;
  out.group.sample_id = sample.sample_id;
  for (int i = 0; i < group_size; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    std::string raw;
    try {
      raw = model.generate(sample.video_id, sample.question, seed);
    } catch (const TransportError&) {
      throw;
    } catch (const std::exception& e) {
      throw TransportError("rollout " + std::to_string(i) + " (seed " + std::to_string(seed) + "): " + e.what());
    }
    ParsedOutput parsed = parse_output(raw, sample.duration_s);
    out.group.rewards.push_back(reward_fn(parsed, sample));
    out.outputs.push_back(std::move(parsed));
    out.seeds.push_back(seed);
  }
  return out;
}

}  // namespace cotr
