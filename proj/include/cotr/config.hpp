// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "cotr/chat_client.hpp"
#include "cotr/evaluate.hpp"
#include "cotr/grpo.hpp"
#include "cotr/planner.hpp"
#include "cotr/schema.hpp"

// Harness configuration. Precedence, highest first: command-line flag,
// environment variable, config file, built-in default. This header covers
// the last three; the CLI applies flags on top.

namespace cotr {

struct JudgeSettings {
  ChatEndpoint endpoint;
  std::string prompt_file;
  bool mock = false;
};

struct HarnessConfig {
  EvalConfig eval;
  PlannerConfig planner;
  JudgeSettings judge;
  ChatEndpoint model;  // policy model for `atio`
  int group_size = kDefaultGroupSize;
  double advantage_epsilon = kDefaultAdvantageEpsilon;
};

namespace detail {

inline void read_endpoint(const json& j, ChatEndpoint& e) {
  e.url = j.value("url", e.url);
  e.model = j.value("model", e.model);
  e.api_key = j.value("api_key", e.api_key);
  e.max_attempts = j.value("max_attempts", e.max_attempts);
  e.backoff_initial_s = j.value("backoff_initial_s", e.backoff_initial_s);
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  e.timeout_s = j.value("timeout_s", e.timeout_s);
  e.temperature = j.value("temperature", e.temperature);
  e.max_tokens = j.value("max_tokens", e.max_tokens);
}

// The API key is never written out.
inline json write_endpoint(const ChatEndpoint& e) {
  return json{{"url", e.url},
              {"model", e.model},
              {"max_attempts", e.max_attempts},
              {"backoff_initial_s", e.backoff_initial_s},
              {"max_in_flight", e.max_in_flight},
              {"timeout_s", e.timeout_s},
              {"temperature", e.temperature},
              {"max_tokens", e.max_tokens}};
}

}  // namespace detail

inline HarnessConfig config_from_json(const json& j) {
  HarnessConfig c;
  if (j.contains("reward")) c.eval.reward = j.at("reward").get<RewardConfig>();
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    if (e.contains("accuracy_mode")) c.eval.accuracy_mode = accuracy_mode_from_string(e.at("accuracy_mode").get<std::string>());
    c.eval.hit_threshold = e.value("hit_threshold", c.eval.hit_threshold);
    c.eval.workers = e.value("workers", c.eval.workers);
  }
  if (j.contains("planner")) {
    const auto& p = j.at("planner");
    c.planner.frames_per_clip = p.value("frames_per_clip", c.planner.frames_per_clip);
    c.planner.stride_s = p.value("stride_s", c.planner.stride_s);
    c.planner.clips_per_span = p.value("clips_per_span", c.planner.clips_per_span);
    c.planner.max_turns = p.value("max_turns", c.planner.max_turns);
    c.planner.validate();
  }
  if (j.contains("judge")) {
    const auto& jj = j.at("judge");
    detail::read_endpoint(jj, c.judge.endpoint);
    c.judge.prompt_file = jj.value("prompt_file", c.judge.prompt_file);
    c.judge.mock = jj.value("mock", c.judge.mock);
  }
  if (j.contains("model")) detail::read_endpoint(j.at("model"), c.model);
  if (j.contains("grpo")) {
    c.group_size = j.at("grpo").value("group_size", c.group_size);
    c.advantage_epsilon = j.at("grpo").value("epsilon", c.advantage_epsilon);
  }
  return c;
}

inline HarnessConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  HarnessConfig c = config_from_json(json::parse(in));
  // A relative prompt path is relative to the config file.
  if (!c.judge.prompt_file.empty() && std::filesystem::path(c.judge.prompt_file).is_relative()) {
    c.judge.prompt_file = (path.parent_path() / c.judge.prompt_file).lexically_normal().string();
  }
  return c;
}

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

/// COTR_JUDGE_URL, COTR_JUDGE_MODEL, COTR_JUDGE_API_KEY, COTR_JUDGE_PROMPT,
/// COTR_MODEL_URL, COTR_MODEL_NAME, COTR_MODEL_API_KEY.
inline void apply_env(HarnessConfig& c, const EnvLookup& env = process_env) {
  if (auto v = env("COTR_JUDGE_URL")) c.judge.endpoint.url = *v;
  if (auto v = env("COTR_JUDGE_MODEL")) c.judge.endpoint.model = *v;
  if (auto v = env("COTR_JUDGE_API_KEY")) c.judge.endpoint.api_key = *v;
  if (auto v = env("COTR_JUDGE_PROMPT")) c.judge.prompt_file = *v;
  if (auto v = env("COTR_MODEL_URL")) c.model.url = *v;
  if (auto v = env("COTR_MODEL_NAME")) c.model.model = *v;
  if (auto v = env("COTR_MODEL_API_KEY")) c.model.api_key = *v;
}

/// Snapshot recorded in reports.
inline json config_to_json(const HarnessConfig& c) {
  return json{{"reward", c.eval.reward},
              {"eval",
               {{"accuracy_mode", std::string(to_string(c.eval.accuracy_mode))},
                {"hit_threshold", c.eval.hit_threshold},
                {"workers", c.eval.workers}}},
              {"planner",
               {{"frames_per_clip", c.planner.frames_per_clip},
                {"stride_s", c.planner.stride_s},
                {"clips_per_span", c.planner.clips_per_span},
                {"max_turns", c.planner.max_turns}}},
              {"judge",
               [&] {
                 json j = detail::write_endpoint(c.judge.endpoint);
                 j["prompt_file"] = c.judge.prompt_file;
                 j["mock"] = c.judge.mock;
                 return j;
               }()},
              {"model", detail::write_endpoint(c.model)},
              {"grpo", {{"group_size", c.group_size}, {"epsilon", c.advantage_epsilon}}}};
}

}  // namespace cotr
