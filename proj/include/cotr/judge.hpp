// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "cotr/chat_client.hpp"
#include "cotr/core.hpp"
#include "cotr/reward.hpp"

namespace cotr {

// Shipped as config/judge_prompt.txt; this copy is used when no prompt file
// is configured.
inline constexpr std::string_view kDefaultJudgePrompt =
    "You are grading an answer to a question about a sports video.\n"
    "\n"
    "Question: {question}\n"
    "Reference answer: {reference}\n"
    "Candidate answer: {prediction}\n"
    "\n"
    "The candidate is CORRECT if it states the same outcome, entities and facts as the reference answer; "
    "wording may differ. It is INCORRECT if it contradicts the reference, names a different player, team, "
    "time or event, or omits the key fact.\n"
    "\n"
    "Reply with exactly one word: CORRECT or INCORRECT.\n";

/// Substitutes {question}, {reference} and {prediction} in one left-to-right
/// pass; substituted text is never rescanned.
inline std::string fill_judge_prompt(std::string_view tmpl, const JudgeRequest& req) {
  const std::pair<std::string_view, const std::string*> keys[] = {
      {"{question}", &req.question}, {"{reference}", &req.reference_answer}, {"{prediction}", &req.predicted_answer}};
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool hit = false;
    for (const auto& [key, value] : keys) {
      if (tmpl.substr(i, key.size()) == key) {
        out += *value;
        i += key.size();
        hit = true;
        break;
      }
    }
    if (!hit) out.push_back(tmpl[i++]);
  }
  return out;
}

inline std::string load_prompt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read judge prompt " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads a single CORRECT/INCORRECT token (case-insensitive, surrounding
/// punctuation ignored). Anything else is unparseable.
inline std::optional<bool> parse_verdict(std::string_view text) {
  std::string word;
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text[i]))));
    ++i;
  }
  for (; i < text.size(); ++i)
    if (std::isalnum(static_cast<unsigned char>(text[i]))) return std::nullopt;
  if (word == "CORRECT") return true;
  if (word == "INCORRECT") return false;
  return std::nullopt;
}

/// Offline judge applying the exact-normalized rule.
class MockJudge : public JudgeAdapter {
 public:
  explicit MockJudge(std::string id = "mock") : id_(std::move(id)) {}
  std::string id() const override { return id_; }
  JudgeVerdict judge(const JudgeRequest& r) override {
    const bool ok = accuracy_reward(r.predicted_answer, r.reference_answer, AccuracyMode::ExactNormalized) == 1.0;
    return {r.sample_id, id_, ok};
  }

 private:
  std::string id_;
};

/// LLM judge over an HTTP chat-completions endpoint. An unparseable verdict
/// counts as a failed attempt; after the last attempt TransportError is
/// raised and no verdict is produced.
class HttpJudge : public JudgeAdapter {
 public:
  HttpJudge(ChatEndpoint endpoint, std::string prompt_template = std::string(kDefaultJudgePrompt),
            std::string id = {})
      : client_(std::move(endpoint)), prompt_(std::move(prompt_template)) {
    id_ = id.empty() ? client_.endpoint().model : std::move(id);
    if (id_.empty()) id_ = "http-judge";
  }

  std::string id() const override { return id_; }

  JudgeVerdict judge(const JudgeRequest& r) override {
    const std::string content = client_.complete(
        {{"user", fill_judge_prompt(prompt_, r)}}, [](const std::string& c) { return parse_verdict(c).has_value(); });
    return {r.sample_id, id_, *parse_verdict(content)};
  }

 private:
  ChatClient client_;
  std::string prompt_;
  std::string id_;
};

}  // namespace cotr
