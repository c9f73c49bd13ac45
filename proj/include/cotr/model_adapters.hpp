// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cotr/chat_client.hpp"
#include "cotr/grpo.hpp"
#include "cotr/parser.hpp"
#include "cotr/planner.hpp"
#include "cotr/timestamp.hpp"

namespace cotr {

inline std::string render_anchor(const TimeAnchor& a) {
  if (a.is_point()) return format_timestamp(a.start_s);
  return "[" + format_timestamp(a.start_s) + "-" + format_timestamp(a.end_s) + "]";
}

/// Renders a chain in the canonical tagged output format; parse_output
/// reads it back to the same steps and anchors (up to whole-second
/// rounding).
inline std::string render_chain(const ChainOfTime& chain) {
  std::string out = "<thinking>";
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const auto& s = chain.steps[i];
    out += "Step " + std::to_string(i + 1) + ": ";
    for (const auto& a : s.anchors) out += render_anchor(a) + " ";
    out += s.text;
    if (i + 1 < chain.steps.size()) out += "\n";
  }
  out += "</thinking><answer>" + chain.answer + "</answer>";
  return out;
}

inline constexpr std::string_view kChainSystemPrompt =
    "Answer the question about the video by reasoning step by step. Put your reasoning inside "
    "<thinking></thinking> with one step per line written as 'Step k: ...', and cite the supporting moment of "
    "every step as mm:ss or as a span mm:ss-mm:ss. Put the final answer inside <answer></answer>.";

inline constexpr std::string_view kVerifySystemPrompt =
    "You are checking one reasoning step against frames retrieved around its cited time. Rewrite the step inside "
    "<thinking></thinking>, correcting the statement and its mm:ss anchor if the frames disagree. If the evidence "
    "already settles the question, also give the final answer inside <answer></answer>.";

inline constexpr std::string_view kAnswerSystemPrompt =
    "Given the verified reasoning steps, give the final answer to the question inside <answer></answer>.";

/// Model behind a chat-completions endpoint. Video and frame references are
/// passed as text; the serving side resolves them.
class ChatModelAdapter : public ModelAdapter, public ObservationModel {
 public:
  explicit ChatModelAdapter(ChatEndpoint endpoint) : client_(std::move(endpoint)) {}

  std::string generate(const std::string& video_ref, const std::string& question, std::uint64_t seed) override {
    return client_.complete({{"system", std::string(kChainSystemPrompt)},
                             {"user", "Video: " + video_ref + "\nQuestion: " + question}},
                            nullptr, {{"seed", seed}});
  }

  std::string generate_chain(const std::string& video_ref, const std::string& question) override {
    return generate(video_ref, question, 0);
  }

  StepRevision verify_step(const std::string& question, const ReasoningStep& step,
                           std::span<const std::string> frame_refs) override {
    std::string user = "Question: " + question + "\nStep: " + step.text + "\nAnchors:";
    for (const auto& a : step.anchors) user += " " + render_anchor(a);
    user += "\nFrames:";
    for (const auto& f : frame_refs) user += "\n" + f;
    const std::string reply = client_.complete({{"system", std::string(kVerifySystemPrompt)}, {"user", user}});

    // Duration is unknown here; the loop normalizes against the sample.
    constexpr double kUnbounded = 1e12;
    ParsedOutput parsed = parse_output(reply, kUnbounded);
    StepRevision rev;
    for (const auto& s : parsed.chain.steps) {
      if (!rev.text.empty()) rev.text += " ";
      rev.text += s.text;
      for (const auto& a : s.anchors)
        rev.anchors.emplace_back(a.start_s, a.is_span() ? std::optional<double>(a.end_s) : std::nullopt);
    }
    if (!parsed.chain.answer.empty() && detail::find_ci(reply, "<answer>") != std::string::npos) {
      rev.early_answer = parsed.chain.answer;
    }
    return rev;
  }

  std::string final_answer(const std::string& question, const ChainOfTime& refined) override {
    const std::string reply = client_.complete(
        {{"system", std::string(kAnswerSystemPrompt)}, {"user", "Question: " + question + "\n" + render_chain(refined)}});
    ParsedOutput parsed = parse_output(reply, 1e12);
    return parsed.chain.answer.empty() ? std::string(detail::trim(reply)) : parsed.chain.answer;
  }

 private:
  ChatClient client_;
};

/// Offline observation model: replays a recorded raw output as the initial
/// chain, accepts every step unchanged and keeps the recorded answer.
class ReplayModel : public ObservationModel {
 public:
  explicit ReplayModel(std::map<std::string, std::string> raw_by_video_and_question)
      : raw_(std::move(raw_by_video_and_question)) {}

  static std::string key(const std::string& video_ref, const std::string& question) {
    return video_ref + '\x1f' + question;
  }

  std::string generate_chain(const std::string& video_ref, const std::string& question) override {
    auto it = raw_.find(key(video_ref, question));
    if (it == raw_.end()) throw TransportError("no recorded output for video " + video_ref);
    last_answer_ = parse_output(it->second, 1e12).chain.answer;
    return it->second;
  }

  StepRevision verify_step(const std::string&, const ReasoningStep& step, std::span<const std::string>) override {
    StepRevision rev{step.text, {}, std::nullopt};
    for (const auto& a : step.anchors)
      rev.anchors.emplace_back(a.start_s, a.is_span() ? std::optional<double>(a.end_s) : std::nullopt);
    return rev;
  }

  std::string final_answer(const std::string&, const ChainOfTime&) override { return last_answer_; }

 private:
  std::map<std::string, std::string> raw_;
  std::string last_answer_;
};

}  // namespace cotr
