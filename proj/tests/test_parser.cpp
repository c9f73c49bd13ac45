// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cotr/model_adapters.hpp"
#include "cotr/parser.hpp"

using cotr::TimeAnchor;

namespace {

std::vector<nlohmann::json> load_corpus() {
  std::ifstream in(std::string(COTR_FIXTURES_DIR) + "/parser_corpus.jsonl");
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

TimeAnchor expected_anchor(const nlohmann::json& pair) {
  const double s = pair.at(0).get<double>(), e = pair.at(1).get<double>();
  return s == e ? TimeAnchor::point(s) : TimeAnchor::span(s, e);
}

}  // namespace

TEST(ParseOutput, ThreeStepsWithPointAndSpan) {
  auto p = cotr::parse_output(
      "<thinking>Step 1: At 02:15 the striker receives the pass. Step 2: From 02:18-02:21 he dribbles past two "
      "defenders.</thinking><answer>Goal by #9</answer>",
      600);
  ASSERT_EQ(p.chain.steps.size(), 2u);
  EXPECT_EQ(p.chain.steps[0].anchors, std::vector<TimeAnchor>{TimeAnchor::point(135)});
  EXPECT_EQ(p.chain.steps[1].anchors, std::vector<TimeAnchor>{TimeAnchor::span(138, 141)});
  EXPECT_EQ(p.chain.answer, "Goal by #9");
  EXPECT_TRUE(p.format_ok);
}

TEST(ParseOutput, NoTags) {
  auto p = cotr::parse_output("no tags at all", 600);
  EXPECT_FALSE(p.format_ok);
  EXPECT_TRUE(p.chain.answer.empty());
  for (const auto& s : p.chain.steps) EXPECT_TRUE(s.anchors.empty());
}

TEST(ParseOutput, MixedAnchorsInOneStep) {
  auto p = cotr::parse_output(
      "<thinking>At 01:05 and again at [01:40-01:55] the team presses.</thinking><answer>High press</answer>", 600);
  ASSERT_EQ(p.chain.steps.size(), 1u);
  EXPECT_EQ(p.chain.steps[0].anchors, (std::vector<TimeAnchor>{TimeAnchor::point(65), TimeAnchor::span(100, 115)}));
}

TEST(SegmentSteps, Rules) {
  EXPECT_EQ(cotr::segment_steps("Step 1: A. Step 2: B."), (std::vector<std::string>{"Step 1: A.", "Step 2: B."}));
  EXPECT_EQ(cotr::segment_steps("line one\nline two"), (std::vector<std::string>{"line one", "line two"}));
  EXPECT_EQ(cotr::segment_steps("At 02:15 he shoots. It goes in."),
            (std::vector<std::string>{"At 02:15 he shoots.", "It goes in."}));
  EXPECT_EQ(cotr::segment_steps("The ratio was 2.5 at 01:10. Next."),
            (std::vector<std::string>{"The ratio was 2.5 at 01:10.", "Next."}));
  EXPECT_TRUE(cotr::segment_steps("   \n  ").empty());
}

TEST(ExtractAnchors, Examples) {
  EXPECT_EQ(cotr::extract_anchors("From 02:18-02:21 he dribbles", 600),
            std::vector<TimeAnchor>{TimeAnchor::span(138, 141)});
  EXPECT_EQ(cotr::extract_anchors("At 1:02:03 the replay shows", 4000),
            std::vector<TimeAnchor>{TimeAnchor::point(3723)});
  EXPECT_EQ(cotr::extract_anchors("between 00:10 to 00:30 and at 00:45", 600),
            (std::vector<TimeAnchor>{TimeAnchor::span(10, 30), TimeAnchor::point(45)}));
}

TEST(ParserCorpus, EveryFixtureParsesToItsExpectedChain) {
  const auto corpus = load_corpus();
  ASSERT_GE(corpus.size(), 60u);
  for (const auto& c : corpus) {
    SCOPED_TRACE(c.at("name").get<std::string>());
    const auto p = cotr::parse_output(c.at("raw").get<std::string>(), c.at("duration_s").get<double>());
    const auto& e = c.at("expected");
    EXPECT_EQ(p.format_ok, e.at("format_ok").get<bool>());
    EXPECT_EQ(p.chain.answer, e.at("answer").get<std::string>());
    const auto& steps = e.at("steps");
    ASSERT_EQ(p.chain.steps.size(), steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      EXPECT_EQ(p.chain.steps[i].text, steps[i].at("text").get<std::string>());
      std::vector<TimeAnchor> want;
      for (const auto& a : steps[i].at("anchors")) want.push_back(expected_anchor(a));
      EXPECT_EQ(p.chain.steps[i].anchors, want) << "step " << i;
    }
  }
}

namespace {

std::string fuzz_string(std::mt19937_64& rng) {
  static const std::vector<std::string> atoms = {
      "<thinking>", "</thinking>", "<answer>", "</answer>", "<THINKING>", "Step ", "step", "1", "2", "9", "0", ":",
      "::", ".", "!", "?", " ", "\n", "\t", "-", "~", "\xE2\x80\x93", "\xE2\x80\x94", " to ", "[", "]", "00:",
      "59", "60", "99:99", "1:00:00", "12:34", "a", "xyz", "\xC3", "\xA9", "\x00", "\xFF", "<", ">", "/", "0.5"};
  std::uniform_int_distribution<int> len(0, 60);
  std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  std::bernoulli_distribution raw_byte(0.1);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (raw_byte(rng)) {
      s.push_back(static_cast<char>(byte(rng)));
    } else {
      s += atoms[pick(rng)];
    }
  }
  return s;
}

}  // namespace

TEST(ParserProperties, FuzzNeverThrowsAndKeepsInvariants) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> dur(1.0, 5000.0);
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = fuzz_string(rng);
    const double d = dur(rng);
    cotr::ParsedOutput p;
    ASSERT_NO_THROW(p = cotr::parse_output(raw, d)) << raw;
    EXPECT_EQ(p.raw, raw);
    if (p.format_ok) {
      EXPECT_FALSE(p.chain.answer.empty());
    }
    for (const auto& step : p.chain.steps) {
      EXPECT_FALSE(cotr::is_blank(step.text));
      for (const auto& a : step.anchors) {
        ASSERT_GE(a.start_s, 0.0);
        ASSERT_LE(a.end_s, d);
        ASSERT_LE(a.start_s, a.end_s);
      }
    }
  }
}

TEST(ParserProperties, SpanEndpointsAreNeverReEmittedAsPoints) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> t(0, 3599);
  const char* seps[] = {"-", " - ", "~", " to ", "\xE2\x80\x93", " \xE2\x80\x94 "};
  for (int i = 0; i < 2000; ++i) {
    const int a = t(rng), b = t(rng);
    if (a == b) continue;
    const std::string text = "at " + cotr::format_timestamp(a) + seps[i % 6] + cotr::format_timestamp(b) + " play";
    const auto anchors = cotr::extract_anchors(text, 3600);
    ASSERT_EQ(anchors.size(), 1u) << text;
    EXPECT_EQ(anchors[0], TimeAnchor::span(std::min(a, b), std::max(a, b))) << text;
  }
}

TEST(ParserProperties, CanonicalRenderingRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> t(0, 5999);
  std::uniform_int_distribution<int> nsteps(1, 6);
  for (int i = 0; i < 500; ++i) {
    cotr::ChainOfTime chain;
    const int n = nsteps(rng);
    for (int k = 0; k < n; ++k) {
      const int a = t(rng), b = t(rng);
      TimeAnchor anchor = (k % 2 == 0 || a == b) ? TimeAnchor::point(a) : TimeAnchor::span(std::min(a, b), std::max(a, b));
      chain.steps.push_back({"the play develops on the wing", {anchor}});
    }
    chain.answer = "answer " + std::to_string(i);
    const auto p = cotr::parse_output(cotr::render_chain(chain), 6000);
    ASSERT_TRUE(p.format_ok);
    ASSERT_EQ(p.chain.steps.size(), chain.steps.size());
    for (std::size_t k = 0; k < chain.steps.size(); ++k) EXPECT_EQ(p.chain.steps[k].anchors, chain.steps[k].anchors);
    EXPECT_EQ(p.chain.answer, chain.answer);
  }
}
