// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotr/core.hpp"
#include "cotr/schema.hpp"

namespace cotr {

/// Raised when an input file yields nothing usable.
struct FatalInputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LoadedDataset {
  std::vector<Sample> samples;
  std::vector<std::string> warnings;  // "line N: ..."
  std::vector<std::string> errors;    // rejected lines
};

/// JSON Lines, one Sample per line. Blank lines are ignored; invalid lines
/// are collected into `errors` and skipped.
inline LoadedDataset load_dataset(std::istream& in, const std::string& name = "<stream>") {
  LoadedDataset out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const std::string where = "line " + std::to_string(lineno);
    try {
      std::vector<std::string> w;
      Sample s = decode_sample(json::parse(line), &w);
      if (auto it = seen.find(s.sample_id); it != seen.end()) {
        throw std::invalid_argument("duplicate sample_id '" + s.sample_id + "' (first on line " +
                                    std::to_string(it->second) + ")");
      }
      seen.emplace(s.sample_id, lineno);
      for (auto& msg : w) out.warnings.push_back(where + ": " + msg);
      out.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      out.errors.push_back(where + ": " + e.what());
    }
  }
  if (out.samples.empty()) throw FatalInputError("no valid samples in " + name);
  return out;
}

inline LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FatalInputError("cannot read dataset " + path.string());
  return load_dataset(in, path.string());
}

struct Prediction {
  std::string sample_id;
  std::string raw_text;
};

struct LoadedPredictions {
  std::vector<Prediction> predictions;
  std::vector<std::string> errors;
};

/// JSON Lines of {"sample_id", "raw_text"}. An empty file is valid (no
/// predictions); a file with only invalid lines is fatal.
inline LoadedPredictions load_predictions(std::istream& in, const std::string& name = "<stream>") {
  LoadedPredictions out;
  std::string line;
  std::size_t lineno = 0, non_blank = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    ++non_blank;
    try {
      auto j = json::parse(line);
      out.predictions.push_back({j.at("sample_id").get<std::string>(), j.at("raw_text").get<std::string>()});
    } catch (const std::exception& e) {
      out.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (non_blank > 0 && out.predictions.empty()) throw FatalInputError("no valid predictions in " + name);
  return out;
}

inline LoadedPredictions load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FatalInputError("cannot read predictions " + path.string());
  return load_predictions(in, path.string());
}

// Video-length buckets in minutes: [lo, hi).
inline constexpr std::pair<double, const char*> kLengthBuckets[] = {
    {0.0, "<1min"}, {1.0, "1-5min"}, {5.0, "5-10min"}, {10.0, "10-30min"}, {30.0, "30-60min"}, {60.0, ">=60min"},
};

inline std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

struct DatasetStats {
  std::size_t n_samples = 0;
  std::vector<std::pair<std::string, std::size_t>> video_length_histogram;  // bucket order
  std::map<std::size_t, std::size_t> chain_length;                         // steps -> samples
  std::size_t chain_length_mode = 0;
  std::map<std::size_t, std::size_t> answer_word_length;                   // words -> samples
  std::map<std::size_t, std::size_t> chain_word_length;                    // words in all steps -> samples
  std::size_t point_anchors = 0;
  std::size_t span_anchors = 0;
  std::map<std::string, std::size_t> per_sport;
  std::map<std::string, std::size_t> per_task;
  double mean_duration_s = 0.0;
};

inline DatasetStats dataset_stats(const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("dataset_stats: no samples");
  DatasetStats st;
  st.n_samples = samples.size();
  for (const auto& [lo, label] : kLengthBuckets) st.video_length_histogram.emplace_back(label, 0);
  double total = 0.0;
  for (const auto& s : samples) {
    total += s.duration_s;
    const double minutes = s.duration_s / 60.0;
    std::size_t bucket = 0;
    for (std::size_t b = 0; b < std::size(kLengthBuckets); ++b)
      if (minutes >= kLengthBuckets[b].first) bucket = b;
    ++st.video_length_histogram[bucket].second;

    ++st.chain_length[s.reference_chain.steps.size()];
    ++st.answer_word_length[word_count(s.reference_answer)];
    std::size_t chain_words = 0;
    for (const auto& step : s.reference_chain.steps) {
      chain_words += word_count(step.text);
      for (const auto& a : step.anchors) (a.is_point() ? st.point_anchors : st.span_anchors) += 1;
    }
    ++st.chain_word_length[chain_words];
    ++st.per_sport[std::string(to_string(s.sport))];
    ++st.per_task[std::string(to_string(s.task_type))];
  }
  st.mean_duration_s = total / static_cast<double>(samples.size());
  std::size_t best = 0;
  for (const auto& [len, n] : st.chain_length) {
    if (n > best) {
      best = n;
      st.chain_length_mode = len;
    }
  }
  return st;
}

inline json stats_to_json(const DatasetStats& st) {
  auto keyed = [](const std::map<std::size_t, std::size_t>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
  };
  json hist = json::array();
  for (const auto& [label, n] : st.video_length_histogram) hist.push_back({{"bucket", label}, {"count", n}});
  return json{{"n_samples", st.n_samples},
              {"mean_duration_s", st.mean_duration_s},
              {"video_length_histogram", hist},
              {"chain_length", keyed(st.chain_length)},
              {"chain_length_mode", st.chain_length_mode},
              {"answer_word_length", keyed(st.answer_word_length)},
              {"chain_word_length", keyed(st.chain_word_length)},
              {"anchor_kinds", {{"point", st.point_anchors}, {"span", st.span_anchors}}},
              {"per_sport", st.per_sport},
              {"per_task", st.per_task}};
}

}  // namespace cotr
