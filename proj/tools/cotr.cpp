// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

// cotr: batch front-end. Exit codes: 0 success, 1 fatal input error,
// 2 partial result (some samples unscored or failed).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cotr/cotr.hpp"

namespace fs = std::filesystem;
using cotr::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct CommonOptions {
  std::string config_path;
};

cotr::HarnessConfig resolve_config(const CommonOptions& common) {
  cotr::HarnessConfig cfg;
  if (!common.config_path.empty()) cfg = cotr::load_config_file(common.config_path);
  cotr::apply_env(cfg);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cotr::FatalInputError("cannot write " + path);
  out << text;
}

void print_load_diagnostics(const cotr::LoadedDataset& ds) {
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : ds.errors) std::cerr << "skipped: " << e << "\n";
}

std::vector<cotr::JudgeVerdict> load_verdicts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cotr::FatalInputError("cannot read verdicts " + path);
  std::vector<cotr::JudgeVerdict> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (cotr::is_blank(line)) continue;
    try {
      out.push_back(json::parse(line).get<cotr::JudgeVerdict>());
    } catch (const std::exception& e) {
      throw cotr::FatalInputError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::optional<cotr::Rgb> parse_rgb(const std::string& s) {
  if (s.empty()) return std::nullopt;
  int r = 0, g = 0, b = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d,%d,%d%c", &r, &g, &b, &tail) != 3 || r < 0 || g < 0 || b < 0 || r > 255 ||
      g > 255 || b > 255) {
    throw std::invalid_argument("colour must be R,G,B with components in 0..255: " + s);
  }
  return cotr::Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

// Judge selection shared by `eval` and `reward`.
struct JudgeOptions {
  bool mock = false;
  std::string url, model, prompt_file;
};

std::unique_ptr<cotr::JudgeAdapter> make_judge(cotr::HarnessConfig& cfg, const JudgeOptions& opt) {
  if (!opt.url.empty()) cfg.judge.endpoint.url = opt.url;
  if (!opt.model.empty()) cfg.judge.endpoint.model = opt.model;
  if (!opt.prompt_file.empty()) cfg.judge.prompt_file = opt.prompt_file;
  if (opt.mock) cfg.judge.mock = true;
  if (cfg.eval.accuracy_mode != cotr::AccuracyMode::ExternalJudge) return nullptr;
  if (cfg.judge.mock) return std::make_unique<cotr::MockJudge>();
  if (cfg.judge.endpoint.url.empty()) {
    throw cotr::FatalInputError(
        "accuracy mode 'judge' needs a judge: pass --mock-judge, --judge-url or set COTR_JUDGE_URL");
  }
  std::string prompt(cotr::kDefaultJudgePrompt);
  if (!cfg.judge.prompt_file.empty()) prompt = cotr::load_prompt_file(cfg.judge.prompt_file);
  return std::make_unique<cotr::HttpJudge>(cfg.judge.endpoint, prompt);
}

void add_judge_options(CLI::App* cmd, JudgeOptions& opt) {
  cmd->add_flag("--mock-judge", opt.mock, "Offline judge using the exact-normalized rule");
  cmd->add_option("--judge-url", opt.url, "Chat-completions URL of the judge (overrides COTR_JUDGE_URL)");
  cmd->add_option("--judge-model", opt.model, "Judge model name (overrides COTR_JUDGE_MODEL)");
  cmd->add_option("--judge-prompt", opt.prompt_file, "Judge prompt template file");
}

// eval ----------------------------------------------------------------------

struct EvalOptions {
  std::string dataset, predictions, out_json, out_md, verdicts, human, reference_judge = "human";
  std::string accuracy_mode;
  std::optional<int> workers;
  std::optional<double> hit_threshold;
  JudgeOptions judge;
};

int run_eval(const CommonOptions& common, const EvalOptions& opt) {
  auto cfg = resolve_config(common);
  if (!opt.accuracy_mode.empty()) cfg.eval.accuracy_mode = cotr::accuracy_mode_from_string(opt.accuracy_mode);
  if (opt.workers) cfg.eval.workers = *opt.workers;
  if (opt.hit_threshold) cfg.eval.hit_threshold = *opt.hit_threshold;
  auto judge = make_judge(cfg, opt.judge);

  const auto ds = cotr::load_dataset(fs::path(opt.dataset));
  print_load_diagnostics(ds);
  const auto preds = cotr::load_predictions(fs::path(opt.predictions));
  for (const auto& e : preds.errors) std::cerr << "skipped prediction: " << e << "\n";

  cotr::RunReport report = cotr::evaluate_run(ds.samples, preds.predictions, cfg.eval, judge.get());
  report.config = cotr::config_to_json(cfg);
  if (!opt.verdicts.empty()) report.agreement = cotr::compute_agreement(load_verdicts(opt.verdicts), opt.reference_judge);
  if (!opt.human.empty()) {
    std::ifstream in(opt.human);
    if (!in) throw cotr::FatalInputError("cannot read " + opt.human);
    report.human_assessment = json::parse(in);
  }

  write_text(opt.out_json, cotr::emit_report(report, cotr::ReportFormat::Json));
  if (!opt.out_md.empty()) write_text(opt.out_md, cotr::emit_report(report, cotr::ReportFormat::Markdown));

  for (const auto& id : report.unmatched_predictions) std::cerr << "unmatched prediction: " << id << "\n";
  for (const auto& r : report.records)
    if (!r.judge_error.empty()) std::cerr << "unscored " << r.sample_id << ": " << r.judge_error << "\n";
  const bool partial = report.unscored() > 0 || !report.missing_predictions.empty();
  if (partial) {
    std::cerr << report.unscored() << " sample(s) unscored, " << report.missing_predictions.size()
              << " without a prediction\n";
  }
  return partial ? kExitPartial : kExitOk;
}

// reward --------------------------------------------------------------------

struct RewardOptions {
  std::string dataset, predictions, out;
  std::string accuracy_mode;
  JudgeOptions judge;
};

int run_reward(const CommonOptions& common, const RewardOptions& opt) {
  auto cfg = resolve_config(common);
  cfg.eval.accuracy_mode = cotr::accuracy_mode_from_string(opt.accuracy_mode.empty() ? "exact" : opt.accuracy_mode);
  auto judge = make_judge(cfg, opt.judge);
  cfg.eval.reward.validate();

  const auto ds = cotr::load_dataset(fs::path(opt.dataset));
  print_load_diagnostics(ds);
  std::map<std::string, const cotr::Sample*> by_id;
  for (const auto& s : ds.samples) by_id[s.sample_id] = &s;
  const auto preds = cotr::load_predictions(fs::path(opt.predictions));

  std::ostringstream out;
  int failures = 0;
  for (const auto& p : preds.predictions) {
    auto it = by_id.find(p.sample_id);
    if (it == by_id.end()) {
      std::cerr << "unmatched prediction: " << p.sample_id << "\n";
      ++failures;
      continue;
    }
    const auto parsed = cotr::parse_output(p.raw_text, it->second->duration_s);
    json line{{"sample_id", p.sample_id}};
    try {
      line["reward"] = cotr::total_reward(parsed, *it->second, cfg.eval.reward, cfg.eval.accuracy_mode, judge.get());
    } catch (const cotr::TransportError& e) {
      line["reward"] = nullptr;
      line["error"] = e.what();
      ++failures;
    }
    out << line.dump() << "\n";
  }
  write_text(opt.out, out.str());
  return failures > 0 ? kExitPartial : kExitOk;
}

// group-adv -----------------------------------------------------------------

int run_group_adv(const CommonOptions& common, const std::string& in_path, const std::string& out_path,
                  std::optional<double> epsilon) {
  const auto cfg = resolve_config(common);
  const double eps = epsilon.value_or(cfg.advantage_epsilon);
  std::ifstream in(in_path);
  if (!in) throw cotr::FatalInputError("cannot read " + in_path);
  std::ostringstream out;
  std::string line;
  std::size_t lineno = 0, groups = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (cotr::is_blank(line)) continue;
    try {
      const auto j = json::parse(line);
      const auto rewards = j.at("rewards").get<std::vector<double>>();
      json o{{"sample_id", j.value("sample_id", std::string{})}, {"advantages", cotr::group_advantages(rewards, eps)}};
      out << o.dump() << "\n";
      ++groups;
    } catch (const std::exception& e) {
      throw cotr::FatalInputError(in_path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (groups == 0) throw cotr::FatalInputError("no reward groups in " + in_path);
  write_text(out_path, out.str());
  return kExitOk;
}

// stats ---------------------------------------------------------------------

int run_stats(const std::string& dataset, const std::string& out_path) {
  const auto ds = cotr::load_dataset(fs::path(dataset));
  print_load_diagnostics(ds);
  write_text(out_path, cotr::stats_to_json(cotr::dataset_stats(ds.samples)).dump(2) + "\n");
  return kExitOk;
}

// overlay -------------------------------------------------------------------

struct OverlayOptions {
  std::string frames_dir, out_dir, foreground, background;
  double fps = 0.0;
  std::optional<int> scale;
  int margin = 4;
};

int run_overlay(const OverlayOptions& opt) {
  if (!(opt.fps > 0.0)) throw cotr::FatalInputError("--fps must be positive");
  if (!fs::is_directory(opt.frames_dir)) throw cotr::FatalInputError("not a directory: " + opt.frames_dir);
  cotr::OverlayConfig cfg;
  cfg.scale = opt.scale;
  cfg.margin_px = opt.margin;
  if (auto fg = parse_rgb(opt.foreground)) cfg.foreground = *fg;
  cfg.background_box = parse_rgb(opt.background);

  std::map<long long, fs::path> frames;
  for (const auto& e : fs::directory_iterator(opt.frames_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".ppm") continue;
    const std::string stem = e.path().stem().string();
    std::size_t b = stem.size();
    while (b > 0 && std::isdigit(static_cast<unsigned char>(stem[b - 1]))) --b;
    if (b == stem.size()) continue;
    const long long index = std::stoll(stem.substr(b));
    if (!frames.emplace(index, e.path()).second) {
      throw cotr::FatalInputError("two frames share index " + std::to_string(index));
    }
  }
  if (frames.empty()) throw cotr::FatalInputError("no numbered .ppm frames in " + opt.frames_dir);

  fs::create_directories(opt.out_dir);
  std::ostringstream manifest;
  for (const auto& [index, path] : frames) {
    const double t = static_cast<double>(index) / opt.fps;
    cotr::write_ppm_file(fs::path(opt.out_dir) / path.filename(),
                         cotr::render_timestamp(cotr::read_ppm_file(path), t, cfg));
    manifest << json{{"frame_index", index}, {"label", cotr::format_timestamp(t)}}.dump() << "\n";
  }
  write_text((fs::path(opt.out_dir) / "manifest.jsonl").string(), manifest.str());
  std::cerr << "wrote " << frames.size() << " frame(s) to " << opt.out_dir << "\n";
  return kExitOk;
}

// plan ----------------------------------------------------------------------

json plan_to_json(const cotr::SamplingPlan& p) {
  return json{{"anchor", p.anchor}, {"clips", p.clips}, {"frame_count", p.frame_count()}};
}

int run_plan(const CommonOptions& common, double start, std::optional<double> end, double duration) {
  const auto cfg = resolve_config(common);
  const auto anchor = cotr::normalize_anchor(start, end, duration);
  std::cout << plan_to_json(cotr::plan_for_anchor(anchor, cfg.planner, duration)).dump(2) << "\n";
  return kExitOk;
}

// atio ----------------------------------------------------------------------

struct AtioOptions {
  std::string dataset, replay, frames_dir, out;
  double fps = 1.0;
  std::string model_url, model_name;
};

json trace_to_json(const cotr::ObservationTrace& t) {
  json turns = json::array();
  for (const auto& r : t.turns) {
    json plans = json::array();
    for (const auto& p : r.plans) plans.push_back(plan_to_json(p));
    turns.push_back({{"turn", r.turn},
                     {"step_index", r.step_index},
                     {"frames_requested", r.frames_requested},
                     {"plans", plans},
                     {"before", r.before},
                     {"after", r.after},
                     {"revised", r.revised},
                     {"early_answer", r.early_answer}});
  }
  return json{{"initial_chain", t.initial_chain},
              {"turns", turns},
              {"frames_requested", t.frames_requested()},
              {"adapter_calls", t.adapter_calls}};
}

int run_atio(const CommonOptions& common, const AtioOptions& opt) {
  auto cfg = resolve_config(common);
  if (!opt.model_url.empty()) cfg.model.url = opt.model_url;
  if (!opt.model_name.empty()) cfg.model.model = opt.model_name;

  const auto ds = cotr::load_dataset(fs::path(opt.dataset));
  print_load_diagnostics(ds);

  std::unique_ptr<cotr::ObservationModel> model;
  if (!opt.replay.empty()) {
    std::map<std::string, const cotr::Sample*> by_id;
    for (const auto& s : ds.samples) by_id[s.sample_id] = &s;
    std::map<std::string, std::string> recorded;
    for (const auto& p : cotr::load_predictions(fs::path(opt.replay)).predictions) {
      if (auto it = by_id.find(p.sample_id); it != by_id.end())
        recorded[cotr::ReplayModel::key(it->second->video_id, it->second->question)] = p.raw_text;
    }
    model = std::make_unique<cotr::ReplayModel>(std::move(recorded));
  } else if (!cfg.model.url.empty()) {
    model = std::make_unique<cotr::ChatModelAdapter>(cfg.model);
  } else {
    throw cotr::FatalInputError("atio needs --replay or a model endpoint (--model-url / COTR_MODEL_URL)");
  }

  std::unique_ptr<cotr::FrameRetriever> retriever;
  if (!opt.frames_dir.empty()) {
    retriever = std::make_unique<cotr::DirectoryFrameRetriever>(opt.frames_dir, opt.fps);
  } else {
    retriever = std::make_unique<cotr::SyntheticFrameRetriever>();
  }

  std::ostringstream out;
  int failures = 0;
  for (const auto& s : ds.samples) {
    json line{{"sample_id", s.sample_id}};
    try {
      auto result = cotr::observe_infer(s, *model, *retriever, cfg.planner);
      line["refined_chain"] = result.refined;
      line["trace"] = trace_to_json(result.trace);
    } catch (const cotr::ObservationError& e) {
      line["error"] = e.what();
      line["trace"] = trace_to_json(e.trace);
      ++failures;
    }
    out << line.dump() << "\n";
  }
  write_text(opt.out, out.str());
  return failures > 0 ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cotr: anchored reasoning-chain rewards, grounding metrics and evaluation harness"};
  app.set_version_flag("--version", std::string(cotr::kVersion));
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions and emit the evaluation report");
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset JSON Lines")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions", eval.predictions, "Predictions JSON Lines {sample_id, raw_text}")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out_json, "JSON report path (default stdout)");
  eval_cmd->add_option("--markdown", eval.out_md, "Markdown report path");
  eval_cmd->add_option("--accuracy-mode", eval.accuracy_mode, "exact | containment | judge");
  eval_cmd->add_option("--workers", eval.workers, "Scoring threads");
  eval_cmd->add_option("--hit-threshold", eval.hit_threshold, "Hit@tau threshold");
  eval_cmd->add_option("--verdicts", eval.verdicts, "JSON Lines {sample_id, judge_id, correct} for agreement")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--reference-judge", eval.reference_judge, "Judge id used as the Cohen's kappa reference");
  eval_cmd->add_option("--human", eval.human, "JSON with human assessment scores, copied into the report")
      ->check(CLI::ExistingFile);
  add_judge_options(eval_cmd, eval.judge);

  RewardOptions reward;
  auto* reward_cmd = app.add_subcommand("reward", "Per-prediction reward breakdowns as JSON Lines");
  reward_cmd->add_option("--dataset", reward.dataset)->required()->check(CLI::ExistingFile);
  reward_cmd->add_option("--predictions", reward.predictions)->required()->check(CLI::ExistingFile);
  reward_cmd->add_option("--out", reward.out, "Output path (default stdout)");
  reward_cmd->add_option("--accuracy-mode", reward.accuracy_mode, "exact (default) | containment | judge");
  add_judge_options(reward_cmd, reward.judge);

  std::string adv_in, adv_out;
  std::optional<double> adv_eps;
  auto* adv_cmd = app.add_subcommand("group-adv", "Group-relative advantages from reward groups");
  adv_cmd->add_option("--in", adv_in, "JSON Lines {sample_id, rewards: [...]}")->required()->check(CLI::ExistingFile);
  adv_cmd->add_option("--out", adv_out, "Output path (default stdout)");
  adv_cmd->add_option("--epsilon", adv_eps, "Denominator epsilon");

  std::string stats_dataset, stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--dataset", stats_dataset)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", stats_out, "Output path (default stdout)");

  OverlayOptions overlay;
  auto* overlay_cmd = app.add_subcommand("overlay", "Burn mm:ss labels into numbered PPM frames");
  overlay_cmd->add_option("--frames-dir", overlay.frames_dir)->required();
  overlay_cmd->add_option("--fps", overlay.fps)->required();
  overlay_cmd->add_option("--out", overlay.out_dir, "Output directory")->required();
  overlay_cmd->add_option("--scale", overlay.scale, "Glyph pixel multiplier (default: about 5% of frame height)");
  overlay_cmd->add_option("--margin", overlay.margin, "Margin in pixels");
  overlay_cmd->add_option("--fg", overlay.foreground, "Foreground R,G,B");
  overlay_cmd->add_option("--bg", overlay.background, "Background box R,G,B (default: none)");

  double plan_start = 0.0, plan_duration = 0.0;
  std::optional<double> plan_end;
  auto* plan_cmd = app.add_subcommand("plan", "Frame-sampling plan for one anchor");
  plan_cmd->add_option("--start", plan_start)->required();
  plan_cmd->add_option("--end", plan_end, "Span end (omit for a point anchor)");
  plan_cmd->add_option("--duration", plan_duration)->required();

  AtioOptions atio;
  auto* atio_cmd = app.add_subcommand("atio", "Run the anchor-observe-infer loop over a dataset");
  atio_cmd->add_option("--dataset", atio.dataset)->required()->check(CLI::ExistingFile);
  atio_cmd->add_option("--replay", atio.replay, "Recorded outputs {sample_id, raw_text} used as the model")
      ->check(CLI::ExistingFile);
  atio_cmd->add_option("--model-url", atio.model_url, "Chat-completions URL of the policy model");
  atio_cmd->add_option("--model-name", atio.model_name);
  atio_cmd->add_option("--frames-dir", atio.frames_dir, "Directory of numbered frames (default: synthetic refs)");
  atio_cmd->add_option("--fps", atio.fps, "Frame rate of --frames-dir");
  atio_cmd->add_option("--out", atio.out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval_cmd) return run_eval(common, eval);
    if (*reward_cmd) return run_reward(common, reward);
    if (*adv_cmd) return run_group_adv(common, adv_in, adv_out, adv_eps);
    if (*stats_cmd) return run_stats(stats_dataset, stats_out);
    if (*overlay_cmd) return run_overlay(overlay);
    if (*plan_cmd) return run_plan(common, plan_start, plan_end, plan_duration);
    if (*atio_cmd) return run_atio(common, atio);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
