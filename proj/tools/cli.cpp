/// @file cli.cpp
/// @brief `sage` subcommands: gen-scenarios, run, judge, metrics, leaderboard, report.

#include "cli.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sage/analytics.hpp"
#include "sage/error.hpp"
#include "sage/judges.hpp"
#include "sage/orchestrator.hpp"
#include "sage/scenario_factory.hpp"
#include "sage/serialization.hpp"

namespace sage::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A command finished but some of its units failed.
struct Partial {
  std::size_t failed;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
  }
  fs::rename(tmp, path);
}

template <class T>
void write_jsonl(const fs::path& path, const std::vector<T>& items) {
  std::string text;
  for (const auto& item : items) text += to_json_line(item) + "\n";
  write_text(path, text);
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("{} not found: {}", what, path.string()));
}

template <class T>
std::vector<T> load_jsonl(const fs::path& path, const char* what) {
  require_file(path, what);
  std::size_t skipped = 0;
  auto items = read_jsonl<T>(path, &skipped);
  if (skipped) spdlog::warn("{}: skipped {} unreadable line(s)", path.string(), skipped);
  return items;
}

std::set<int> parse_item_list(const std::string& text) {
  std::set<int> out;
  if (text == "none" || text.empty()) return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.insert(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError("bad item number '" + part + "'");
    }
  }
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::jthread> pool;
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), std::max<std::size_t>(n, 1));
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
}

// ---------------------------------------------------------------------------
// gen-scenarios

struct GenArgs {
  std::string config;
  std::string plan;
  std::string pools;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
};

int cmd_gen_scenarios(const GenArgs& a) {
  require_file(a.config, "generator config");
  const auto cfg = read_json_file(a.config);
  const auto base = fs::absolute(a.config).parent_path();
  if (!cfg.contains("generator")) throw ConfigError("generator config needs a 'generator' endpoint");
  const auto& gen = cfg["generator"];

  scenario::BuildOptions options;
  options.generation.model_id = gen.value("model_id", std::string("generator"));
  options.generation.temperature = cfg.value("temperature", 0.7);
  options.generation.format_retries = cfg.value("format_retries", 1);
  options.parallelism = a.parallelism.value_or(cfg.value("parallelism", 1));
  if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  const auto seed = a.seed.value_or(cfg.value("seed", std::uint64_t{0}));

  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  const auto pools = !a.pools.empty()             ? scenario::SeedPools::load(a.pools)
                     : cfg.contains("pools")      ? scenario::SeedPools::load(resolve(cfg["pools"]))
                                                  : scenario::SeedPools::builtin();
  const auto plan = !a.plan.empty()          ? scenario::load_plan(a.plan)
                    : cfg.contains("plan")   ? scenario::load_plan(resolve(cfg["plan"]))
                                             : scenario::default_plan();
  options.out_dir = !a.out.empty() ? fs::path(a.out) : resolve(cfg.value("out", std::string("scenarios_out")));

  auto provider = gateway::make_provider(gen.at("backend"), base);
  const auto set = scenario::build_benchmark(pools, plan, seed, *provider, options);
  spdlog::info("generated {} scenarios into {}", set.scenarios.size(), (options.out_dir / "scenarios").string());
  if (!set.failures.empty()) throw Partial{set.failures.size()};
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string config;
  bool resume = false;
  std::optional<int> parallelism;
  std::optional<std::uint64_t> seed;
  std::string judge_model;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  require_file(a.config, "run config");
  auto config = orchestrator::load_run_config(a.config);
  if (a.parallelism) {
    if (*a.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    config.parallelism = *a.parallelism;
    config.source["parallelism"] = *a.parallelism;
  }
  if (a.seed) {
    config.seed = *a.seed;
    config.source["seed"] = *a.seed;
  }
  if (!a.judge_model.empty()) {
    config.judge_model.model_id = a.judge_model;
    config.source["judge_model"]["model_id"] = a.judge_model;
  }
  if (!a.out.empty()) {
    config.output_dir = a.out;
    config.source["output_dir"] = a.out;
  }
  const auto summary = orchestrator::run_benchmark(config, a.resume);
  const auto aborted_path = config.output_dir / orchestrator::kAbortedFile;
  std::size_t aborted_total = 0;
  if (fs::exists(aborted_path)) aborted_total = read_jsonl<AbortedDialogue>(aborted_path).size();
  spdlog::info("run finished: {} executed this call, {} skipped, {} aborted overall", summary.executed,
               summary.skipped, aborted_total);
  if (aborted_total > 0) throw Partial{aborted_total};
  return kExitOk;
}

// ---------------------------------------------------------------------------
// judge

struct JudgeArgs {
  std::string kind;
  std::string config;
  std::string records;
  std::string annotations;
  std::string profiles;
  std::string out;
  std::string judge_model;
  std::optional<int> parallelism;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  std::string blri_reverse;
  std::string utterance_reverse;
};

struct JudgeSetup {
  judges::JudgeOptions options;
  std::shared_ptr<gateway::BackendProvider> provider;
  int parallelism = 1;
  std::uint64_t seed = 0;
  int cases_per_bucket = 5;
};

JudgeSetup judge_setup(const JudgeArgs& a) {
  require_file(a.config, "judge config");
  const auto cfg = read_json_file(a.config);
  const auto base = fs::absolute(a.config).parent_path();
  if (!cfg.contains("judge_model")) throw ConfigError("judge config needs a 'judge_model' endpoint");
  JudgeSetup s;
  const auto& jm = cfg["judge_model"];
  s.options.judge_model_id = a.judge_model.empty() ? jm.value("model_id", std::string("judge")) : a.judge_model;
  s.options.repeats = a.repeats.value_or(cfg.value("repeats", 3));
  s.options.format_retries = cfg.value("format_retries", 1);
  s.options.temperature = cfg.value("temperature", 0.0);
  if (cfg.contains("reverse_items")) {
    const auto& r = cfg["reverse_items"];
    if (r.contains("blri")) s.options.reverse.blri = r["blri"].get<std::set<int>>();
    if (r.contains("utterance")) s.options.reverse.utterance = r["utterance"].get<std::set<int>>();
  }
  if (!a.blri_reverse.empty()) s.options.reverse.blri = parse_item_list(a.blri_reverse);
  if (!a.utterance_reverse.empty()) s.options.reverse.utterance = parse_item_list(a.utterance_reverse);
  const auto context = cfg.value("annotation_context", std::string("last_exchange"));
  if (context == "full_history") {
    s.options.annotation_context = judges::AnnotationContext::FullHistory;
  } else if (context != "last_exchange") {
    throw ConfigError("annotation_context must be last_exchange or full_history");
  }
  s.parallelism = a.parallelism.value_or(cfg.value("parallelism", 1));
  s.seed = a.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  s.cases_per_bucket = cfg.value("cases_per_bucket", 5);
  if (s.options.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (s.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  s.provider = gateway::make_provider(jm.at("backend"), base);
  return s;
}

template <class Result, class Fn>
int judge_records(const std::vector<DialogueRecord>& records, const JudgeSetup& s, const fs::path& out, Fn fn) {
  std::vector<std::optional<Result>> results(records.size());
  std::mutex log_mutex;
  std::size_t failed = 0;
  parallel_for(records.size(), s.parallelism, [&](std::size_t i) {
    const auto& r = records[i];
    try {
      auto backend = s.provider->for_cell(r.scenario_id, r.target_model_id);
      results[i] = fn(r, *backend);
    } catch (const Error& e) {
      std::lock_guard lock(log_mutex);
      ++failed;
      spdlog::error("judging ({}, {}) failed: {}", r.scenario_id, r.target_model_id, e.what());
    }
  });
  std::vector<Result> ok;
  for (auto& r : results) {
    if (r) ok.push_back(std::move(*r));
  }
  write_jsonl(out, ok);
  spdlog::info("wrote {} result(s) to {}", ok.size(), out.string());
  if (failed) throw Partial{failed};
  return kExitOk;
}

int cmd_judge(const JudgeArgs& a) {
  const fs::path out_dir = a.out.empty() ? fs::path("judged") : fs::path(a.out);
  if (a.kind == "blri" || a.kind == "utterance" || a.kind == "strategy") {
    const auto records = load_jsonl<DialogueRecord>(a.records, "records file");
    const auto s = judge_setup(a);
    if (a.kind == "blri") {
      return judge_records<judges::BlriScores>(records, s, out_dir / "blri.jsonl",
                                               [&](const DialogueRecord& r, gateway::ChatBackend& b) {
                                                 return judges::judge_blri(r, b, s.options);
                                               });
    }
    if (a.kind == "utterance") {
      return judge_records<judges::UtteranceScores>(records, s, out_dir / "utterance.jsonl",
                                                    [&](const DialogueRecord& r, gateway::ChatBackend& b) {
                                                      return judges::judge_utterance(r, b, s.options);
                                                    });
    }
    return judge_records<StrategyAnnotation>(records, s, out_dir / "strategies.jsonl",
                                             [&](const DialogueRecord& r, gateway::ChatBackend& b) {
                                               return judges::annotate_strategies(r, b, s.options);
                                             });
  }
  if (a.kind == "profile") {
    const auto records = load_jsonl<DialogueRecord>(a.records, "records file");
    const auto s = judge_setup(a);
    std::set<std::string> models;
    for (const auto& r : records) models.insert(r.target_model_id);
    json profiles = json::object();
    std::size_t failed = 0;
    for (const auto& model : models) {
      try {
        const auto selection = judges::select_profile_cases(records, model, s.seed, s.cases_per_bucket);
        for (const auto& note : selection.notes) spdlog::warn("{}: {}", model, note);
        auto backend = s.provider->for_cell("profile", model);
        profiles[model] = judges::profile_model(model, selection, *backend, s.options);
      } catch (const Error& e) {
        ++failed;
        spdlog::error("profiling {} failed: {}", model, e.what());
      }
    }
    write_text(out_dir / "profiles.json", profiles.dump(2) + "\n");
    if (failed) throw Partial{failed};
    return kExitOk;
  }
  if (a.kind == "coordinate") {
    require_file(a.profiles, "profiles file");
    const auto annotations = load_jsonl<StrategyAnnotation>(a.annotations, "annotations file");
    const auto s = judge_setup(a);
    const auto pj = read_json_file(a.profiles);
    std::map<std::string, std::string> profiles;
    std::map<std::string, judges::StrategyDistribution> distributions;
    for (const auto& [model, p] : pj.items()) {
      profiles[model] = p.get<judges::ModelProfile>().summary;
      distributions[model] = analytics::strategy_distribution(annotations, model);
    }
    auto backend = s.provider->for_cell("coordinates", "all");
    const auto coords = judges::place_coordinates(profiles, distributions, *backend, s.options);
    json out = json::object();
    std::string csv = "model_id,x,y,passes\n";
    for (const auto& [model, p] : coords.points) {
      out[model] = {{"x", p.x}, {"y", p.y}, {"passes", coords.passes_used.at(model)}};
      csv += fmt::format("{},{},{},{}\n", model, p.x, p.y, coords.passes_used.at(model));
    }
    write_text(out_dir / "coordinates.json", out.dump(2) + "\n");
    write_text(out_dir / "coordinates.csv", csv);
    return kExitOk;
  }
  throw ConfigError("unknown judge kind '" + a.kind + "'");
}

// ---------------------------------------------------------------------------
// metrics / leaderboard / report

struct MetricsArgs {
  std::string records;
  std::string aborted;
  std::string annotations;
  std::string blri;
  std::string utterance;
  std::string out;
  std::string format = "markdown";
  bool both_reverse_settings = false;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <class F>
json try_metric(F&& f) {
  try {
    return json(f());
  } catch (const Error& e) {
    return json(nullptr);
  }
}

/// Emotion vs. a per-dialogue judge score, correlated per model and per dialogue.
json correlation_block(const std::vector<DialogueRecord>& records,
                       const std::map<std::pair<std::string, std::string>, double>& scores) {
  std::vector<double> emo;
  std::vector<double> judged;
  std::map<std::string, std::pair<double, int>> emo_by_model;
  std::map<std::string, std::pair<double, int>> judged_by_model;
  for (const auto& r : records) {
    auto it = scores.find({r.scenario_id, r.target_model_id});
    if (it == scores.end()) continue;
    emo.push_back(r.final_emotion);
    judged.push_back(it->second);
    auto& e = emo_by_model[r.target_model_id];
    e.first += r.final_emotion;
    ++e.second;
    auto& j = judged_by_model[r.target_model_id];
    j.first += it->second;
    ++j.second;
  }
  std::vector<double> em;
  std::vector<double> jm;
  for (const auto& [model, e] : emo_by_model) {
    em.push_back(e.first / e.second);
    jm.push_back(judged_by_model[model].first / judged_by_model[model].second);
  }
  return {{"per_model", try_metric([&] { return analytics::pearson(em, jm); })},
          {"per_dialogue", try_metric([&] { return analytics::pearson(emo, judged); })},
          {"dialogues", emo.size()},
          {"models", em.size()}};
}

prompt::BlriLabels labels_from(const std::string& s) {
  if (s.size() != prompt::kBlriItems) throw ConfigError("stored BLRI pass has wrong length");
  prompt::BlriLabels out{};
  std::copy(s.begin(), s.end(), out.begin());
  return out;
}

prompt::UtteranceRatings ratings_from(const std::vector<int>& v) {
  if (v.size() != prompt::kUtteranceItems) throw ConfigError("stored utterance pass has wrong length");
  prompt::UtteranceRatings out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

json compute_metrics(const MetricsArgs& a, const std::vector<DialogueRecord>& records,
                     const std::vector<AbortedDialogue>& aborted) {
  json m;
  const auto rows = analytics::leaderboard(records, aborted);
  json lb = json::array();
  for (const auto& r : rows) {
    lb.push_back({{"rank", r.rank},
                  {"model_id", r.model_id},
                  {"score", r.mean_final_emotion},
                  {"success", r.success_count},
                  {"failure", r.failure_count},
                  {"max_turns", r.maxturns_count},
                  {"aborted", r.aborted_count},
                  {"mean_tokens", r.mean_tokens},
                  {"dialogues", r.dialogues}});
  }
  m["leaderboard"] = lb;
  json te = json::array();
  for (const auto& t : analytics::token_efficiency(records)) {
    te.push_back({{"model_id", t.model_id}, {"mean_tokens", t.mean_tokens}, {"score", t.score}});
  }
  m["token_efficiency"] = te;

  if (!a.annotations.empty()) {
    const auto annotations = load_jsonl<StrategyAnnotation>(a.annotations, "annotations file");
    json ssrr = json::object();
    json se = json::object();
    json dist = json::object();
    for (const auto& r : rows) {
      ssrr[r.model_id] = try_metric([&] { return analytics::ssrr(analytics::sequences_of(annotations, r.model_id)); });
      std::vector<DialogueRecord> own;
      for (const auto& rec : records) {
        if (rec.target_model_id == r.model_id) own.push_back(rec);
      }
      json caps = json::object();
      for (const auto& cap : analytics::capability_map()) {
        const std::set<StrategyCode> codes(cap.strategies.begin(), cap.strategies.end());
        caps[cap.name] = {
            {"overall", optional_json(analytics::strategy_effectiveness(own, annotations, codes,
                                                                        analytics::SeScope::overall()))},
            {"task_specific", optional_json(analytics::strategy_effectiveness(
                                  own, annotations, codes, analytics::SeScope::task_specific(cap.topic)))},
            {"topic", cap.topic}};
      }
      se[r.model_id] = caps;
      json d = json::object();
      for (const auto& [code, share] : analytics::strategy_distribution(annotations, r.model_id)) d[code.str()] = share;
      dist[r.model_id] = d;
    }
    m["ssrr"] = ssrr;
    m["strategy_effectiveness"] = se;
    m["strategy_distribution"] = dist;
  }

  json corr = json::object();
  if (!a.blri.empty()) {
    const auto blri = load_jsonl<judges::BlriScores>(a.blri, "BLRI file");
    auto block = [&](const std::set<int>& reverse) {
      std::map<std::pair<std::string, std::string>, double> scores;
      for (const auto& b : blri) {
        std::vector<prompt::BlriLabels> passes;
        for (const auto& p : b.passes) passes.push_back(labels_from(p));
        scores[{b.scenario_id, b.target_model_id}] =
            passes.empty() ? b.overall() : judges::aggregate_blri(passes, reverse).overall();
      }
      return correlation_block(records, scores);
    };
    const judges::ReverseItems defaults;
    corr["emotion_vs_blri"] = block(defaults.blri);
    if (a.both_reverse_settings) corr["emotion_vs_blri_no_reverse"] = block({});
  }
  if (!a.utterance.empty()) {
    const auto utt = load_jsonl<judges::UtteranceScores>(a.utterance, "utterance file");
    auto block = [&](const std::set<int>& reverse) {
      std::map<std::pair<std::string, std::string>, double> scores;
      for (const auto& u : utt) {
        std::vector<prompt::UtteranceRatings> passes;
        for (const auto& p : u.passes) passes.push_back(ratings_from(p));
        scores[{u.scenario_id, u.target_model_id}] =
            passes.empty() ? u.overall() : judges::aggregate_utterance(passes, reverse).overall();
      }
      return correlation_block(records, scores);
    };
    const judges::ReverseItems defaults;
    corr["emotion_vs_utterance"] = block(defaults.utterance);
    if (a.both_reverse_settings) corr["emotion_vs_utterance_no_reverse"] = block({});
  }
  if (!corr.empty()) m["correlations"] = corr;
  return m;
}

std::vector<AbortedDialogue> load_aborted(const std::string& path) {
  if (path.empty()) return {};
  return load_jsonl<AbortedDialogue>(path, "aborted file");
}

int cmd_metrics(const MetricsArgs& a) {
  const auto records = load_jsonl<DialogueRecord>(a.records, "records file");
  const auto metrics = compute_metrics(a, records, load_aborted(a.aborted));
  const fs::path out = a.out.empty() ? fs::path("metrics.json") : fs::path(a.out);
  write_text(out, metrics.dump(2) + "\n");
  spdlog::info("wrote {}", out.string());
  return kExitOk;
}

int cmd_leaderboard(const MetricsArgs& a) {
  const auto records = load_jsonl<DialogueRecord>(a.records, "records file");
  const auto rows = analytics::leaderboard(records, load_aborted(a.aborted));
  std::string text;
  if (a.format == "markdown" || a.format == "md") {
    text = analytics::leaderboard_markdown(rows);
  } else if (a.format == "csv") {
    text = analytics::leaderboard_csv(rows);
  } else {
    throw ConfigError("unknown format '" + a.format + "' (markdown or csv)");
  }
  if (a.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text(a.out, text);
  }
  return kExitOk;
}

int cmd_report(const MetricsArgs& a) {
  const auto records = load_jsonl<DialogueRecord>(a.records, "records file");
  const auto aborted = load_aborted(a.aborted);
  const fs::path dir = a.out.empty() ? fs::path("report") : fs::path(a.out);
  const auto rows = analytics::leaderboard(records, aborted);
  const auto metrics = compute_metrics(a, records, aborted);
  write_text(dir / "leaderboard.md", analytics::leaderboard_markdown(rows));
  write_text(dir / "leaderboard.csv", analytics::leaderboard_csv(rows));
  write_text(dir / "token_efficiency.csv", analytics::token_efficiency_csv(analytics::token_efficiency(records)));
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");

  std::string md = "# Sentient leaderboard\n\n" + analytics::leaderboard_markdown(rows);
  if (metrics.contains("ssrr")) {
    md += "\n## Strategy sequence repetition rate\n\n| Model | SSRR |\n|---|---:|\n";
    for (const auto& [model, v] : metrics["ssrr"].items()) {
      md += fmt::format("| {} | {} |\n", model, v.is_null() ? "n/a" : fmt::format("{:.3f}", v.get<double>()));
    }
  }
  if (metrics.contains("correlations")) {
    md += "\n## Correlations with final emotion\n\n| Measure | Per model | Per dialogue |\n|---|---:|---:|\n";
    for (const auto& [name, v] : metrics["correlations"].items()) {
      auto show = [](const json& x) { return x.is_null() ? std::string("n/a") : fmt::format("{:.3f}", x.get<double>()); };
      md += fmt::format("| {} | {} | {} |\n", name, show(v["per_model"]), show(v["per_dialogue"]));
    }
  }
  write_text(dir / "report.md", md);
  spdlog::info("report written to {}", dir.string());
  return kExitOk;
}

void configure_logging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("sage");
    spdlog::set_default_logger(logger);
  });
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw ConfigError("unknown log level '" + level + "'");
  spdlog::set_level(lvl);
}

}  // namespace

int dispatch(const std::vector<std::string>& argv) {
  CLI::App app{"sage: sentient-agent evaluation of supportive dialogue", "sage"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-scenarios", "Generate personas and scenes into a scenario directory");
  gen_cmd->add_option("--config", gen.config, "Generator config (generator endpoint, optional plan/pools)")->required();
  gen_cmd->add_option("--plan", gen.plan, "Topic plan JSON (default: the built-in 100-scenario plan)");
  gen_cmd->add_option("--pools", gen.pools, "Seed pools JSON (default: built-in pools)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--parallelism", gen.parallelism, "Concurrent scenario generations");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run every scenario against every target model");
  run_cmd->add_option("--config", run.config, "Run config JSON")->required();
  run_cmd->add_flag("--resume", run.resume, "Skip cells already present in the output directory");
  run_cmd->add_option("--parallelism", run.parallelism, "Concurrent dialogues");
  run_cmd->add_option("--seed", run.seed, "Recorded run seed");
  run_cmd->add_option("--judge-model", run.judge_model, "Override the judge model id");
  run_cmd->add_option("--out", run.out, "Override the output directory");

  JudgeArgs judge;
  auto* judge_cmd = app.add_subcommand("judge", "Post-hoc judging of finished dialogues");
  judge_cmd->add_option("kind", judge.kind, "blri | utterance | strategy | profile | coordinate")
      ->required()
      ->check(CLI::IsMember({"blri", "utterance", "strategy", "profile", "coordinate"}));
  judge_cmd->add_option("--config", judge.config, "Judge config JSON")->required();
  judge_cmd->add_option("--records", judge.records, "records.jsonl");
  judge_cmd->add_option("--annotations", judge.annotations, "strategies.jsonl (coordinate)");
  judge_cmd->add_option("--profiles", judge.profiles, "profiles.json (coordinate)");
  judge_cmd->add_option("--out", judge.out, "Output directory");
  judge_cmd->add_option("--judge-model", judge.judge_model, "Override the judge model id");
  judge_cmd->add_option("--parallelism", judge.parallelism, "Concurrent records");
  judge_cmd->add_option("--repeats", judge.repeats, "Judge passes per record");
  judge_cmd->add_option("--seed", judge.seed, "Case-selection seed (profile)");
  judge_cmd->add_option("--blri-reverse", judge.blri_reverse, "Reverse-scored BLRI items, e.g. 12 or none");
  judge_cmd->add_option("--utterance-reverse", judge.utterance_reverse, "Reverse-scored utterance items, e.g. 4,6");

  MetricsArgs metrics;
  auto add_metric_inputs = [&](CLI::App* cmd, MetricsArgs& m) {
    cmd->add_option("--records", m.records, "records.jsonl")->required();
    cmd->add_option("--aborted", m.aborted, "aborted.jsonl");
    cmd->add_option("--annotations", m.annotations, "strategies.jsonl");
    cmd->add_option("--blri", m.blri, "blri.jsonl");
    cmd->add_option("--utterance", m.utterance, "utterance.jsonl");
    cmd->add_flag("--both-reverse-settings", m.both_reverse_settings,
                  "Also report correlations with no reverse-scored items");
  };
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute metrics JSON");
  add_metric_inputs(metrics_cmd, metrics);
  metrics_cmd->add_option("--out", metrics.out, "Output JSON file");

  MetricsArgs board;
  auto* board_cmd = app.add_subcommand("leaderboard", "Print the leaderboard");
  board_cmd->add_option("--records", board.records, "records.jsonl")->required();
  board_cmd->add_option("--aborted", board.aborted, "aborted.jsonl");
  board_cmd->add_option("--format", board.format, "markdown | csv");
  board_cmd->add_option("--out", board.out, "Output file (default: stdout)");

  MetricsArgs report;
  auto* report_cmd = app.add_subcommand("report", "Write markdown and CSV reports");
  add_metric_inputs(report_cmd, report);
  report_cmd->add_option("--out", report.out, "Output directory");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());  // CLI11 expects reversed vectors
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    configure_logging(log_level);
    if (*gen_cmd) return cmd_gen_scenarios(gen);
    if (*run_cmd) return cmd_run(run);
    if (*judge_cmd) return cmd_judge(judge);
    if (*metrics_cmd) return cmd_metrics(metrics);
    if (*board_cmd) return cmd_leaderboard(board);
    if (*report_cmd) return cmd_report(report);
  } catch (const Partial& p) {
    spdlog::warn("{} unit(s) failed; see the log above", p.failed);
    return kExitPartial;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const TemplateError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const PoolTooSmall& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitPartial;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sage::cli
