/// @file orchestrator.cpp

#include "sage/orchestrator.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sage/error.hpp"
#include "sage/scenario_factory.hpp"
#include "sage/sentient_agent.hpp"
#include "sage/serialization.hpp"

namespace sage::orchestrator {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

ModelEndpoint endpoint_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object");
  ModelEndpoint e;
  e.model_id = j.value("model_id", std::string{});
  if (e.model_id.empty()) throw ConfigError(std::string(what) + " needs a model_id");
  if (!j.contains("backend")) throw ConfigError(std::string(what) + " '" + e.model_id + "' needs a backend");
  e.backend = j["backend"];
  return e;
}

/// Drops credential-looking fields from a config snapshot.
nlohmann::json scrub_secrets(nlohmann::json j) {
  static const std::set<std::string> secret_keys = {
      "api_key", "apikey", "key", "token", "access_token", "secret", "password", "authorization"};
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      std::string lower = it.key();
      for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (secret_keys.contains(lower)) {
        it = j.erase(it);
      } else {
        *it = scrub_secrets(*it);
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) v = scrub_secrets(v);
  }
  return j;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  try {
    c.base_dir = base_dir;
    c.source = scrub_secrets(j);
    c.scenario_set = resolve(base_dir, j.at("scenario_set").get<std::string>());
    c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    for (const auto& t : j.at("target_models")) c.target_models.push_back(endpoint_from_json(t, "target model"));
    c.judge_model = endpoint_from_json(j.at("judge_model"), "judge model");
    c.max_turns = j.value("max_turns", kDefaultMaxTurns);
    c.initial_emotion = j.value("initial_emotion", kDefaultInitialEmotion);
    c.parallelism = j.value("parallelism", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    c.format_retries = j.value("format_retries", 1);
    c.target_temperature = j.value("target_temperature", 0.0);
    c.judge_temperature = j.value("judge_temperature", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  if (c.target_models.empty()) throw ConfigError("run config lists no target models");
  std::set<std::string> ids;
  for (const auto& t : c.target_models) {
    if (!ids.insert(t.model_id).second) throw ConfigError("duplicate target model '" + t.model_id + "'");
  }
  if (c.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (c.max_turns < 1) throw ConfigError("max_turns must be >= 1");
  if (c.initial_emotion < 0 || c.initial_emotion > 100) throw ConfigError("initial_emotion must be in [0, 100]");
  if (c.format_retries < 0) throw ConfigError("format_retries must be >= 0");
  if (c.target_temperature < 0 || c.judge_temperature < 0) throw ConfigError("temperatures must be >= 0");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  return run_config_from_json(j, std::filesystem::absolute(path).parent_path());
}

DialogueResult run_dialogue(const Scenario& scenario, const std::string& target_model_id,
                            gateway::ChatBackend& target,
                            std::shared_ptr<gateway::ChatBackend> judge,
                            const std::string& judge_model_id, const DialogueLimits& limits) {
  AgentSpec spec{scenario.persona, scenario.scene, judge_model_id, limits.initial_emotion};
  agent::AgentConfig agent_config;
  agent_config.max_turns = limits.max_turns;
  agent_config.format_retries = limits.format_retries;
  agent_config.temperature = limits.judge_temperature;
  agent_config.templates = limits.templates;

  const auto& store = limits.templates ? *limits.templates : prompt::TemplateStore::builtin();
  const std::string system_prompt = store.render(prompt::TemplateId::TargetSystem, {});

  std::optional<agent::AgentSession> session;
  try {
    session.emplace(spec, std::move(judge), agent_config);
    session->open();
    while (!session->terminated()) {
      gateway::ChatRequest request{target_model_id, system_prompt, session->target_messages(),
                                   limits.target_temperature, limits.max_output_tokens};
      const auto response = gateway::complete(target, request);
      session->step(response.content, response.usage);
    }
  } catch (const Error& e) {
    const int done = session ? session->turn_count() : 0;
    spdlog::warn("dialogue ({}, {}) aborted after {} turns: {}", scenario.id, target_model_id, done, e.what());
    return AbortedDialogue{scenario.id, target_model_id, judge_model_id, e.what(), done};
  }
  return session->to_record(scenario.id, target_model_id);
}

namespace {

using CellKey = std::pair<std::string, std::string>;  // (scenario_id, model_id)

/// Appends JSON lines, repairing a truncated final line left by a crash.
class LineWriter {
 public:
  explicit LineWriter(const std::filesystem::path& path) {
    bool needs_newline = false;
    if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
      std::ifstream in(path, std::ios::binary);
      in.seekg(-1, std::ios::end);
      char last = '\n';
      in.get(last);
      needs_newline = last != '\n';
    }
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw ConfigError("cannot open " + path.string() + " for appending");
    if (needs_newline) out_ << '\n';
  }
  void write(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw Error("write failed");
  }

 private:
  std::ofstream out_;
};

struct CellState {
  enum Kind { Complete, Aborted } kind;
  Outcome outcome = Outcome::MaxTurns;
};

nlohmann::json build_manifest(const RunConfig& config, const std::vector<CellKey>& cells,
                              const std::map<CellKey, CellState>& done) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& t : config.target_models) {
    counts[t.model_id] = {{"success", 0}, {"failure", 0}, {"max_turns", 0}, {"aborted", 0}};
  }
  nlohmann::json cell_list = nlohmann::json::array();
  std::size_t finished = 0;
  for (const auto& key : cells) {
    std::string status = "pending";
    if (auto it = done.find(key); it != done.end()) {
      ++finished;
      auto& c = counts[key.second];
      if (it->second.kind == CellState::Aborted) {
        status = "aborted";
        c["aborted"] = c["aborted"].get<int>() + 1;
      } else {
        status = "complete";
        const char* field = it->second.outcome == Outcome::Success   ? "success"
                            : it->second.outcome == Outcome::Failure ? "failure"
                                                                     : "max_turns";
        c[field] = c[field].get<int>() + 1;
      }
    }
    cell_list.push_back({{"scenario_id", key.first}, {"target_model_id", key.second}, {"status", status}});
  }
  return {{"judge_model_id", config.judge_model.model_id},
          {"seed", config.seed},
          {"cells_total", cells.size()},
          {"cells_finished", finished},
          {"complete", finished == cells.size()},
          {"counts", counts},
          {"cells", cell_list}};
}

}  // namespace

RunSummary run_benchmark(const RunConfig& config, bool resume, RunControl* control) {
  const auto scenarios = scenario::load_scenario_set(config.scenario_set);

  std::vector<std::shared_ptr<gateway::BackendProvider>> target_providers;
  for (const auto& t : config.target_models) {
    target_providers.push_back(gateway::make_provider(t.backend, config.base_dir));
  }
  auto judge_provider = gateway::make_provider(config.judge_model.backend, config.base_dir);

  std::filesystem::create_directories(config.output_dir);
  const auto records_path = config.output_dir / kRecordsFile;
  const auto aborted_path = config.output_dir / kAbortedFile;
  const auto manifest_path = config.output_dir / kManifestFile;

  if (!resume && std::filesystem::exists(records_path) && std::filesystem::file_size(records_path) > 0) {
    throw ConfigError(records_path.string() + " already exists; pass --resume or choose another output directory");
  }

  std::map<CellKey, CellState> done;
  if (resume) {
    std::size_t bad = 0;
    if (std::filesystem::exists(records_path)) {
      for (const auto& r : read_jsonl<DialogueRecord>(records_path, &bad)) {
        done[{r.scenario_id, r.target_model_id}] = {CellState::Complete, r.outcome};
      }
    }
    if (std::filesystem::exists(aborted_path)) {
      std::size_t bad_aborted = 0;
      for (const auto& a : read_jsonl<AbortedDialogue>(aborted_path, &bad_aborted)) {
        done.try_emplace({a.scenario_id, a.target_model_id}, CellState{CellState::Aborted});
      }
      bad += bad_aborted;
    }
    if (bad) spdlog::warn("ignored {} unreadable line(s) from an earlier run", bad);
  }
  write_json_atomic(config.output_dir / kConfigSnapshotFile, config.source);

  std::vector<CellKey> cells;
  struct Pending {
    const Scenario* scenario;
    std::size_t model;
  };
  std::vector<Pending> pending;
  RunSummary summary;
  for (const auto& s : scenarios) {
    for (std::size_t m = 0; m < config.target_models.size(); ++m) {
      CellKey key{s.id, config.target_models[m].model_id};
      cells.push_back(key);
      if (done.contains(key)) {
        ++summary.skipped;
      } else {
        pending.push_back({&s, m});
      }
    }
  }
  summary.cells_total = cells.size();
  spdlog::info("run: {} cells, {} already done, {} to execute", cells.size(), summary.skipped, pending.size());

  LineWriter records_out(records_path);
  LineWriter aborted_out(aborted_path);
  std::mutex write_mutex;
  write_json_atomic(manifest_path, build_manifest(config, cells, done));

  DialogueLimits limits;
  limits.max_turns = config.max_turns;
  limits.initial_emotion = config.initial_emotion;
  limits.format_retries = config.format_retries;
  limits.target_temperature = config.target_temperature;
  limits.judge_temperature = config.judge_temperature;

  std::stop_token stop = control ? control->stop.get_token() : std::stop_token{};
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      if (stop.stop_requested()) return;
      {
        std::lock_guard lock(write_mutex);
        if (fatal) return;
      }
      const std::size_t i = next++;
      if (i >= pending.size()) return;
      const auto& cell = pending[i];
      const auto& model = config.target_models[cell.model];
      try {
        auto target = target_providers[cell.model]->for_cell(cell.scenario->id, model.model_id);
        auto judge = judge_provider->for_cell(cell.scenario->id, model.model_id);
        auto result = run_dialogue(*cell.scenario, model.model_id, *target, std::move(judge),
                                   config.judge_model.model_id, limits);

        std::lock_guard lock(write_mutex);
        CellResult cr{cell.scenario->id, model.model_id, false, 0};
        CellKey key{cell.scenario->id, model.model_id};
        if (auto* record = std::get_if<DialogueRecord>(&result)) {
          records_out.write(to_json_line(*record));
          done[key] = {CellState::Complete, record->outcome};
          cr.final_emotion = record->final_emotion;
          ++summary.records;
        } else {
          aborted_out.write(to_json_line(std::get<AbortedDialogue>(result)));
          done[key] = {CellState::Aborted};
          cr.aborted = true;
          ++summary.aborted;
        }
        ++summary.executed;
        write_json_atomic(manifest_path, build_manifest(config, cells, done));
        if (control && control->on_result) control->on_result(cr);
      } catch (...) {
        std::lock_guard lock(write_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism),
                                         std::max<std::size_t>(pending.size(), 1));
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (fatal) std::rethrow_exception(fatal);

  summary.interrupted = !summary.complete();
  write_json_atomic(manifest_path, build_manifest(config, cells, done));
  spdlog::info("run: executed {} ({} records, {} aborted){}", summary.executed, summary.records,
               summary.aborted, summary.interrupted ? ", interrupted" : "");
  return summary;
}

}  // namespace sage::orchestrator
