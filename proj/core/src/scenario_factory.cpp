/// @file scenario_factory.cpp

#include "sage/scenario_factory.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sage/assets.hpp"
#include "sage/error.hpp"
#include "sage/prompt_kit.hpp"
#include "sage/serialization.hpp"

namespace sage::scenario {

SeedPools SeedPools::builtin() {
  static const SeedPools pools =
      from_json(nlohmann::json::parse(assets::get("pools/default_pools.json")));
  return pools;
}

SeedPools SeedPools::from_json(const nlohmann::json& j) {
  SeedPools p;
  try {
    p.keywords = j.at("keywords").get<std::vector<std::string>>();
    p.sentences = j.at("sentences").get<std::vector<std::string>>();
    p.ages = j.at("ages").get<std::vector<int>>();
    p.themes = j.value("themes", std::vector<std::string>{});
    for (const auto& h : j.value("hidden_intentions", nlohmann::json::array())) {
      if (!h.contains("category")) {
        throw ConfigError("hidden intention '" + h.value("id", std::string{}) + "' has no category");
      }
      p.hidden_intentions.push_back({h.at("id").get<std::string>(),
                                     category_from_string(h.at("category").get<std::string>()),
                                     h.at("text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad seed pools: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("bad seed pools: ") + e.what());
  }
  return p;
}

SeedPools SeedPools::load(const std::filesystem::path& path) {
  auto pools = from_json(read_json_file(path));
  pools.validate();
  return pools;
}

void SeedPools::validate() const {
  if (keywords.size() < 3) throw PoolTooSmall(fmt::format("keyword pool has {} entries, need 3", keywords.size()));
  if (sentences.size() < 3) throw PoolTooSmall(fmt::format("sentence pool has {} entries, need 3", sentences.size()));
  if (ages.empty()) throw PoolTooSmall("age pool is empty");
  std::set<std::string> ids;
  for (const auto& h : hidden_intentions) {
    if (h.id.empty() || h.text.empty()) throw ConfigError("hidden intention needs id and text");
    if (!ids.insert(h.id).second) throw ConfigError("duplicate hidden intention '" + h.id + "'");
  }
}

const HiddenIntention& SeedPools::intention(const std::string& id) const {
  for (const auto& h : hidden_intentions) {
    if (h.id == id) return h;
  }
  throw ConfigError("no hidden intention with id '" + id + "'");
}

Rng scenario_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

namespace {

/// k distinct indices out of n by a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

PersonaSeed sample_persona_seed(const SeedPools& pools, Rng& rng) {
  pools.validate();
  PersonaSeed seed;
  const auto k = sample_indices(pools.keywords.size(), 3, rng);
  const auto s = sample_indices(pools.sentences.size(), 3, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    seed.keywords[i] = pools.keywords[k[i]];
    seed.sentences[i] = pools.sentences[s[i]];
  }
  seed.age = pools.ages[sample_indices(pools.ages.size(), 1, rng)[0]];
  return seed;
}

Plan default_plan() { return plan_from_json(nlohmann::ordered_json::parse(assets::get("plans/default_plan.json"))); }

Plan plan_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ConfigError("plan must be an object of topic: count");
  Plan plan;
  for (const auto& [topic, count] : j.items()) {
    if (!count.is_number_integer() || count.get<int>() <= 0) {
      throw ConfigError("plan count for '" + topic + "' must be a positive integer");
    }
    plan.emplace_back(topic, count.get<int>());
  }
  if (plan.empty()) throw ConfigError("plan is empty");
  return plan;
}

Plan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan " + path.string());
  try {
    const auto j = nlohmann::ordered_json::parse(in);
    return plan_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad plan " + path.string() + ": " + e.what());
  }
}

std::string characteristics_text(const PersonaSeed& seed) {
  return fmt::format("{}, {}, and {}", seed.keywords[0], seed.keywords[1], seed.keywords[2]);
}

Persona generate_persona(const PersonaSeed& seed, gateway::ChatBackend& backend,
                         const GenerationOptions& options) {
  const auto prompt_text = prompt::render(
      prompt::TemplateId::PersonaGen,
      {{"three-sentences", fmt::format("{}\n{}\n{}", seed.sentences[0], seed.sentences[1], seed.sentences[2])},
       {"characteristics",
        fmt::format("The character is {} years old, with the characteristics of being {}.", seed.age,
                    characteristics_text(seed))}});
  gateway::ChatRequest request{options.model_id, "", {{gateway::Role::User, prompt_text}},
                               options.temperature, 4096};
  auto persona = prompt::complete_parsed(backend, std::move(request), prompt::parse_persona,
                                         options.format_retries);
  if (persona.age != seed.age) {
    spdlog::debug("persona '{}' generated with age {}; keeping seed age {}", persona.name, persona.age, seed.age);
  }
  persona.age = seed.age;
  persona.characteristics = characteristics_text(seed);
  validate(persona);
  return persona;
}

Scene generate_scene(const Persona& persona, const std::string& theme,
                     const HiddenIntention& intention, gateway::ChatBackend& backend,
                     const GenerationOptions& options) {
  const auto prompt_text = prompt::render(prompt::TemplateId::SceneGen,
                                          {{"persona", prompt::format_persona(persona)},
                                           {"characteristic", persona.characteristics},
                                           {"topic", theme},
                                           {"task", intention.text}});
  gateway::ChatRequest request{options.model_id, "", {{gateway::Role::User, prompt_text}},
                               options.temperature, 4096};
  const auto text = prompt::complete_parsed(backend, std::move(request), prompt::parse_scene,
                                            options.format_retries);
  Scene scene;
  scene.topic = intention.id;
  scene.theme = theme;
  scene.hidden_intention = intention.text;
  scene.category = intention.category;
  scene.background = text.background;
  scene.reaction_rules = text.reactions;
  validate(scene);
  return scene;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_json_atomic(dir / (scenario.id + ".json"), nlohmann::json(scenario));
}

ScenarioSet build_benchmark(const SeedPools& pools, const Plan& plan, std::uint64_t seed,
                            gateway::BackendProvider& provider, const BuildOptions& options) {
  pools.validate();
  if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (pools.themes.empty()) throw PoolTooSmall("theme pool is empty");

  struct Job {
    std::string id;
    const HiddenIntention* intention;
  };
  std::vector<Job> jobs;
  for (const auto& [topic, count] : plan) {
    if (count <= 0) throw ConfigError("plan count for '" + topic + "' must be positive");
    const auto& intention = pools.intention(topic);
    for (int k = 1; k <= count; ++k) jobs.push_back({fmt::format("{}-{}", topic, k), &intention});
  }

  std::vector<std::optional<Scenario>> built(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      try {
        auto rng = scenario_rng(seed, i);
        const auto persona_seed = sample_persona_seed(pools, rng);
        std::uniform_int_distribution<std::size_t> pick_theme(0, pools.themes.size() - 1);
        const auto& theme = pools.themes[pick_theme(rng)];
        auto backend = provider.for_cell(job.id, options.generation.model_id);
        Scenario s;
        s.id = job.id;
        s.persona = generate_persona(persona_seed, *backend, options.generation);
        s.scene = generate_scene(s.persona, theme, *job.intention, *backend, options.generation);
        validate(s);
        built[i] = std::move(s);
      } catch (const Error& e) {
        errors[i] = e.what();
        spdlog::warn("scenario {} skipped: {}", job.id, e.what());
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), jobs.size());
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  ScenarioSet set;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (built[i]) {
      ++set.topic_counts[built[i]->scene.topic];
      set.scenarios.push_back(std::move(*built[i]));
    } else {
      set.failures.push_back({jobs[i].id, errors[i]});
    }
  }

  if (!options.out_dir.empty()) {
    const auto dir = options.out_dir / "scenarios";
    for (const auto& s : set.scenarios) save_scenario(s, dir);
    nlohmann::json report{{"seed", seed},
                          {"requested", jobs.size()},
                          {"generated", set.scenarios.size()},
                          {"topic_counts", set.topic_counts},
                          {"failures", nlohmann::json::array()}};
    for (const auto& f : set.failures) {
      report["failures"].push_back({{"scenario_id", f.scenario_id}, {"reason", f.reason}});
    }
    write_json_atomic(options.out_dir / "generation_report.json", report);
  }
  if (!set.failures.empty()) {
    spdlog::warn("{} of {} scenarios failed to generate", set.failures.size(), jobs.size());
  }
  return set;
}

std::vector<Scenario> load_scenario_set(const std::filesystem::path& path) {
  auto dir = path;
  if (std::filesystem::is_directory(path / "scenarios")) dir = path / "scenarios";
  if (!std::filesystem::is_directory(dir)) throw ConfigError("scenario directory not found: " + path.string());
  std::vector<Scenario> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    try {
      auto s = read_json_file(entry.path()).get<Scenario>();
      validate(s);
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad scenario file " + entry.path().string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ConfigError("invalid scenario " + entry.path().string() + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError("no scenarios in " + dir.string());
  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

}  // namespace sage::scenario
