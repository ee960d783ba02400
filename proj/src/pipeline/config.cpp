#include "cfsim/pipeline/config.hpp"

#include <filesystem>
#include <set>

#include "cfsim/core/text.hpp"
#include "cfsim/gateway/types.hpp"

namespace cfsim::pipeline {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string required(const json& j, const char* key, const std::string& where) {
  auto value = get_or<std::string>(j, key, "");
  if (value.empty()) throw ConfigError(where + ": missing '" + key + "'");
  return value;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  auto dir = fs::absolute(path).parent_path().string();
  auto cfg = from_json(j, dir);
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.run_id = required(j, "run_id", "config");
  c.store_dir = resolve(base_dir, get_or<std::string>(j, "store_dir", c.store_dir));
  c.cache_dir = resolve(base_dir, get_or<std::string>(j, "cache_dir", ""));
  c.templates_dir = resolve(base_dir, get_or<std::string>(j, "templates_dir", ""));
  c.stopwords_path = resolve(base_dir, get_or<std::string>(j, "stopwords_path", ""));

  auto ds = get_or<json>(j, "dataset", json::object());
  c.dataset_kind = get_or<std::string>(ds, "kind", c.dataset_kind);
  c.dataset_path = resolve(base_dir, required(ds, "path", "dataset"));

  for (const auto& p : get_or<json>(j, "providers", json::array())) {
    ProviderConfig pc;
    pc.id = required(p, "id", "provider");
    pc.type = get_or<std::string>(p, "type", pc.type);
    pc.fixtures = resolve(base_dir, get_or<std::string>(p, "fixtures", ""));
    pc.base_url = get_or<std::string>(p, "base_url", pc.base_url);
    pc.credential_env_var = get_or<std::string>(p, "credential_env_var", pc.credential_env_var);
    pc.timeout_seconds = get_or<int>(p, "timeout_seconds", pc.timeout_seconds);
    c.providers.push_back(pc);
  }

  for (const auto& s : get_or<json>(j, "systems", json::array())) {
    ModelSystem m;
    m.id = required(s, "id", "system");
    m.provider_id = required(s, "provider", "system " + m.id);
    m.model_id = required(s, "model", "system " + m.id);
    try {
      m.method = method_from_string(get_or<std::string>(s, "method", "cot"));
    } catch (const Error& e) {
      throw ConfigError("system " + m.id + ": " + e.what());
    }
    m.temperature = get_or<double>(s, "temperature", 0.0);
    m.max_tokens = get_or<int>(s, "max_tokens", m.max_tokens);
    if (s.contains("seed") && !s["seed"].is_null()) m.seed = s["seed"].get<long long>();
    c.systems.push_back(m);
  }

  auto cf = get_or<json>(j, "counterfactual", json::object());
  for (const auto& g : get_or<json>(cf, "generators", json::array())) {
    GeneratorConfig gc;
    gc.provider_id = required(g, "provider", "generator");
    gc.model_id = required(g, "model", "generator");
    gc.id = get_or<std::string>(g, "id", gc.model_id);
    c.counterfactual.generators.push_back(gc);
  }
  c.counterfactual.n = get_or<int>(cf, "n", c.task_kind() == TaskKind::YesNoQA ? 10 : 6);
  c.counterfactual.temperature = get_or<double>(cf, "temperature", c.counterfactual.temperature);
  c.counterfactual.max_tokens = get_or<int>(cf, "max_tokens", c.counterfactual.max_tokens);
  c.counterfactual.mixing = get_or<bool>(cf, "mixing", c.counterfactual.mixing);

  auto sim = get_or<json>(j, "simulator", json::object());
  auto sim_type = get_or<std::string>(sim, "type", "llm");
  if (sim_type == "llm") {
    c.simulator.type = SimulatorType::LLM;
    c.simulator.provider_id = required(sim, "provider", "simulator");
    c.simulator.model_id = required(sim, "model", "simulator");
  } else if (sim_type == "human") {
    c.simulator.type = SimulatorType::Human;
    c.simulator.export_path = resolve(base_dir, get_or<std::string>(sim, "export", ""));
  } else {
    throw ConfigError("simulator.type must be 'llm' or 'human'");
  }
  c.simulator.max_tokens = get_or<int>(sim, "max_tokens", c.simulator.max_tokens);
  c.simulator.redundancy = get_or<int>(sim, "redundancy", c.simulator.redundancy);

  if (j.contains("metrics")) {
    c.metrics.clear();
    for (const auto& m : j["metrics"]) {
      try {
        c.metrics.push_back(metrics::similarity_metric_from_string(m.get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(std::string("metrics: ") + e.what());
      }
    }
  }

  auto emb = get_or<json>(j, "embedding", json::object());
  c.embedding.type = get_or<std::string>(emb, "type", c.embedding.type);
  c.embedding.dimension = get_or<int>(emb, "dimension", c.embedding.dimension);
  c.embedding.provider_id = get_or<std::string>(emb, "provider", "");
  c.embedding.model_id = get_or<std::string>(emb, "model", "");

  auto seeds = get_or<json>(j, "seeds", json::object());
  c.permutation_seed = get_or<std::uint64_t>(seeds, "permutation", c.permutation_seed);
  c.permutation_iterations = get_or<int>(seeds, "iterations", c.permutation_iterations);

  c.max_in_flight = get_or<int>(j, "max_in_flight", c.max_in_flight);
  auto retry = get_or<json>(j, "retry", json::object());
  c.retry_base_delay_ms = get_or<int>(retry, "base_delay_ms", c.retry_base_delay_ms);
  c.retry_max_attempts = get_or<int>(retry, "max_attempts", c.retry_max_attempts);

  auto forced = get_or<json>(j, "forced", json::object());
  c.forced_system = get_or<std::string>(forced, "system", "");
  return c;
}

json RunConfig::to_json() const {
  json providers_j = json::array();
  for (const auto& p : providers) {
    providers_j.push_back({{"id", p.id},
                           {"type", p.type},
                           {"fixtures", p.fixtures},
                           {"base_url", p.base_url},
                           {"credential_env_var", p.credential_env_var},
                           {"timeout_seconds", p.timeout_seconds}});
  }
  json systems_j = json::array();
  for (const auto& s : systems) {
    systems_j.push_back({{"id", s.id},
                         {"provider", s.provider_id},
                         {"model", s.model_id},
                         {"method", std::string(cfsim::to_string(s.method))},
                         {"temperature", s.temperature},
                         {"max_tokens", s.max_tokens},
                         {"seed", s.seed ? json(*s.seed) : json(nullptr)}});
  }
  json generators_j = json::array();
  for (const auto& g : counterfactual.generators) {
    generators_j.push_back({{"id", g.id}, {"provider", g.provider_id}, {"model", g.model_id}});
  }
  json metrics_j = json::array();
  for (auto m : metrics) metrics_j.push_back(std::string(metrics::to_string(m)));
  json sim_j = {{"type", simulator.type == SimulatorType::LLM ? "llm" : "human"},
                {"max_tokens", simulator.max_tokens},
                {"redundancy", simulator.redundancy}};
  if (simulator.type == SimulatorType::LLM) {
    sim_j["provider"] = simulator.provider_id;
    sim_j["model"] = simulator.model_id;
  } else {
    sim_j["export"] = simulator.export_path;
  }
  return {{"run_id", run_id},
          {"store_dir", store_dir},
          {"cache_dir", cache_dir},
          {"dataset", {{"kind", dataset_kind}, {"path", dataset_path}}},
          {"templates_dir", templates_dir},
          {"stopwords_path", stopwords_path},
          {"providers", providers_j},
          {"systems", systems_j},
          {"counterfactual",
           {{"generators", generators_j},
            {"n", counterfactual.n},
            {"temperature", counterfactual.temperature},
            {"max_tokens", counterfactual.max_tokens},
            {"mixing", counterfactual.mixing}}},
          {"simulator", sim_j},
          {"metrics", metrics_j},
          {"embedding",
           {{"type", embedding.type},
            {"dimension", embedding.dimension},
            {"provider", embedding.provider_id},
            {"model", embedding.model_id}}},
          {"seeds", {{"permutation", permutation_seed}, {"iterations", permutation_iterations}}},
          {"max_in_flight", max_in_flight},
          {"retry", {{"base_delay_ms", retry_base_delay_ms}, {"max_attempts", retry_max_attempts}}},
          {"forced", {{"system", forced_system}}}};
}

std::string RunConfig::digest() const {
  // Storage locations do not change what a run computes.
  auto j = to_json();
  j.erase("store_dir");
  j.erase("cache_dir");
  return gateway::sha256_hex(j.dump());
}

void RunConfig::validate() const {
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("run_id must be a non-empty name without path separators");
  }
  if (dataset_kind != "strategyqa" && dataset_kind != "shp") {
    throw ConfigError("dataset.kind must be 'strategyqa' or 'shp'");
  }
  std::set<std::string> provider_ids;
  for (const auto& p : providers) {
    if (!provider_ids.insert(p.id).second) throw ConfigError("duplicate provider id " + p.id);
    if (p.type != "scripted" && p.type != "openai") {
      throw ConfigError("provider " + p.id + ": type must be 'scripted' or 'openai'");
    }
    if (p.type == "scripted" && p.fixtures.empty()) {
      throw ConfigError("provider " + p.id + ": scripted providers need 'fixtures'");
    }
  }
  auto need_provider = [&](const std::string& id, const std::string& who) {
    if (!provider_ids.count(id)) throw ConfigError(who + " references unknown provider '" + id + "'");
  };
  if (systems.empty()) throw ConfigError("at least one system is required");
  std::set<std::string> system_ids;
  for (const auto& s : systems) {
    if (!system_ids.insert(s.id).second) throw ConfigError("duplicate system id " + s.id);
    need_provider(s.provider_id, "system " + s.id);
    if (s.temperature < 0) throw ConfigError("system " + s.id + ": negative temperature");
    if (s.method == ExplanationMethod::ForcedPostHoc) {
      throw ConfigError("system " + s.id + ": forced systems are derived from forced.system");
    }
  }
  if (counterfactual.generators.empty()) throw ConfigError("at least one generator is required");
  std::set<std::string> generator_ids;
  for (const auto& g : counterfactual.generators) {
    if (!generator_ids.insert(g.id).second) throw ConfigError("duplicate generator id " + g.id);
    if (g.id == "mix") throw ConfigError("generator id 'mix' is reserved");
    need_provider(g.provider_id, "generator " + g.id);
  }
  if (counterfactual.n < 1) throw ConfigError("counterfactual.n must be at least 1");
  if (simulator.type == SimulatorType::LLM) need_provider(simulator.provider_id, "simulator");
  if (simulator.redundancy < 1) throw ConfigError("simulator.redundancy must be at least 1");
  if (embedding.type != "local" && embedding.type != "remote") {
    throw ConfigError("embedding.type must be 'local' or 'remote'");
  }
  if (embedding.type == "remote") need_provider(embedding.provider_id, "embedding");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (permutation_iterations < 1) throw ConfigError("seeds.iterations must be at least 1");
  if (!forced_system.empty()) {
    const auto& s = system(forced_system);
    if (s.method != ExplanationMethod::PostHoc) {
      throw ConfigError("forced.system must name a post-hoc system");
    }
  }
}

const ModelSystem& RunConfig::system(const std::string& id) const {
  for (const auto& s : systems) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown system '" + id + "'");
}

TaskKind RunConfig::task_kind() const {
  return dataset_kind == "shp" ? TaskKind::PairwisePreference : TaskKind::YesNoQA;
}

}  // namespace cfsim::pipeline
