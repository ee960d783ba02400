#include "cfsim/pipeline/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include "cfsim/core/parsers.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/gateway/provider.hpp"
#include "cfsim/pipeline/report.hpp"

namespace cfsim::pipeline {
namespace {

using nlohmann::json;

struct ItemOutcome {
  std::vector<json> records;
  std::optional<std::string> error;
  int parse_failures = 0;
};

// Runs work(i) for i in [0, count) on up to `workers` threads and passes each
// result to commit(i, result) in index order, so the store sees the same
// sequence regardless of completion order. Commits are serialized.
template <typename Work, typename Commit>
void ordered_fan_out(std::size_t count, int workers, Work work, Commit commit) {
  using Result = decltype(work(std::size_t{}));
  std::vector<std::optional<Result>> results(count);
  std::mutex mu;
  std::size_t next = 0;
  std::size_t committed = 0;
  std::exception_ptr failure;

  auto run = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || failure) return;
        i = next++;
      }
      try {
        auto r = work(i);
        std::lock_guard lock(mu);
        results[i] = std::move(r);
        while (committed < count && results[committed] && !failure) {
          commit(committed, *results[committed]);
          results[committed].reset();
          ++committed;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(run);
  if (count > 0) run();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

tasks::GenerationParams generator_params(const GeneratorConfig& g, const CounterfactualConfig& c) {
  return {g.provider_id, g.model_id, c.temperature, c.max_tokens, std::nullopt};
}

RunConfig validated(RunConfig config) {
  config.validate();
  return config;
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

}  // namespace

IncompleteRun::IncompleteRun(std::vector<std::string> missing)
    : Error([&] {
        std::string msg = "run is incomplete; missing:";
        for (const auto& m : missing) msg += " " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

json StageReport::to_json() const {
  json r = json::array();
  for (const auto& [item, error] : retriable) r.push_back({{"item", item}, {"error", error}});
  return {{"stage", stage},
          {"completed", completed},
          {"skipped", skipped},
          {"parse_failures", parse_failures},
          {"unjudged", unjudged},
          {"retriable", r}};
}

json ForcedComparison::to_json() const {
  return {{"normal_system", normal_system},
          {"forced_system", forced_system},
          {"eligible_instances", eligible_instances},
          {"excluded_instances", excluded_instances},
          {"pairs_used", pairs_used},
          {"pairs_skipped", pairs_skipped},
          {"normal_precision", normal_precision},
          {"forced_precision", forced_precision},
          {"delta", delta},
          {"p_value", test.p_value},
          {"iterations", test.iterations},
          {"seed", test.seed}};
}

std::string forced_system_id(const std::string& normal_id) {
  constexpr std::string_view kSuffix = "/posthoc";
  if (normal_id.size() >= kSuffix.size() &&
      normal_id.compare(normal_id.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
    return normal_id.substr(0, normal_id.size() - kSuffix.size()) + "/forced";
  }
  return normal_id + "/forced";
}

std::shared_ptr<gateway::Gateway> build_gateway(const RunConfig& config) {
  auto cache = config.cache_dir.empty()
                   ? std::make_shared<gateway::ResponseCache>()
                   : std::make_shared<gateway::ResponseCache>(config.cache_dir);
  gateway::RetryPolicy retry;
  retry.base_delay = std::chrono::milliseconds(config.retry_base_delay_ms);
  retry.max_attempts = config.retry_max_attempts;
  auto gw = std::make_shared<gateway::Gateway>(cache, retry, config.max_in_flight);
  for (const auto& p : config.providers) {
    if (p.type == "scripted") {
      gw->add_provider(gateway::ScriptedProvider::from_file(p.id, p.fixtures));
    } else {
      gw->add_provider(std::make_shared<gateway::OpenAICompatibleProvider>(
          gateway::RemoteProviderConfig{p.id, p.base_url, p.credential_env_var, p.timeout_seconds}));
    }
  }
  return gw;
}

Pipeline::Pipeline(RunConfig config, std::shared_ptr<gateway::Gateway> gw)
    : config_(validated(std::move(config))),
      gateway_(gw ? std::move(gw) : build_gateway(config_)),
      prompts_(config_.templates_dir.empty() ? tasks::TemplateSet::bundled()
                                             : tasks::TemplateSet::with_overrides(config_.templates_dir)),
      stopwords_(config_.stopwords_path.empty() ? metrics::StopwordList::bundled()
                                                : metrics::StopwordList::from_file(config_.stopwords_path)) {
  dataset_ = config_.task_kind() == TaskKind::YesNoQA ? tasks::load_strategyqa(config_.dataset_path)
                                                      : tasks::load_shp(config_.dataset_path);
  if (config_.embedding.type == "remote") {
    embeddings_ = std::make_unique<metrics::RemoteEmbedding>(*gateway_, config_.embedding.provider_id,
                                                             config_.embedding.model_id);
  } else {
    embeddings_ = std::make_unique<metrics::LocalHashEmbedding>(config_.embedding.dimension);
  }
  systems_ = config_.systems;
  if (!config_.forced_system.empty()) {
    auto forced = config_.system(config_.forced_system);
    forced.id = forced_system_id(forced.id);
    forced.method = ExplanationMethod::ForcedPostHoc;
    systems_.push_back(forced);
  }

  store_ = std::make_unique<RunStore>(config_.store_dir, config_.run_id);
  state_ = RunState::from_records(store_->records());
  auto digest = config_.digest();
  if (state_.header) {
    if (state_.header->value("config_digest", "") != digest) {
      throw ConfigError("run '" + config_.run_id + "' exists with a different configuration");
    }
  } else {
    commit({{"kind", "run_header"},
            {"run_id", config_.run_id},
            {"config", config_.to_json()},
            {"config_digest", digest}});
  }
}

Pipeline Pipeline::open_run(const std::string& store_dir, const std::string& run_id,
                            std::shared_ptr<gateway::Gateway> gw) {
  auto path = std::filesystem::path(store_dir) / (run_id + ".jsonl");
  if (!std::filesystem::exists(path)) throw StoreError("no run '" + run_id + "' in " + store_dir);
  RunConfig config;
  {
    RunStore probe(store_dir, run_id);
    auto state = RunState::from_records(probe.records());
    if (!state.header) throw StoreError("run '" + run_id + "' has no header");
    config = RunConfig::from_json(state.header->at("config"));
  }
  config.store_dir = store_dir;
  return Pipeline(std::move(config), std::move(gw));
}

const ModelSystem& Pipeline::system(const std::string& id) const {
  for (const auto& s : systems_) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown system '" + id + "'");
}

metrics::EmbeddingProvider* Pipeline::embeddings() { return embeddings_.get(); }

void Pipeline::commit(const json& record) {
  store_->append(record);
  state_.apply(store_->records().back());
}

void Pipeline::mark_complete(const Scope& scope, std::string_view stage, const StageReport& report) {
  if (!report.ok() || state_.stage_complete(scope.name, std::string(stage))) return;
  commit({{"kind", "stage_complete"}, {"scope", scope.name}, {"stage", std::string(stage)}});
}

Pipeline::Scope Pipeline::main_scope() const {
  Scope scope{"main", {}};
  for (const auto& s : config_.systems) {
    for (const auto& inst : dataset_.instances) scope.units.push_back({inst.id, s.id});
  }
  return scope;
}

StageReport Pipeline::explanations(const Scope& scope) {
  StageReport report{"explanations"};
  struct Item {
    const TaskInstance* instance;
    ModelSystem system;
    std::optional<Label> forced_label;
  };
  std::vector<Item> items;
  for (const auto& u : scope.units) {
    if (state_.explanation(u.key())) {
      ++report.skipped;
      continue;
    }
    const auto& sys = system(u.system_id);
    Item item{&dataset_.at(u.instance_id), sys, std::nullopt};
    if (sys.method == ExplanationMethod::ForcedPostHoc) {
      const auto* normal = state_.explanation(u.instance_id + "::" + config_.forced_system);
      if (!normal || !normal->output) {
        report.retriable.emplace_back(u.key(), "normal post-hoc explanation unavailable");
        continue;
      }
      item.forced_label = opposite(*normal->output);
    }
    items.push_back(std::move(item));
  }

  auto kind = dataset_.kind;
  auto work = [&](std::size_t i) {
    const auto& item = items[i];
    const auto& inst = *item.instance;
    ExplanationRecord rec{inst.id, item.system.id, item.system.method, "", std::nullopt, ""};
    ItemOutcome out;
    json extra = json::object();
    try {
      auto requests = prompts_.render_explanation_prompt(inst, item.system, item.forced_label);
      auto raw = gateway_->complete(requests.front()).text;
      switch (item.system.method) {
        case ExplanationMethod::CoT: {
          rec.raw_completion = raw;
          try {
            auto parsed = parse_answer(raw, kind, rec.method);
            rec.explanation = parsed.explanation;
            rec.output = parsed.output;
          } catch (const Error&) {
            ++out.parse_failures;
          }
          break;
        }
        case ExplanationMethod::PostHoc: {
          extra["answer_completion"] = raw;
          std::optional<Label> answer;
          try {
            answer = parse_answer(raw, kind, rec.method).output;
          } catch (const Error&) {
            ++out.parse_failures;
          }
          if (!answer) break;
          auto p = tasks::params_of(item.system);
          auto explain_raw =
              gateway_->complete(prompts_.posthoc_explain_request(inst.input, p, *answer)).text;
          rec.raw_completion = explain_raw;
          try {
            rec.explanation = parse_posthoc_explanation(explain_raw, kind, *answer);
            rec.output = answer;
          } catch (const Error&) {
            ++out.parse_failures;
          }
          break;
        }
        case ExplanationMethod::ForcedPostHoc: {
          rec.raw_completion = raw;
          try {
            rec.explanation = parse_posthoc_explanation(raw, kind, *item.forced_label);
            rec.output = item.forced_label;
          } catch (const Error&) {
            ++out.parse_failures;
          }
          break;
        }
      }
    } catch (const gateway::GatewayError& e) {
      out.error = e.what();
      return out;
    }
    auto j = explanation_to_json(rec);
    j["extra"] = extra;
    out.records.push_back(std::move(j));
    return out;
  };
  auto commit_item = [&](std::size_t i, ItemOutcome& out) {
    if (out.error) {
      report.retriable.emplace_back(items[i].instance->id + "::" + items[i].system.id, *out.error);
      return;
    }
    for (const auto& r : out.records) commit(r);
    ++report.completed;
    report.parse_failures += out.parse_failures;
  };
  ordered_fan_out(items.size(), config_.max_in_flight, work, commit_item);
  mark_complete(scope, "explanations", report);
  return report;
}

StageReport Pipeline::counterfactuals(const Scope& scope) {
  StageReport report{"counterfactuals"};
  std::vector<std::pair<std::string, std::vector<GeneratorConfig>>> groups;
  if (config_.counterfactual.mixing) {
    groups.emplace_back("mix", config_.counterfactual.generators);
  } else {
    for (const auto& g : config_.counterfactual.generators) groups.emplace_back(g.id, std::vector{g});
  }

  struct Item {
    const TaskInstance* instance;
    ExplanationRecord parent;
    std::string group;
    std::vector<GeneratorConfig> generators;
  };
  std::vector<Item> items;
  for (const auto& u : scope.units) {
    const auto* rec = state_.explanation(u.key());
    if (!rec) {
      report.retriable.emplace_back(u.key(), "explanation missing");
      continue;
    }
    if (rec->parse_failed()) continue;
    for (const auto& [group, gens] : groups) {
      if (state_.counterfactual_sets.count(counterfactual_set_key(u.key(), group))) {
        ++report.skipped;
        continue;
      }
      items.push_back({&dataset_.at(u.instance_id), *rec, group, gens});
    }
  }

  const auto n = config_.counterfactual.n;
  auto kind = dataset_.kind;
  auto work = [&](std::size_t i) {
    const auto& item = items[i];
    ItemOutcome out;
    CounterfactualSet set;
    set.parent_key = item.parent.key();
    set.group = item.group;
    auto original = normalize_for_dedup(input_text(item.instance->input));
    std::set<std::string> seen;
    std::vector<std::string> errors;
    int healthy_generators = 0;
    for (const auto& gen : item.generators) {
      auto req = prompts_.render_counterfactual_prompt(
          *item.instance, item.parent, generator_params(gen, config_.counterfactual));
      std::vector<std::optional<std::string>> samples;
      std::optional<std::string> gen_error;
      int failed = 0;
      for (int k = 0; k < n; ++k) {
        try {
          samples.push_back(gateway_->complete(req, k).text);
        } catch (const gateway::GatewayError& e) {
          samples.push_back(std::nullopt);
          gen_error = e.what();
          ++failed;
        }
      }
      if (failed == n) {
        set.failed_generators.push_back(gen.id);
        errors.push_back(gen.id + ": " + *gen_error);
        continue;
      }
      if (failed > 0) {
        out.error = gen.id + ": " + *gen_error;
        return out;
      }
      ++healthy_generators;
      for (int k = 0; k < n; ++k) {
        ++set.generated;
        std::string text;
        try {
          text = input_text(parse_counterfactual(*samples[k], kind));
        } catch (const ParseFailure&) {
          ++set.parse_failures[gen.id];
          ++out.parse_failures;
          continue;
        }
        auto norm = normalize_for_dedup(text);
        if (norm == original) {
          ++set.dropped_original;
          continue;
        }
        if (!seen.insert(norm).second) {
          ++set.duplicates;
          continue;
        }
        CounterfactualRecord cf;
        cf.id = "cf:" + item.instance->id + ":" + item.parent.system_id + ":" + item.group + ":" +
                std::to_string(set.counterfactuals.size());
        cf.parent_key = set.parent_key;
        cf.group = item.group;
        cf.text = text;
        cf.generator_id = gen.id;
        cf.sample_index = k;
        set.counterfactuals.push_back(std::move(cf));
      }
    }
    if (healthy_generators == 0) {
      std::string msg = "every generator failed";
      for (const auto& e : errors) msg += "; " + e;
      out.error = msg;
      return out;
    }
    out.records.push_back(counterfactual_set_to_json(set));
    return out;
  };
  auto commit_item = [&](std::size_t i, ItemOutcome& out) {
    if (out.error) {
      report.retriable.emplace_back(items[i].parent.key() + "|" + items[i].group, *out.error);
      return;
    }
    for (const auto& r : out.records) commit(r);
    ++report.completed;
    report.parse_failures += out.parse_failures;
  };
  ordered_fan_out(items.size(), config_.max_in_flight, work, commit_item);
  mark_complete(scope, "counterfactuals", report);
  return report;
}

StageReport Pipeline::simulation(const Scope& scope) {
  StageReport report{"simulate"};
  struct Item {
    const TaskInstance* instance;
    ExplanationRecord parent;
    CounterfactualRecord cf;
  };
  std::vector<Item> items;
  for (const auto& u : scope.units) {
    const auto* rec = state_.explanation(u.key());
    if (!rec || rec->parse_failed()) continue;
    for (const auto* cf : state_.counterfactuals_of(u.key())) {
      if (cf->judgment) {
        ++report.skipped;
        continue;
      }
      items.push_back({&dataset_.at(u.instance_id), *rec, *cf});
    }
  }
  auto kind = dataset_.kind;

  if (config_.simulator.type == SimulatorType::Human) {
    std::map<std::string, std::vector<SimulationJudgment>> by_ref;
    if (!config_.simulator.export_path.empty()) {
      for (const auto& h : read_annotation_export(config_.simulator.export_path)) {
        if (h.kind != "simulation") continue;
        auto j = SimulationJudgment::from_string(h.label);
        if (j.label() && !label_valid_for(*j.label(), kind)) {
          throw Error("export label '" + h.label + "' does not fit the task on " + h.ref);
        }
        by_ref[h.ref].push_back(j);
      }
    }
    for (const auto& item : items) {
      auto it = by_ref.find(item.cf.id);
      if (it == by_ref.end()) {
        ++report.unjudged;
        continue;
      }
      auto vote = stats::majority_vote(it->second, config_.simulator.redundancy);
      commit({{"kind", "judgment"},
              {"counterfactual_id", item.cf.id},
              {"judgment", vote.to_string()},
              {"source", std::string(to_string(JudgmentSource::HumanMajority))},
              {"parse_failed", false},
              {"votes", it->second.size()}});
      ++report.completed;
    }
    mark_complete(scope, "simulate", report);
    return report;
  }

  tasks::GenerationParams params{config_.simulator.provider_id, config_.simulator.model_id, 0.0,
                                 config_.simulator.max_tokens, std::nullopt};
  auto work = [&](std::size_t i) {
    const auto& item = items[i];
    ItemOutcome out;
    auto cf_input = input_from_text(item.cf.text, kind);
    auto req = prompts_.render_simulation_prompt(*item.instance, item.parent, cf_input, params);
    std::string raw;
    try {
      raw = gateway_->complete(req).text;
    } catch (const gateway::GatewayError& e) {
      out.error = e.what();
      return out;
    }
    auto judgment = SimulationJudgment::unsimulatable();
    bool failed = false;
    try {
      judgment = parse_simulation(raw, kind);
    } catch (const Error&) {
      failed = true;
      ++out.parse_failures;
    }
    out.records.push_back({{"kind", "judgment"},
                           {"counterfactual_id", item.cf.id},
                           {"judgment", judgment.to_string()},
                           {"source", std::string(to_string(JudgmentSource::LLMSimulator))},
                           {"parse_failed", failed},
                           {"raw_completion", raw}});
    return out;
  };
  auto commit_item = [&](std::size_t i, ItemOutcome& out) {
    if (out.error) {
      report.retriable.emplace_back(items[i].cf.id, *out.error);
      return;
    }
    for (const auto& r : out.records) commit(r);
    ++report.completed;
    report.parse_failures += out.parse_failures;
  };
  ordered_fan_out(items.size(), config_.max_in_flight, work, commit_item);
  mark_complete(scope, "simulate", report);
  return report;
}

StageReport Pipeline::outputs(const Scope& scope) {
  StageReport report{"outputs"};
  struct Item {
    ModelSystem system;
    CounterfactualRecord cf;
  };
  std::vector<Item> items;
  for (const auto& u : scope.units) {
    const auto* rec = state_.explanation(u.key());
    if (!rec || rec->parse_failed()) continue;
    for (const auto* cf : state_.counterfactuals_of(u.key())) {
      if (!cf->judgment || !cf->judgment->simulatable()) continue;
      if (cf->actual_output || cf->output_parse_failed) {
        ++report.skipped;
        continue;
      }
      items.push_back({system(u.system_id), *cf});
    }
  }
  auto kind = dataset_.kind;
  auto work = [&](std::size_t i) {
    const auto& item = items[i];
    ItemOutcome out;
    auto req = prompts_.output_request(input_from_text(item.cf.text, kind), item.system);
    std::string raw;
    try {
      raw = gateway_->complete(req).text;
    } catch (const gateway::GatewayError& e) {
      out.error = e.what();
      return out;
    }
    std::optional<Label> output;
    try {
      output = parse_answer(raw, kind, item.system.method).output;
    } catch (const Error&) {
      ++out.parse_failures;
    }
    out.records.push_back({{"kind", "actual_output"},
                           {"counterfactual_id", item.cf.id},
                           {"output", output ? json(std::string(to_string(*output))) : json(nullptr)},
                           {"parse_failed", !output.has_value()},
                           {"raw_completion", raw}});
    return out;
  };
  auto commit_item = [&](std::size_t i, ItemOutcome& out) {
    if (out.error) {
      report.retriable.emplace_back(items[i].cf.id, *out.error);
      return;
    }
    for (const auto& r : out.records) commit(r);
    ++report.completed;
    report.parse_failures += out.parse_failures;
  };
  ordered_fan_out(items.size(), config_.max_in_flight, work, commit_item);
  mark_complete(scope, "outputs", report);
  return report;
}

StageReport Pipeline::stage(const Scope& scope, std::string_view name) {
  if (name == "explanations") return explanations(scope);
  if (name == "counterfactuals") return counterfactuals(scope);
  if (name == "simulate") return simulation(scope);
  if (name == "outputs") return outputs(scope);
  throw PreconditionError("unknown stage '" + std::string(name) + "'");
}

StageReport Pipeline::run_explanations() { return explanations(main_scope()); }
StageReport Pipeline::run_counterfactuals() { return counterfactuals(main_scope()); }
StageReport Pipeline::run_simulation() { return simulation(main_scope()); }
StageReport Pipeline::run_outputs() { return outputs(main_scope()); }
StageReport Pipeline::run_stage(std::string_view name) { return stage(main_scope(), name); }

std::vector<StageReport> Pipeline::run_all() {
  std::vector<StageReport> reports;
  for (auto name : kStages) {
    reports.push_back(run_stage(name));
    if (!reports.back().ok()) break;
  }
  return reports;
}

ExplanationScore Pipeline::score(const std::string& explanation_key) {
  auto cfs = state_.counterfactuals_of(explanation_key);
  auto s = score_explanation(cfs, config_.metrics, stopwords_, embeddings());
  s.explanation_key = explanation_key;
  return s;
}

ForcedComparison Pipeline::forced_sanity_check() {
  if (config_.forced_system.empty()) throw ConfigError("forced.system is not configured");
  const auto& normal = system(config_.forced_system);
  const auto forced_id = forced_system_id(normal.id);

  Scope all{"forced-normal", {}};
  for (const auto& inst : dataset_.instances) all.units.push_back({inst.id, normal.id});
  auto first = explanations(all);
  if (!first.ok()) {
    throw gateway::GatewayError("normal explanations incomplete: " + first.retriable.front().second);
  }

  ForcedComparison cmp;
  cmp.normal_system = normal.id;
  cmp.forced_system = forced_id;
  Scope subset{"forced", {}};
  std::vector<std::string> eligible;
  for (const auto& inst : dataset_.instances) {
    const auto* rec = state_.explanation(inst.id + "::" + normal.id);
    if (rec && rec->output && *rec->output == inst.gold) {
      eligible.push_back(inst.id);
      subset.units.push_back({inst.id, normal.id});
      subset.units.push_back({inst.id, forced_id});
    } else {
      ++cmp.excluded_instances;
    }
  }
  cmp.eligible_instances = static_cast<int>(eligible.size());
  if (eligible.empty()) throw EmptySubset("no instance where the normal output equals gold");

  for (auto name : kStages) {
    auto r = stage(subset, name);
    if (!r.ok()) {
      throw gateway::GatewayError("forced comparison stage " + std::string(name) +
                                  " incomplete: " + r.retriable.front().second);
    }
  }

  std::vector<double> normal_p;
  std::vector<double> forced_p;
  for (const auto& id : eligible) {
    const auto* f = state_.explanation(id + "::" + forced_id);
    std::optional<double> np = score(id + "::" + normal.id).precision;
    std::optional<double> fp;
    if (f && !f->parse_failed()) fp = score(id + "::" + forced_id).precision;
    if (!np || !fp) {
      ++cmp.pairs_skipped;
      continue;
    }
    normal_p.push_back(*np);
    forced_p.push_back(*fp);
  }
  cmp.pairs_used = static_cast<int>(normal_p.size());
  if (normal_p.empty()) throw EmptySubset("no instance has a defined precision under both systems");
  cmp.normal_precision = mean(normal_p);
  cmp.forced_precision = mean(forced_p);
  cmp.delta = cmp.normal_precision - cmp.forced_precision;
  cmp.test = stats::paired_permutation_test(normal_p, forced_p, config_.permutation_iterations,
                                            config_.permutation_seed);
  record_analysis("sanity_forced", cmp.to_json());
  return cmp;
}

void Pipeline::record_analysis(const std::string& kind, json result) {
  commit({{"kind", kind}, {"result", std::move(result)}});
}

json Pipeline::report() {
  return build_report(config_, state_, dataset_, stopwords_, embeddings());
}

IaaTable Pipeline::iaa(std::span<const HumanJudgment> export_lines, int raters) {
  auto aligned = align_human_ratings(export_lines, raters);
  std::map<std::string, stats::LabelSeries> simulators;
  stats::LabelSeries llm;
  bool complete = true;
  for (const auto& item : aligned.items) {
    const auto* cf = state_.counterfactual(item);
    if (!cf || !cf->judgment || cf->judgment_source != JudgmentSource::LLMSimulator) {
      complete = false;
      break;
    }
    llm.push_back(cf->judgment->to_string());
  }
  for (auto& s : aligned.series) {
    for (auto& l : s) l = SimulationJudgment::from_string(l).to_string();
  }
  if (complete && !aligned.items.empty() && config_.simulator.type == SimulatorType::LLM) {
    simulators[config_.simulator.model_id] = llm;
  }
  auto table = iaa_report(aligned.series, simulators);
  record_analysis("iaa_table", table.to_json());
  return table;
}

PlausibilityCorrelation Pipeline::correlate(std::span<const HumanJudgment> export_lines) {
  std::map<std::string, std::vector<double>> ratings;
  for (const auto& h : export_lines) {
    if (h.kind != "plausibility") continue;
    ratings[h.ref].push_back(std::stod(h.label));
  }
  std::vector<InputScores> inputs;
  for (const auto& inst : dataset_.instances) {
    InputScores in{inst.id, {}, {}};
    for (const auto& s : config_.systems) {
      auto key = inst.id + "::" + s.id;
      auto it = ratings.find(key);
      const auto* rec = state_.explanation(key);
      if (it == ratings.end() || !rec) continue;
      in.plausibility.push_back(mean(it->second));
      in.precision.push_back(rec->parse_failed() ? std::nullopt : score(key).precision);
    }
    inputs.push_back(std::move(in));
  }
  auto result = correlation_report(inputs);
  record_analysis("plausibility_correlation", result.to_json());
  return result;
}

}  // namespace cfsim::pipeline
