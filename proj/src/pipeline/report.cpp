#include "cfsim/pipeline/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "cfsim/pipeline/pipeline.hpp"
#include "cfsim/pipeline/scoring.hpp"
#include "cfsim/stats/stats.hpp"

namespace cfsim::pipeline {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct MeanAccumulator {
  double sum = 0.0;
  int n = 0;
  int excluded = 0;

  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    } else {
      ++excluded;
    }
  }
  std::optional<double> mean() const {
    return n > 0 ? std::optional<double>(sum / n) : std::nullopt;
  }
  json to_json(const char* excluded_name) const {
    return {{"mean", optional_number(mean())}, {"n", n}, {excluded_name, excluded}};
  }
};

json not_computed(const std::string& how) {
  return {{"computed", false}, {"how", how}};
}

json computed(const json& result) {
  json out = result;
  out["computed"] = true;
  return out;
}

std::string fmt(const json& v, int width = 9) {
  char buf[64];
  if (v.is_number()) {
    std::snprintf(buf, sizeof buf, "%*.3f", width, v.get<double>());
  } else {
    std::snprintf(buf, sizeof buf, "%*s", width, "-");
  }
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

json build_report(const RunConfig& config, const RunState& state, const tasks::Dataset& dataset,
                  const metrics::StopwordList& stopwords, metrics::EmbeddingProvider* embeddings) {
  std::vector<std::string> missing;
  for (auto stage : kStages) {
    if (!state.stage_complete("main", std::string(stage))) missing.emplace_back(stage);
  }
  if (!missing.empty()) throw IncompleteRun(missing);

  json explanations = json::array();
  json systems = json::array();
  std::map<metrics::SimilarityMetricId, std::pair<std::vector<double>, std::vector<double>>> pooled;

  for (const auto& sys : config.systems) {
    std::vector<ExplanationRecord> records;
    MeanAccumulator precision;
    MeanAccumulator sim_rate;
    std::map<metrics::SimilarityMetricId, MeanAccumulator> generality;
    std::map<std::string, int> excl = {{"explanation_parse_failures", 0},
                                       {"counterfactual_parse_failures", 0},
                                       {"duplicates", 0},
                                       {"dropped_original", 0},
                                       {"failed_generators", 0},
                                       {"unjudged", 0},
                                       {"simulation_parse_failures", 0},
                                       {"output_parse_failures", 0}};
    int counterfactuals = 0;
    int simulatable = 0;

    for (const auto& inst : dataset.instances) {
      auto key = inst.id + "::" + sys.id;
      const auto* rec = state.explanation(key);
      if (!rec) throw IncompleteRun({"explanation " + key});
      records.push_back(*rec);
      json e = {{"instance_id", inst.id},
                {"system_id", sys.id},
                {"output", rec->output ? json(std::string(to_string(*rec->output))) : json(nullptr)},
                {"gold", std::string(to_string(inst.gold))},
                {"parse_failed", rec->parse_failed()}};
      if (rec->parse_failed()) {
        ++excl["explanation_parse_failures"];
        explanations.push_back(e);
        continue;
      }
      int generated = 0;
      int cf_parse_failures = 0;
      int duplicates = 0;
      int dropped = 0;
      int failed_generators = 0;
      auto prefix = key + "|";
      for (auto it = state.counterfactual_sets.lower_bound(prefix);
           it != state.counterfactual_sets.end() && it->first.compare(0, prefix.size(), prefix) == 0;
           ++it) {
        const auto& set = it->second;
        generated += set.generated;
        for (const auto& [gen, count] : set.parse_failures) cf_parse_failures += count;
        duplicates += set.duplicates;
        dropped += set.dropped_original;
        failed_generators += static_cast<int>(set.failed_generators.size());
      }
      auto cfs = state.counterfactuals_of(key);
      auto score = score_explanation(cfs, config.metrics, stopwords, embeddings);
      precision.add(score.precision);
      sim_rate.add(score.sim_rate);
      json gen_j = json::object();
      for (const auto& [id, value] : score.generality) {
        generality[id].add(value);
        gen_j[std::string(metrics::to_string(id))] = optional_number(value);
        if (value && score.precision) {
          pooled[id].first.push_back(*score.precision);
          pooled[id].second.push_back(*value);
        }
      }
      const auto& c = score.counts;
      excl["counterfactual_parse_failures"] += cf_parse_failures;
      excl["duplicates"] += duplicates;
      excl["dropped_original"] += dropped;
      excl["failed_generators"] += failed_generators;
      excl["unjudged"] += c.unjudged;
      excl["simulation_parse_failures"] += c.simulation_parse_failures;
      excl["output_parse_failures"] += c.output_parse_failures;
      counterfactuals += c.total;
      simulatable += c.simulatable;
      e["precision"] = optional_number(score.precision);
      e["sim_rate"] = optional_number(score.sim_rate);
      e["generality"] = gen_j;
      e["counts"] = {{"counterfactuals", c.total},
                     {"simulatable", c.simulatable},
                     {"matches", c.matches},
                     {"generated", generated},
                     {"counterfactual_parse_failures", cf_parse_failures},
                     {"duplicates", duplicates},
                     {"dropped_original", dropped},
                     {"failed_generators", failed_generators},
                     {"unjudged", c.unjudged},
                     {"simulation_parse_failures", c.simulation_parse_failures},
                     {"output_parse_failures", c.output_parse_failures}};
      explanations.push_back(e);
    }

    json gen_agg = json::object();
    for (auto id : config.metrics) {
      gen_agg[std::string(metrics::to_string(id))] = generality[id].to_json("excluded_degenerate");
    }
    systems.push_back({{"system_id", sys.id},
                       {"method", std::string(to_string(sys.method))},
                       {"model", sys.model_id},
                       {"explanations", records.size()},
                       {"task_accuracy", tasks::task_accuracy(records, dataset)},
                       {"precision", precision.to_json("excluded_undefined")},
                       {"sim_rate", sim_rate.to_json("excluded_undefined")},
                       {"generality", gen_agg},
                       {"counterfactuals", counterfactuals},
                       {"simulatable", simulatable},
                       {"exclusions", excl}});
  }

  json simulatability = json::array();
  json precision_table = json::array();
  json accuracy_table = json::array();
  for (const auto& s : systems) {
    json gen = json::object();
    for (const auto& [metric, agg] : s["generality"].items()) gen[metric] = agg["mean"];
    simulatability.push_back(
        {{"system_id", s["system_id"]}, {"sim_rate", s["sim_rate"]["mean"]}, {"generality", gen}});
    precision_table.push_back({{"system_id", s["system_id"]},
                               {"precision", s["precision"]["mean"]},
                               {"n", s["precision"]["n"]}});
    accuracy_table.push_back({{"system_id", s["system_id"]},
                              {"task_accuracy", s["task_accuracy"]},
                              {"precision", s["precision"]["mean"]}});
  }

  json precision_generality = json::object();
  for (auto id : config.metrics) {
    const auto& [p, g] = pooled[id];
    json entry = {{"n", p.size()}};
    try {
      entry["pearson"] = stats::pearson(p, g);
    } catch (const stats::StatsError& e) {
      entry["pearson"] = nullptr;
      entry["reason"] = e.what();
    }
    precision_generality[std::string(metrics::to_string(id))] = entry;
  }

  auto analysis = [&](const std::string& kind, const std::string& how) {
    auto it = state.analyses.find(kind);
    return it == state.analyses.end() ? not_computed(how) : computed(it->second.at("result"));
  };

  json significance = json::array();
  if (auto it = state.analyses.find("sanity_forced"); it != state.analyses.end()) {
    const auto& r = it->second.at("result");
    significance.push_back({{"comparison", r["normal_system"].get<std::string>() + " vs " +
                                               r["forced_system"].get<std::string>()},
                            {"p_value", r["p_value"]},
                            {"seed", r["seed"]},
                            {"iterations", r["iterations"]}});
  }

  return {
      {"run_id", config.run_id},
      {"config_digest", config.digest()},
      {"dataset", {{"kind", config.dataset_kind}, {"instances", dataset.instances.size()}}},
      {"notes", json::array({kApproximationNote})},
      {"explanations", explanations},
      {"systems", systems},
      {"tables",
       {{"simulatability_generality", simulatability},
        {"forced_vs_normal", analysis("sanity_forced", "cfsim sanity forced --config <file>")},
        {"inter_annotator_agreement",
         analysis("iaa_table", "cfsim iaa --run <id> --human-export <file>")},
        {"precision_by_system", precision_table},
        {"precision_generality_correlation", precision_generality},
        {"precision_plausibility_correlation",
         analysis("plausibility_correlation", "cfsim correlate --run <id> --plausibility <file>")},
        {"accuracy_vs_precision", accuracy_table}}},
      {"significance", significance}};
}

std::string render_report_table(const json& report) {
  std::string out;
  out += "run " + report["run_id"].get<std::string>() + "  dataset " +
         report["dataset"]["kind"].get<std::string>() + " (" +
         std::to_string(report["dataset"]["instances"].get<int>()) + " instances)\n\n";

  std::vector<std::string> metric_names;
  if (!report["systems"].empty()) {
    for (const auto& [m, _] : report["systems"][0]["generality"].items()) metric_names.push_back(m);
  }
  std::string header = pad("system", 24) + pad("method", 9) + "accuracy precision  sim_rate";
  for (const auto& m : metric_names) header += pad("", 1) + pad("gen:" + m, 9);
  out += header + "\n";
  for (const auto& s : report["systems"]) {
    std::string line = pad(s["system_id"].get<std::string>(), 24) +
                       pad(s["method"].get<std::string>(), 9) + fmt(s["task_accuracy"], 8) +
                       fmt(s["precision"]["mean"], 10) + fmt(s["sim_rate"]["mean"], 10);
    for (const auto& m : metric_names) line += fmt(s["generality"][m]["mean"], 10);
    out += line + "\n";
  }
  out += "\n";
  for (const auto& s : report["systems"]) {
    out += s["system_id"].get<std::string>() + ": precision over " +
           std::to_string(s["precision"]["n"].get<int>()) + " explanations, " +
           std::to_string(s["simulatable"].get<int>()) + " of " +
           std::to_string(s["counterfactuals"].get<int>()) + " counterfactuals simulatable; excluded";
    for (const auto& [k, v] : s["exclusions"].items()) out += " " + k + "=" + v.dump();
    out += "\n";
  }

  const auto& t = report["tables"];
  out += "\nforced vs normal: ";
  if (t["forced_vs_normal"]["computed"].get<bool>()) {
    const auto& f = t["forced_vs_normal"];
    out += "normal " + fmt(f["normal_precision"], 0) + ", forced " + fmt(f["forced_precision"], 0) +
           ", delta " + fmt(f["delta"], 0) + ", p " + fmt(f["p_value"], 0) + " over " +
           std::to_string(f["pairs_used"].get<int>()) + " instances\n";
  } else {
    out += "not computed\n";
  }
  out += "inter-annotator agreement: ";
  if (t["inter_annotator_agreement"]["computed"].get<bool>()) {
    const auto& a = t["inter_annotator_agreement"];
    out += "human-human " + fmt(a["human_human"], 0);
    for (const auto& s : a["simulators"]) {
      out += ", " + s["name"].get<std::string>() + "-human " + fmt(s["kappa_vs_humans"], 0) +
             " (ratio " + fmt(s["ratio"], 0) + ")";
    }
    out += "\n";
  } else {
    out += "not computed\n";
  }
  out += "precision-generality pearson:";
  for (const auto& [m, v] : t["precision_generality_correlation"].items()) {
    out += " " + m + " " + fmt(v["pearson"], 0);
  }
  out += "\nprecision-plausibility: ";
  if (t["precision_plausibility_correlation"]["computed"].get<bool>()) {
    const auto& c = t["precision_plausibility_correlation"];
    out += "pearson " + fmt(c["mean_pearson"], 0) + ", spearman " + fmt(c["mean_spearman"], 0) +
           " over " + std::to_string(c["inputs_used"].get<int>()) + " inputs\n";
  } else {
    out += "not computed\n";
  }
  out += "\nnote: " + report["notes"][0].get<std::string>() + "\n";
  return out;
}

json emit_report(const std::string& store_dir, const std::string& run_id) {
  auto pipeline = Pipeline::open_run(store_dir, run_id);
  auto report = pipeline.report();
  auto path = std::filesystem::path(store_dir) / (run_id + ".report.json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << report.dump(2) << "\n";
  if (!out) throw StoreError("cannot write " + path.string());
  return report;
}

}  // namespace cfsim::pipeline
