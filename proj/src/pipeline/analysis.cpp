#include "cfsim/pipeline/analysis.hpp"

#include <algorithm>

#include "cfsim/core/error.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim::pipeline {
namespace {

using nlohmann::json;

std::string label_text(const json& label) {
  if (label.is_string()) return label.get<std::string>();
  return label.dump();
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<HumanJudgment> parse_annotation_export(std::string_view content) {
  std::vector<HumanJudgment> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      out.push_back({j.at("task_id").get<std::string>(), j.at("kind").get<std::string>(),
                     j.at("ref").get<std::string>(), j.at("worker_id").get<std::string>(),
                     label_text(j.at("label")), j.value("timestamp", "")});
    } catch (const json::exception& e) {
      throw Error("annotation export line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<HumanJudgment> read_annotation_export(const std::string& path) {
  return parse_annotation_export(read_file(path));
}

json IaaTable::to_json() const {
  json sims = json::array();
  for (const auto& s : simulators) {
    sims.push_back({{"name", s.name},
                    {"kappa_vs_humans", s.kappa_vs_humans},
                    {"ratio", optional_number(s.ratio)},
                    {"pairs_used", s.pairs_used},
                    {"pairs_degenerate", s.pairs_degenerate}});
  }
  return {{"human_human", human_human},
          {"human_pairs_used", human_pairs_used},
          {"human_pairs_degenerate", human_pairs_degenerate},
          {"items", items},
          {"simulators", sims}};
}

IaaTable iaa_report(std::span<const stats::LabelSeries> humans,
                    const std::map<std::string, stats::LabelSeries>& simulators) {
  if (humans.size() < 2) throw stats::InsufficientData("IAA needs at least two human raters");
  IaaTable table;
  auto hh = stats::avg_pairwise_kappa(humans);
  table.human_human = hh.mean;
  table.human_pairs_used = hh.pairs_used;
  table.human_pairs_degenerate = hh.pairs_degenerate;
  table.items = static_cast<int>(humans.front().size());
  for (const auto& [name, series] : simulators) {
    SimulatorAgreement s;
    s.name = name;
    double sum = 0.0;
    for (const auto& h : humans) {
      auto d = stats::cohen_kappa_detail(series, h);
      if (d.degenerate) {
        ++s.pairs_degenerate;
        continue;
      }
      sum += d.kappa;
      ++s.pairs_used;
    }
    if (s.pairs_used == 0) {
      throw stats::DegenerateMarginals("simulator " + name + ": every pair is degenerate");
    }
    s.kappa_vs_humans = sum / s.pairs_used;
    if (table.human_human != 0.0) s.ratio = s.kappa_vs_humans / table.human_human;
    table.simulators.push_back(s);
  }
  return table;
}

AlignedRatings align_human_ratings(std::span<const HumanJudgment> judgments, int raters) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_item;
  for (const auto& j : judgments) {
    if (j.kind != "simulation") continue;
    by_item[j.ref].emplace_back(j.worker_id, to_lower(j.label));
  }
  AlignedRatings out;
  out.series.resize(static_cast<std::size_t>(raters));
  for (auto& [item, labels] : by_item) {
    if (static_cast<int>(labels.size()) < raters) continue;
    std::sort(labels.begin(), labels.end());
    out.items.push_back(item);
    for (int i = 0; i < raters; ++i) out.series[i].push_back(labels[i].second);
  }
  return out;
}

json PlausibilityCorrelation::to_json() const {
  return {{"mean_pearson", mean_pearson},
          {"mean_spearman", mean_spearman},
          {"inputs_used", inputs_used},
          {"skipped_missing_precision", skipped_missing_precision},
          {"skipped_constant", skipped_constant},
          {"skipped_too_few_systems", skipped_too_few_systems}};
}

PlausibilityCorrelation correlation_report(std::span<const InputScores> inputs) {
  PlausibilityCorrelation out;
  double pearson_sum = 0.0;
  double spearman_sum = 0.0;
  for (const auto& in : inputs) {
    if (in.precision.size() != in.plausibility.size()) {
      throw stats::LengthMismatch("input " + in.instance_id + ": vectors differ in length");
    }
    if (in.precision.size() < 2) {
      ++out.skipped_too_few_systems;
      continue;
    }
    std::vector<double> precision;
    for (const auto& p : in.precision) {
      if (p) precision.push_back(*p);
    }
    if (precision.size() != in.precision.size()) {
      ++out.skipped_missing_precision;
      continue;
    }
    if (constant(precision) || constant(in.plausibility)) {
      ++out.skipped_constant;
      continue;
    }
    pearson_sum += stats::pearson(precision, in.plausibility);
    spearman_sum += stats::spearman(precision, in.plausibility);
    ++out.inputs_used;
  }
  if (out.inputs_used == 0) throw stats::InsufficientData("every input was skipped");
  out.mean_pearson = pearson_sum / out.inputs_used;
  out.mean_spearman = spearman_sum / out.inputs_used;
  return out;
}

}  // namespace cfsim::pipeline
