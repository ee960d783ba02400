#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cfsim/stats/stats.hpp"

namespace cfsim::pipeline {

/// One line of an annotation-service export.
struct HumanJudgment {
  std::string task_id;
  std::string kind;  // "simulation", "plausibility" or "qualification"
  std::string ref;   // counterfactual id or explanation key
  std::string worker_id;
  std::string label;
  std::string timestamp;
};

std::vector<HumanJudgment> parse_annotation_export(std::string_view content);
std::vector<HumanJudgment> read_annotation_export(const std::string& path);

struct SimulatorAgreement {
  std::string name;
  double kappa_vs_humans = 0.0;  // mean kappa against each human series
  std::optional<double> ratio;   // kappa_vs_humans / human-human kappa
  int pairs_used = 0;
  int pairs_degenerate = 0;
};

struct IaaTable {
  double human_human = 0.0;
  int human_pairs_used = 0;
  int human_pairs_degenerate = 0;
  std::vector<SimulatorAgreement> simulators;
  int items = 0;

  nlohmann::json to_json() const;
};

/// `humans` are at least two rater series aligned on the same items;
/// every simulator series is aligned the same way.
IaaTable iaa_report(std::span<const stats::LabelSeries> humans,
                    const std::map<std::string, stats::LabelSeries>& simulators);

/// Human rater series for IAA from an export: items with at least `raters`
/// simulation labels, with the labels of each item ordered by worker id and
/// the i-th label assigned to series i. Item ids are returned in order.
struct AlignedRatings {
  std::vector<std::string> items;
  std::vector<stats::LabelSeries> series;
};
AlignedRatings align_human_ratings(std::span<const HumanJudgment> judgments, int raters = 3);

/// Per-system (precision, plausibility) pairs on one input.
struct InputScores {
  std::string instance_id;
  std::vector<std::optional<double>> precision;
  std::vector<double> plausibility;
};

struct PlausibilityCorrelation {
  double mean_pearson = 0.0;
  double mean_spearman = 0.0;
  int inputs_used = 0;
  int skipped_missing_precision = 0;
  int skipped_constant = 0;
  int skipped_too_few_systems = 0;

  nlohmann::json to_json() const;
};

/// Per input, Pearson and Spearman across systems, averaged over inputs.
/// Inputs with fewer than two systems, a None precision or a constant vector
/// are skipped and counted. InsufficientData when every input is skipped.
PlausibilityCorrelation correlation_report(std::span<const InputScores> inputs);

}  // namespace cfsim::pipeline
