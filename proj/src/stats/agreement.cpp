#include <map>

#include "cfsim/stats/stats.hpp"

namespace cfsim::stats {

KappaDetail cohen_kappa_detail(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("cohen_kappa: series of length " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  if (a.empty()) throw InsufficientData("cohen_kappa: empty series");

  const auto n = static_cast<double>(a.size());
  std::map<std::string, double> marginal_a;
  std::map<std::string, double> marginal_b;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    marginal_a[a[i]] += 1.0;
    marginal_b[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  KappaDetail d;
  d.observed = agree / n;
  for (const auto& [label, count] : marginal_a) {
    auto it = marginal_b.find(label);
    if (it != marginal_b.end()) d.expected += (count / n) * (it->second / n);
  }
  if (d.expected >= 1.0) {
    if (d.observed < 1.0) throw DegenerateMarginals("cohen_kappa: p_e = 1 with disagreement");
    d.degenerate = true;
    d.kappa = 1.0;
    return d;
  }
  d.kappa = (d.observed - d.expected) / (1.0 - d.expected);
  return d;
}

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  return cohen_kappa_detail(a, b).kappa;
}

AveragedKappa avg_pairwise_kappa(std::span<const LabelSeries> series) {
  if (series.size() < 2) throw InsufficientData("avg_pairwise_kappa: need at least two series");
  AveragedKappa out;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      auto d = cohen_kappa_detail(series[i], series[j]);
      if (d.degenerate) {
        ++out.pairs_degenerate;
        continue;
      }
      sum += d.kappa;
      ++out.pairs_used;
    }
  }
  if (out.pairs_used == 0) {
    throw DegenerateMarginals("avg_pairwise_kappa: every pair has degenerate marginals");
  }
  out.mean = sum / out.pairs_used;
  return out;
}

SimulationJudgment majority_vote(std::span<const SimulationJudgment> judgments, int redundancy) {
  if (judgments.empty()) throw EmptyInput("majority_vote: no judgments");
  if (static_cast<int>(judgments.size()) > redundancy) {
    throw PreconditionError("majority_vote: " + std::to_string(judgments.size()) +
                            " judgments exceed redundancy " + std::to_string(redundancy));
  }
  std::map<std::string, int> counts;
  for (const auto& j : judgments) ++counts[j.to_string()];
  for (const auto& [value, count] : counts) {
    if (2 * count > static_cast<int>(judgments.size())) return SimulationJudgment::from_string(value);
  }
  return SimulationJudgment::unsimulatable();
}

}  // namespace cfsim::stats
