#include "cfsim/pipeline/scoring.hpp"

#include "cfsim/core/error.hpp"
#include "cfsim/metrics/generality.hpp"

namespace cfsim::pipeline {

ExplanationScore score_explanation(std::span<const CounterfactualRecord* const> counterfactuals,
                                   std::span<const metrics::SimilarityMetricId> metric_ids,
                                   const metrics::StopwordList& stopwords,
                                   metrics::EmbeddingProvider* embeddings) {
  ExplanationScore score;
  if (!counterfactuals.empty()) score.explanation_key = counterfactuals.front()->parent_key;
  auto& n = score.counts;
  std::vector<std::string> simulatable_texts;
  for (const auto* c : counterfactuals) {
    if (!c->judgment) {
      ++n.unjudged;
      continue;
    }
    if (!c->judgment->simulatable()) {
      ++n.total;
      if (c->simulation_parse_failed) ++n.simulation_parse_failures;
      continue;
    }
    if (c->output_parse_failed) {
      ++n.output_parse_failures;
      continue;
    }
    if (!c->actual_output) {
      throw PreconditionError("counterfactual " + c->id + " has no actual output");
    }
    ++n.total;
    ++n.simulatable;
    if (*c->actual_output == *c->judgment->label()) ++n.matches;
    simulatable_texts.push_back(c->text);
  }
  if (n.simulatable > 0) score.precision = static_cast<double>(n.matches) / n.simulatable;
  if (n.total > 0) score.sim_rate = static_cast<double>(n.simulatable) / n.total;
  for (auto id : metric_ids) {
    score.generality[id] = metrics::generality(simulatable_texts, id, stopwords, embeddings);
  }
  return score;
}

}  // namespace cfsim::pipeline
