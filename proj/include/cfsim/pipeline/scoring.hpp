#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfsim/core/types.hpp"
#include "cfsim/metrics/embedding.hpp"
#include "cfsim/metrics/similarity.hpp"

namespace cfsim::pipeline {

struct ScoreCounts {
  int total = 0;        // |C|
  int simulatable = 0;  // |C*|
  int matches = 0;
  int unjudged = 0;                   // excluded from C
  int output_parse_failures = 0;      // excluded from C and C*
  int simulation_parse_failures = 0;  // counted as unsimulatable
};

struct ExplanationScore {
  std::string explanation_key;
  std::optional<double> precision;  // matches / |C*|
  std::optional<double> sim_rate;   // |C*| / |C|
  std::map<metrics::SimilarityMetricId, std::optional<double>> generality;
  ScoreCounts counts;
};

/// Scores the counterfactuals of one explanation. A simulatable counterfactual
/// must carry an actual output or an output parse failure.
ExplanationScore score_explanation(std::span<const CounterfactualRecord* const> counterfactuals,
                                   std::span<const metrics::SimilarityMetricId> metric_ids,
                                   const metrics::StopwordList& stopwords,
                                   metrics::EmbeddingProvider* embeddings = nullptr);

}  // namespace cfsim::pipeline
