#pragma once

#include <optional>
#include <span>
#include <string>

#include "cfsim/metrics/embedding.hpp"
#include "cfsim/metrics/similarity.hpp"

namespace cfsim::metrics {

/// One minus the mean similarity over all ordered pairs (x', x'') with x' != x''
/// drawn from the simulatable counterfactuals. Returns nullopt for fewer than
/// two texts. Cosine generality is reported unclamped and lies in [0, 2].
///
/// Pair similarities are sorted before summation so the result is exactly
/// invariant to the order of `texts`. `embeddings` is only consulted for
/// SimilarityMetricId::Cosine and may be null otherwise.
std::optional<double> generality(std::span<const std::string> texts, SimilarityMetricId metric,
                                 const StopwordList& stopwords,
                                 EmbeddingProvider* embeddings = nullptr);

}  // namespace cfsim::metrics
