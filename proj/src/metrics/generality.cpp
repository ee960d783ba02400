#include "cfsim/metrics/generality.hpp"

#include <algorithm>

namespace cfsim::metrics {

std::optional<double> generality(std::span<const std::string> texts, SimilarityMetricId metric,
                                 const StopwordList& stopwords, EmbeddingProvider* embeddings) {
  const std::size_t n = texts.size();
  if (n <= 1) return std::nullopt;

  std::vector<EmbeddingVector> vectors;
  if (metric == SimilarityMetricId::Cosine) {
    if (embeddings == nullptr) throw MetricError("cosine generality needs an embedding provider");
    vectors = embeddings->embed(texts);
  }

  std::vector<double> sims;
  sims.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      switch (metric) {
        case SimilarityMetricId::BLEU: sims.push_back(bleu(texts[i], texts[j])); break;
        case SimilarityMetricId::Jaccard: sims.push_back(jaccard(texts[i], texts[j], stopwords)); break;
        case SimilarityMetricId::Cosine: sims.push_back(cosine(vectors[i], vectors[j])); break;
      }
    }
  }
  std::sort(sims.begin(), sims.end());
  double sum = 0.0;
  for (double s : sims) sum += s;
  return 1.0 - sum / static_cast<double>(sims.size());
}

}  // namespace cfsim::metrics
