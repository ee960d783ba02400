#include "cfsim/metrics/embedding.hpp"

#include <cmath>

#include "cfsim/gateway/gateway.hpp"

namespace cfsim::metrics {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<EmbeddingVector> LocalHashEmbedding::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    EmbeddingVector v(dimension_, 0.0);
    for (const auto& token : tokenize(text)) v[fnv1a(token) % dimension_] += 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

RemoteEmbedding::RemoteEmbedding(gateway::Gateway& gateway, std::string provider_id,
                                 std::string model_id, std::size_t batch_size)
    : gateway_(gateway),
      provider_id_(std::move(provider_id)),
      model_id_(std::move(model_id)),
      batch_size_(batch_size == 0 ? 1 : batch_size) {}

std::vector<EmbeddingVector> RemoteEmbedding::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += batch_size_) {
    auto batch = texts.subspan(i, std::min(batch_size_, texts.size() - i));
    auto vectors = gateway_.embed(provider_id_, model_id_, batch);
    for (auto& v : vectors) {
      if (v.empty()) throw MetricError(id() + ": empty embedding");
      for (double x : v) {
        if (!std::isfinite(x)) throw MetricError(id() + ": non-finite embedding entry");
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace cfsim::metrics
