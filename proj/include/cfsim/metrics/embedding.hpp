#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cfsim/metrics/similarity.hpp"

namespace cfsim::gateway {
class Gateway;
}

namespace cfsim::metrics {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  /// One vector per text, in input order. Implementations are shareable across
  /// threads.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Hashed bag-of-words counts: every token of tokenize(text) adds 1 to slot
/// fnv1a(token) % dimension.
class LocalHashEmbedding final : public EmbeddingProvider {
 public:
  explicit LocalHashEmbedding(std::size_t dimension = 512) : dimension_(dimension) {}

  std::string id() const override { return "local-hash-" + std::to_string(dimension_); }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  std::size_t dimension_;
};

/// Calls an OpenAI-style /embeddings endpoint through the gateway's provider
/// (credentials, retry policy and in-flight cap are shared with chat calls).
class RemoteEmbedding final : public EmbeddingProvider {
 public:
  RemoteEmbedding(gateway::Gateway& gateway, std::string provider_id, std::string model_id,
                  std::size_t batch_size = 64);

  std::string id() const override { return provider_id_ + "/" + model_id_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  gateway::Gateway& gateway_;
  std::string provider_id_;
  std::string model_id_;
  std::size_t batch_size_;
};

}  // namespace cfsim::metrics
