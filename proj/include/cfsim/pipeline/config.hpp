#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/core/error.hpp"
#include "cfsim/core/types.hpp"
#include "cfsim/metrics/similarity.hpp"

namespace cfsim::pipeline {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ProviderConfig {
  std::string id;
  std::string type = "scripted";  // "scripted" or "openai"
  std::string fixtures;           // scripted: fixture file
  std::string base_url = "https://api.openai.com/v1";
  std::string credential_env_var = "OPENAI_API_KEY";
  int timeout_seconds = 120;
};

struct GeneratorConfig {
  std::string id;
  std::string provider_id;
  std::string model_id;
};

struct CounterfactualConfig {
  std::vector<GeneratorConfig> generators;
  int n = 10;
  double temperature = 0.7;
  int max_tokens = 256;
  bool mixing = false;
};

enum class SimulatorType { LLM, Human };

struct SimulatorConfig {
  SimulatorType type = SimulatorType::LLM;
  std::string provider_id;
  std::string model_id;
  int max_tokens = 256;
  std::string export_path;  // human: annotation export (JSON lines)
  int redundancy = 3;
};

struct EmbeddingConfig {
  std::string type = "local";  // "local" or "remote"
  int dimension = 512;
  std::string provider_id;
  std::string model_id;
};

struct RunConfig {
  std::string run_id;
  std::string store_dir = "runs";
  std::string cache_dir;  // empty: in-memory cache only
  std::string dataset_kind = "strategyqa";  // "strategyqa" or "shp"
  std::string dataset_path;
  std::string templates_dir;
  std::string stopwords_path;
  std::vector<ProviderConfig> providers;
  std::vector<ModelSystem> systems;
  CounterfactualConfig counterfactual;
  SimulatorConfig simulator;
  std::vector<metrics::SimilarityMetricId> metrics = {metrics::SimilarityMetricId::Jaccard,
                                                      metrics::SimilarityMetricId::BLEU};
  EmbeddingConfig embedding;
  std::uint64_t permutation_seed = 0;
  int permutation_iterations = 10000;
  int max_in_flight = 4;
  int retry_base_delay_ms = 1000;
  int retry_max_attempts = 5;
  std::string forced_system;  // post-hoc system used for the forced comparison

  /// Relative paths in the file are resolved against the file's directory.
  static RunConfig load(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = {});
  nlohmann::json to_json() const;

  /// sha256 over the serialized configuration.
  std::string digest() const;

  /// Throws ConfigError on dangling provider references, duplicate ids or
  /// out-of-range values.
  void validate() const;

  const ModelSystem& system(const std::string& id) const;
  TaskKind task_kind() const;
};

}  // namespace cfsim::pipeline
