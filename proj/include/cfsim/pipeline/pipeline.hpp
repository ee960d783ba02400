#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfsim/gateway/gateway.hpp"
#include "cfsim/metrics/embedding.hpp"
#include "cfsim/pipeline/analysis.hpp"
#include "cfsim/pipeline/config.hpp"
#include "cfsim/pipeline/scoring.hpp"
#include "cfsim/pipeline/store.hpp"
#include "cfsim/stats/stats.hpp"
#include "cfsim/tasks/dataset.hpp"
#include "cfsim/tasks/prompts.hpp"

namespace cfsim::pipeline {

class IncompleteRun : public Error {
 public:
  explicit IncompleteRun(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kStages[] = {"explanations", "counterfactuals", "simulate",
                                               "outputs"};

struct StageReport {
  std::string stage;
  int completed = 0;
  int skipped = 0;
  int parse_failures = 0;
  int unjudged = 0;
  /// Items that failed on a provider error; rerunning the stage retries them.
  std::vector<std::pair<std::string, std::string>> retriable;

  bool ok() const { return retriable.empty(); }
  nlohmann::json to_json() const;
};

struct ForcedComparison {
  std::string normal_system;
  std::string forced_system;
  int eligible_instances = 0;
  int excluded_instances = 0;  // normal output wrong or unparsed
  int pairs_used = 0;
  int pairs_skipped = 0;  // either precision undefined
  double normal_precision = 0.0;
  double forced_precision = 0.0;
  double delta = 0.0;
  stats::PermutationResult test;

  nlohmann::json to_json() const;
};

/// "<model>/posthoc" becomes "<model>/forced"; other ids get "/forced" appended.
std::string forced_system_id(const std::string& normal_id);

/// Providers from the config: scripted fixtures or OpenAI-compatible
/// endpoints, behind one cache, retry policy and in-flight cap.
std::shared_ptr<gateway::Gateway> build_gateway(const RunConfig& config);

class Pipeline {
 public:
  explicit Pipeline(RunConfig config, std::shared_ptr<gateway::Gateway> gateway = nullptr);

  /// Reopens a run from the configuration stored in its header.
  static Pipeline open_run(const std::string& store_dir, const std::string& run_id,
                           std::shared_ptr<gateway::Gateway> gateway = nullptr);

  const RunConfig& config() const { return config_; }
  const tasks::Dataset& dataset() const { return dataset_; }
  const RunState& state() const { return state_; }
  const tasks::PromptSuite& prompts() const { return prompts_; }
  gateway::Gateway& gateway() { return *gateway_; }
  const RunStore& store() const { return *store_; }
  const metrics::StopwordList& stopwords() const { return stopwords_; }

  StageReport run_explanations();
  StageReport run_counterfactuals();
  StageReport run_simulation();
  StageReport run_outputs();
  StageReport run_stage(std::string_view stage);
  /// Runs the stages in order and stops after one that leaves retriable work.
  std::vector<StageReport> run_all();

  /// Normal post-hoc vs Forced on the instances the normal system answers
  /// correctly. Runs every stage that is still missing for both systems.
  ForcedComparison forced_sanity_check();

  ExplanationScore score(const std::string& explanation_key);

  /// Throws IncompleteRun naming the stages that have not completed.
  nlohmann::json report();

  /// Persists an analysis result (for example "iaa_table") shown in reports.
  void record_analysis(const std::string& kind, nlohmann::json result);

  /// IAA of the human export against this run's LLM simulator judgments.
  IaaTable iaa(std::span<const HumanJudgment> export_lines, int raters = 3);

  /// Precision-plausibility correlation with ratings from an export
  /// (plausibility labels, ref = explanation key).
  PlausibilityCorrelation correlate(std::span<const HumanJudgment> export_lines);

 private:
  struct WorkUnit {
    std::string instance_id;
    std::string system_id;
    std::string key() const { return instance_id + "::" + system_id; }
  };
  struct Scope {
    std::string name;
    std::vector<WorkUnit> units;
  };

  Scope main_scope() const;
  const ModelSystem& system(const std::string& id) const;
  metrics::EmbeddingProvider* embeddings();

  StageReport explanations(const Scope& scope);
  StageReport counterfactuals(const Scope& scope);
  StageReport simulation(const Scope& scope);
  StageReport outputs(const Scope& scope);
  StageReport stage(const Scope& scope, std::string_view name);
  void commit(const nlohmann::json& record);
  void mark_complete(const Scope& scope, std::string_view stage, const StageReport& report);

  RunConfig config_;
  std::shared_ptr<gateway::Gateway> gateway_;
  tasks::Dataset dataset_;
  tasks::PromptSuite prompts_;
  metrics::StopwordList stopwords_;
  std::unique_ptr<metrics::EmbeddingProvider> embeddings_;
  std::vector<ModelSystem> systems_;  // configured systems plus the derived forced system
  std::unique_ptr<RunStore> store_;
  RunState state_;
};

}  // namespace cfsim::pipeline
