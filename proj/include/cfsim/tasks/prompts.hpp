#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfsim/core/types.hpp"
#include "cfsim/gateway/types.hpp"
#include "cfsim/tasks/prompt_template.hpp"

namespace cfsim::tasks {

/// Model, sampling and provider settings for counterfactual generators and
/// LLM simulators.
struct GenerationParams {
  std::string provider_id;
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<long long> seed;
};

GenerationParams params_of(const ModelSystem& system);

/// Renders every pipeline prompt from a TemplateSet. Template ids are
/// "<task>.<stage>" with task "strategyqa" or "shp" and stage one of cot
/// (shp: explain), direct_answer, posthoc_explain, counterfactual, simulate.
class PromptSuite {
 public:
  explicit PromptSuite(TemplateSet templates = TemplateSet::bundled());

  const TemplateSet& templates() const { return templates_; }
  static std::string template_id(TaskKind kind, std::string_view stage);

  gateway::CompletionRequest cot_request(const TaskInput& input, const GenerationParams& p) const;
  gateway::CompletionRequest direct_answer_request(const TaskInput& input,
                                                   const GenerationParams& p) const;
  gateway::CompletionRequest posthoc_explain_request(const TaskInput& input,
                                                     const GenerationParams& p,
                                                     Label answer) const;

  /// CoT: the chain-of-thought prompt. PostHoc: the direct-answer prompt whose
  /// label feeds posthoc_explain_request. ForcedPostHoc: the explain prompt for
  /// `forced_label`, which must be given exactly for this method.
  std::vector<gateway::CompletionRequest> render_explanation_prompt(
      const TaskInstance& instance, const ModelSystem& system,
      std::optional<Label> forced_label = std::nullopt) const;

  gateway::CompletionRequest render_counterfactual_prompt(const TaskInstance& instance,
                                                          const ExplanationRecord& record,
                                                          const GenerationParams& p) const;

  gateway::CompletionRequest render_simulation_prompt(const TaskInstance& instance,
                                                      const ExplanationRecord& record,
                                                      const TaskInput& counterfactual,
                                                      const GenerationParams& p) const;

  /// The prompt that asks the explained system for its own output on a
  /// counterfactual: CoT systems answer through the CoT prompt, post-hoc and
  /// forced systems through the direct-answer prompt.
  gateway::CompletionRequest output_request(const TaskInput& counterfactual,
                                            const ModelSystem& system) const;

  /// What the robot said on the starter input: the raw CoT completion, or the
  /// post-hoc explanation followed by the marker sentence for its label.
  /// Throws PreconditionError for a record whose output failed to parse.
  static std::string robot_answer(const ExplanationRecord& record);

 private:
  gateway::CompletionRequest request(const std::string& template_id,
                                     const std::map<std::string, std::string>& values,
                                     const GenerationParams& p) const;

  TemplateSet templates_;
};

}  // namespace cfsim::tasks
