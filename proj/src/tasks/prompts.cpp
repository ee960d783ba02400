#include "cfsim/tasks/prompts.hpp"

#include "cfsim/core/error.hpp"
#include "cfsim/core/parsers.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim::tasks {
namespace {

std::map<std::string, std::string> input_values(const TaskInput& input) {
  if (const auto* q = std::get_if<QuestionInput>(&input)) return {{"question", q->question}};
  const auto& p = std::get<PairwiseInput>(input);
  return {{"context", p.context}, {"response_1", p.response_1}, {"response_2", p.response_2}};
}

std::string choice_name(Label label) {
  return label == Label::Response1 ? "Candidate Response 1" : "Candidate Response 2";
}

void require_same_kind(const TaskInstance& instance, const TaskInput& other) {
  if (kind_of(other) != instance.kind()) {
    throw PreconditionError("counterfactual kind differs from instance '" + instance.id + "'");
  }
}

bool blank(const TaskInput& input) {
  if (const auto* q = std::get_if<QuestionInput>(&input)) return trim(q->question).empty();
  const auto& p = std::get<PairwiseInput>(input);
  return trim(p.context).empty() || trim(p.response_1).empty() || trim(p.response_2).empty();
}

}  // namespace

GenerationParams params_of(const ModelSystem& system) {
  return {system.provider_id, system.model_id, system.temperature, system.max_tokens, system.seed};
}

PromptSuite::PromptSuite(TemplateSet templates) : templates_(std::move(templates)) {}

std::string PromptSuite::template_id(TaskKind kind, std::string_view stage) {
  if (kind == TaskKind::YesNoQA) return "strategyqa." + std::string(stage);
  if (stage == "cot") return "shp.explain";
  return "shp." + std::string(stage);
}

gateway::CompletionRequest PromptSuite::request(const std::string& id,
                                                const std::map<std::string, std::string>& values,
                                                const GenerationParams& p) const {
  auto rendered = templates_.get(id).render(values);
  gateway::CompletionRequest req;
  req.provider_id = p.provider_id;
  req.model_id = p.model_id;
  req.turns = std::move(rendered.turns);
  req.temperature = p.temperature;
  req.max_tokens = p.max_tokens;
  req.seed = p.seed;
  return req;
}

gateway::CompletionRequest PromptSuite::cot_request(const TaskInput& input,
                                                    const GenerationParams& p) const {
  return request(template_id(kind_of(input), "cot"), input_values(input), p);
}

gateway::CompletionRequest PromptSuite::direct_answer_request(const TaskInput& input,
                                                              const GenerationParams& p) const {
  return request(template_id(kind_of(input), "direct_answer"), input_values(input), p);
}

gateway::CompletionRequest PromptSuite::posthoc_explain_request(const TaskInput& input,
                                                                const GenerationParams& p,
                                                                Label answer) const {
  auto kind = kind_of(input);
  if (!label_valid_for(answer, kind)) throw PreconditionError("label does not fit the task kind");
  auto values = input_values(input);
  if (kind == TaskKind::YesNoQA) {
    values["answer"] = std::string(to_string(answer));
  } else {
    values["choice_number"] = answer == Label::Response1 ? "1" : "2";
  }
  return request(template_id(kind, "posthoc_explain"), values, p);
}

std::vector<gateway::CompletionRequest> PromptSuite::render_explanation_prompt(
    const TaskInstance& instance, const ModelSystem& system,
    std::optional<Label> forced_label) const {
  auto p = params_of(system);
  bool forced = system.method == ExplanationMethod::ForcedPostHoc;
  if (forced != forced_label.has_value()) {
    throw PreconditionError("a forced label is required for, and only for, forced systems");
  }
  switch (system.method) {
    case ExplanationMethod::CoT: return {cot_request(instance.input, p)};
    case ExplanationMethod::PostHoc: return {direct_answer_request(instance.input, p)};
    case ExplanationMethod::ForcedPostHoc:
      return {posthoc_explain_request(instance.input, p, *forced_label)};
  }
  return {};
}

std::string PromptSuite::robot_answer(const ExplanationRecord& record) {
  if (!record.output) {
    throw PreconditionError("explanation '" + record.key() + "' has no parsed output");
  }
  if (record.method == ExplanationMethod::CoT && !trim(record.raw_completion).empty()) {
    return strip_response_cue(record.raw_completion);
  }
  auto marker = marker_sentence(*record.output);
  auto explanation = trim(record.explanation);
  return explanation.empty() ? marker : explanation + " " + marker;
}

gateway::CompletionRequest PromptSuite::render_counterfactual_prompt(
    const TaskInstance& instance, const ExplanationRecord& record,
    const GenerationParams& p) const {
  std::map<std::string, std::string> values;
  if (instance.kind() == TaskKind::YesNoQA) {
    values["starter_question"] = std::get<QuestionInput>(instance.input).question;
    values["robot_answer"] = robot_answer(record);
  } else {
    values = input_values(instance.input);
    values["robot_choice"] = choice_name(*record.output);
    values["robot_explanation"] = robot_answer(record);
  }
  return request(template_id(instance.kind(), "counterfactual"), values, p);
}

gateway::CompletionRequest PromptSuite::render_simulation_prompt(
    const TaskInstance& instance, const ExplanationRecord& record,
    const TaskInput& counterfactual, const GenerationParams& p) const {
  require_same_kind(instance, counterfactual);
  if (blank(counterfactual)) throw PreconditionError("empty counterfactual");
  std::map<std::string, std::string> values;
  if (instance.kind() == TaskKind::YesNoQA) {
    values["starter_question"] = std::get<QuestionInput>(instance.input).question;
    values["robot_answer"] = robot_answer(record);
    values["follow_up"] = std::get<QuestionInput>(counterfactual).question;
  } else {
    values = input_values(instance.input);
    values["robot_choice"] = choice_name(*record.output);
    values["robot_explanation"] = robot_answer(record);
    const auto& f = std::get<PairwiseInput>(counterfactual);
    values["follow_up_context"] = f.context;
    values["follow_up_response_1"] = f.response_1;
    values["follow_up_response_2"] = f.response_2;
  }
  return request(template_id(instance.kind(), "simulate"), values, p);
}

gateway::CompletionRequest PromptSuite::output_request(const TaskInput& counterfactual,
                                                       const ModelSystem& system) const {
  if (system.method == ExplanationMethod::CoT) return cot_request(counterfactual, params_of(system));
  return direct_answer_request(counterfactual, params_of(system));
}

}  // namespace cfsim::tasks
