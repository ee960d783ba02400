#include "cfsim/core/types.hpp"

#include "cfsim/core/error.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::YesNoQA: return "yes_no_qa";
    case TaskKind::PairwisePreference: return "pairwise_preference";
  }
  return "?";
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Yes: return "yes";
    case Label::No: return "no";
    case Label::Response1: return "response1";
    case Label::Response2: return "response2";
  }
  return "?";
}

std::string_view to_string(ExplanationMethod method) {
  switch (method) {
    case ExplanationMethod::CoT: return "cot";
    case ExplanationMethod::PostHoc: return "posthoc";
    case ExplanationMethod::ForcedPostHoc: return "forced";
  }
  return "?";
}

std::string_view to_string(JudgmentSource source) {
  return source == JudgmentSource::LLMSimulator ? "llm" : "human_majority";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "yes_no_qa") return TaskKind::YesNoQA;
  if (s == "pairwise_preference") return TaskKind::PairwisePreference;
  throw Error("unknown task kind: " + std::string(s));
}

Label label_from_string(std::string_view s) {
  auto l = to_lower(trim(s));
  if (l == "yes") return Label::Yes;
  if (l == "no") return Label::No;
  if (l == "response1" || l == "1") return Label::Response1;
  if (l == "response2" || l == "2") return Label::Response2;
  throw Error("unknown label: " + std::string(s));
}

ExplanationMethod method_from_string(std::string_view s) {
  auto l = to_lower(s);
  if (l == "cot") return ExplanationMethod::CoT;
  if (l == "posthoc" || l == "post-hoc") return ExplanationMethod::PostHoc;
  if (l == "forced") return ExplanationMethod::ForcedPostHoc;
  throw Error("unknown explanation method: " + std::string(s));
}

JudgmentSource judgment_source_from_string(std::string_view s) {
  if (s == "llm") return JudgmentSource::LLMSimulator;
  if (s == "human_majority") return JudgmentSource::HumanMajority;
  throw Error("unknown judgment source: " + std::string(s));
}

TaskKind kind_of(Label label) {
  return (label == Label::Yes || label == Label::No) ? TaskKind::YesNoQA
                                                     : TaskKind::PairwisePreference;
}

bool label_valid_for(Label label, TaskKind kind) { return kind_of(label) == kind; }

Label opposite(Label label) {
  switch (label) {
    case Label::Yes: return Label::No;
    case Label::No: return Label::Yes;
    case Label::Response1: return Label::Response2;
    case Label::Response2: return Label::Response1;
  }
  return label;
}

TaskKind kind_of(const TaskInput& input) {
  return std::holds_alternative<QuestionInput>(input) ? TaskKind::YesNoQA
                                                      : TaskKind::PairwisePreference;
}

std::string input_text(const TaskInput& input) {
  if (const auto* q = std::get_if<QuestionInput>(&input)) return q->question;
  const auto& p = std::get<PairwiseInput>(input);
  return "Context: " + p.context + "\nCandidate Response 1: " + p.response_1 +
         "\nCandidate Response 2: " + p.response_2;
}

std::string SimulationJudgment::to_string() const {
  return label_ ? std::string(cfsim::to_string(*label_)) : std::string("unsimulatable");
}

SimulationJudgment SimulationJudgment::from_string(std::string_view s) {
  auto l = to_lower(trim(s));
  if (l == "unsimulatable" || l == "cannot_tell" || l == "cannot tell") return unsimulatable();
  return entailed(label_from_string(l));
}

}  // namespace cfsim
