#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cfsim {

enum class TaskKind { YesNoQA, PairwisePreference };

enum class Label { Yes, No, Response1, Response2 };

enum class ExplanationMethod { CoT, PostHoc, ForcedPostHoc };

std::string_view to_string(TaskKind kind);
std::string_view to_string(Label label);
std::string_view to_string(ExplanationMethod method);

TaskKind task_kind_from_string(std::string_view s);
Label label_from_string(std::string_view s);
ExplanationMethod method_from_string(std::string_view s);

TaskKind kind_of(Label label);
bool label_valid_for(Label label, TaskKind kind);

/// Yes <-> No, Response1 <-> Response2.
Label opposite(Label label);

struct QuestionInput {
  std::string question;
  bool operator==(const QuestionInput&) const = default;
};

struct PairwiseInput {
  std::string context;
  std::string response_1;
  std::string response_2;
  bool operator==(const PairwiseInput&) const = default;
};

using TaskInput = std::variant<QuestionInput, PairwiseInput>;

TaskKind kind_of(const TaskInput& input);

/// Canonical text form: the question itself, or a three-line block with the
/// "Context:" / "Candidate Response 1:" / "Candidate Response 2:" headers.
std::string input_text(const TaskInput& input);

struct TaskInstance {
  std::string id;
  TaskInput input;
  Label gold;

  TaskKind kind() const { return kind_of(input); }
};

/// h(x'): either the output a simulator infers for a counterfactual, or
/// Unsimulatable when the explanation entails no output.
class SimulationJudgment {
 public:
  static SimulationJudgment entailed(Label label) { return SimulationJudgment(label); }
  static SimulationJudgment unsimulatable() { return SimulationJudgment(std::nullopt); }

  bool simulatable() const { return label_.has_value(); }
  const std::optional<Label>& label() const { return label_; }

  /// "yes", "no", "response1", "response2" or "unsimulatable".
  std::string to_string() const;
  static SimulationJudgment from_string(std::string_view s);

  bool operator==(const SimulationJudgment&) const = default;

 private:
  explicit SimulationJudgment(std::optional<Label> label) : label_(label) {}
  std::optional<Label> label_;
};

struct ModelSystem {
  std::string id;  // e.g. "gpt-4/cot"
  std::string provider_id;
  std::string model_id;
  ExplanationMethod method = ExplanationMethod::CoT;
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<long long> seed;
};

struct ExplanationRecord {
  std::string instance_id;
  std::string system_id;
  ExplanationMethod method = ExplanationMethod::CoT;
  std::string explanation;
  std::optional<Label> output;  // empty when the completion failed to parse
  std::string raw_completion;

  bool parse_failed() const { return !output.has_value(); }
  std::string key() const { return instance_id + "::" + system_id; }
};

enum class JudgmentSource { LLMSimulator, HumanMajority };

std::string_view to_string(JudgmentSource source);
JudgmentSource judgment_source_from_string(std::string_view s);

struct CounterfactualRecord {
  std::string id;
  std::string parent_key;  // ExplanationRecord::key()
  std::string group;       // generator id, or "mix" when generators are pooled
  std::string text;
  std::string generator_id;
  int sample_index = 0;
  std::optional<SimulationJudgment> judgment;
  JudgmentSource judgment_source = JudgmentSource::LLMSimulator;
  bool simulation_parse_failed = false;
  std::optional<Label> actual_output;
  bool output_parse_failed = false;
};

}  // namespace cfsim
