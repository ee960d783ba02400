#pragma once

#include <string>
#include <string_view>

#include "cfsim/core/types.hpp"

namespace cfsim {

struct ParsedAnswer {
  std::string explanation;
  Label output;
};

/// Splits a completion into the reasoning and the label announced by the last
/// "So the answer is yes|no" (or "So Candidate Response 1|2 is more helpful")
/// marker. A leading "here is my response." cue is dropped. Throws
/// ParseFailure when no marker is present.
ParsedAnswer parse_answer(std::string_view raw, TaskKind kind, ExplanationMethod method);

/// Explanation text for a post-hoc justification of `given`. The marker is
/// optional here, but when present it has to agree with `given`.
std::string parse_posthoc_explanation(std::string_view raw, TaskKind kind, Label given);

/// Refusals ("cannot guess", "cannot confidently guess") are checked first and
/// win over any label mention. Throws ParseFailure when neither a refusal nor
/// a label marker is found.
SimulationJudgment parse_simulation(std::string_view raw, TaskKind kind);

/// Extracts the follow-up input from a counterfactual-generation completion.
TaskInput parse_counterfactual(std::string_view raw, TaskKind kind);

/// Parses the canonical pairwise block produced by input_text().
PairwiseInput parse_pairwise_block(std::string_view block);

/// Inverse of input_text() for the given kind.
TaskInput input_from_text(std::string_view text, TaskKind kind);

/// The marker sentence that announces `label`, e.g. "So the answer is yes."
std::string marker_sentence(Label label);

/// Removes a leading "here is my response." cue echoed by the model.
std::string strip_response_cue(std::string_view raw);

}  // namespace cfsim
