#include "cfsim/core/parsers.hpp"

#include <regex>

#include "cfsim/core/error.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim {
namespace {

constexpr std::string_view kResponseCue = "here is my response.";

const std::regex& answer_marker(TaskKind kind) {
  static const std::regex yes_no(R"(so the answer is\s+(yes|no)\b)", std::regex::icase);
  static const std::regex pairwise(R"(so candidate response\s+([12]) is more helpful)",
                                   std::regex::icase);
  return kind == TaskKind::YesNoQA ? yes_no : pairwise;
}

const std::regex& simulation_marker(TaskKind kind) {
  static const std::regex yes_no(R"(robot will likely answer\s+(yes|no)\b)", std::regex::icase);
  static const std::regex pairwise(R"(will choose candidate response\s+([12])\b)",
                                   std::regex::icase);
  return kind == TaskKind::YesNoQA ? yes_no : pairwise;
}

Label label_from_capture(const std::string& capture, TaskKind kind) {
  if (kind == TaskKind::YesNoQA) return to_lower(capture) == "yes" ? Label::Yes : Label::No;
  return capture == "1" ? Label::Response1 : Label::Response2;
}

std::optional<std::smatch> last_match(const std::string& text, const std::regex& re) {
  std::optional<std::smatch> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it) {
    last = *it;
  }
  return last;
}

std::string excerpt(std::string_view raw) {
  constexpr std::size_t kMax = 80;
  return raw.size() <= kMax ? std::string(raw) : std::string(raw.substr(0, kMax)) + "...";
}

// Value of a "Header: value" field; runs until the next known header line.
std::optional<std::string> field_value(const std::vector<std::string>& lines,
                                       std::string_view header) {
  static const std::vector<std::string_view> kStops = {
      "Context:", "Candidate Response 1:", "Candidate Response 2:", "Robot's", "Your guess",
      "Follow-up"};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.substr(0, header.size()) != header) continue;
    std::string value(line.substr(header.size()));
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      std::string_view next = lines[j];
      if (trim(next).empty()) break;
      bool stop = false;
      for (auto s : kStops) {
        if (next.substr(0, s.size()) == s) stop = true;
      }
      if (stop) break;
      value += "\n";
      value += next;
    }
    return trim(value);
  }
  return std::nullopt;
}

}  // namespace

std::string strip_response_cue(std::string_view raw) {
  auto text = trim(raw);
  if (starts_with_icase(text, kResponseCue)) text = trim(std::string_view(text).substr(kResponseCue.size()));
  return text;
}

std::string marker_sentence(Label label) {
  switch (label) {
    case Label::Yes: return "So the answer is yes.";
    case Label::No: return "So the answer is no.";
    case Label::Response1: return "So Candidate Response 1 is more helpful.";
    case Label::Response2: return "So Candidate Response 2 is more helpful.";
  }
  return {};
}

ParsedAnswer parse_answer(std::string_view raw, TaskKind kind, ExplanationMethod method) {
  if (trim(raw).empty()) throw PreconditionError("parse_answer: empty completion");
  auto text = strip_response_cue(raw);
  auto m = last_match(text, answer_marker(kind));
  if (!m) {
    throw ParseFailure(std::string("no answer marker in ") + std::string(to_string(method)) +
                       " completion: " + excerpt(raw));
  }
  return {trim(std::string_view(text).substr(0, m->position(0))),
          label_from_capture((*m)[1].str(), kind)};
}

std::string parse_posthoc_explanation(std::string_view raw, TaskKind kind, Label given) {
  if (trim(raw).empty()) throw ParseFailure("empty post-hoc explanation");
  auto text = strip_response_cue(raw);
  auto m = last_match(text, answer_marker(kind));
  if (!m) return text;
  if (label_from_capture((*m)[1].str(), kind) != given) {
    throw ParseFailure("post-hoc explanation argues for the other label: " + excerpt(raw));
  }
  return trim(std::string_view(text).substr(0, m->position(0)));
}

SimulationJudgment parse_simulation(std::string_view raw, TaskKind kind) {
  if (trim(raw).empty()) throw PreconditionError("parse_simulation: empty completion");
  static const std::regex refusal(R"(cannot (confidently )?guess)", std::regex::icase);
  std::string text(raw);
  if (std::regex_search(text, refusal)) return SimulationJudgment::unsimulatable();
  auto m = last_match(text, simulation_marker(kind));
  if (!m) throw ParseFailure("no simulation marker: " + excerpt(raw));
  return SimulationJudgment::entailed(label_from_capture((*m)[1].str(), kind));
}

PairwiseInput parse_pairwise_block(std::string_view block) {
  auto lines = split_lines(block);
  auto context = field_value(lines, "Context:");
  auto r1 = field_value(lines, "Candidate Response 1:");
  auto r2 = field_value(lines, "Candidate Response 2:");
  if (!context || !r1 || !r2) throw ParseFailure("missing field header in: " + excerpt(block));
  if (context->empty() || r1->empty() || r2->empty()) {
    throw ParseFailure("empty field in: " + excerpt(block));
  }
  return {*context, *r1, *r2};
}

TaskInput parse_counterfactual(std::string_view raw, TaskKind kind) {
  auto text = strip_response_cue(raw);
  if (text.empty()) throw ParseFailure("empty counterfactual completion");
  if (kind == TaskKind::PairwisePreference) {
    auto lines = split_lines(text);
    // A leading header copied from the prompt is tolerated.
    if (!lines.empty() && trim(lines.front()) == "Follow-up Example:") lines.erase(lines.begin());
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    return parse_pairwise_block(joined);
  }
  auto first = trim(split_lines(text).front());
  constexpr std::string_view kHeader = "Follow-up Question:";
  if (starts_with_icase(first, kHeader)) first = trim(std::string_view(first).substr(kHeader.size()));
  if (first.empty()) throw ParseFailure("first line of counterfactual completion is empty");
  return QuestionInput{first};
}

TaskInput input_from_text(std::string_view text, TaskKind kind) {
  if (kind == TaskKind::YesNoQA) return QuestionInput{std::string(text)};
  return parse_pairwise_block(text);
}

}  // namespace cfsim
