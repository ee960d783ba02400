#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/core/error.hpp"
#include "cfsim/gateway/types.hpp"

namespace cfsim::tasks {

class TemplateMissing : public Error {
 public:
  using Error::Error;
};

class PlaceholderUnfilled : public Error {
 public:
  using Error::Error;
};

struct RenderedPrompt {
  std::vector<gateway::ChatTurn> turns;
  std::optional<std::string> response_cue;
};

/// A few-shot chat prompt stored as text:
///
///   # template: strategyqa.cot
///   # version: 1
///   Human: ...
///
///   Assistant: ...
///
/// A turn starts at a line beginning with "Human: " or "Assistant: " that opens
/// the file or follows a blank line. `{{name}}` marks a placeholder. A trailing
/// assistant turn is the response cue that opens the model's answer; it is kept
/// out of the request turns.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string_view text, std::string fallback_id = {});

  const std::string& id() const { return id_; }
  const std::string& version() const { return version_; }
  const std::vector<gateway::ChatTurn>& turns() const { return turns_; }
  const std::optional<std::string>& response_cue() const { return response_cue_; }

  std::set<std::string> placeholders() const;
  RenderedPrompt render(const std::map<std::string, std::string>& values) const;

 private:
  std::string id_;
  std::string version_;
  std::vector<gateway::ChatTurn> turns_;
  std::optional<std::string> response_cue_;
};

/// "Human: ...\n\nAssistant: ..." with the response cue appended as a final
/// assistant turn when present.
std::string to_transcript(const std::vector<gateway::ChatTurn>& turns,
                          const std::optional<std::string>& response_cue);

class TemplateSet {
 public:
  /// The templates compiled into the binary.
  static TemplateSet bundled();
  /// Bundled templates, overridden by every `<id>.txt` found in `dir`.
  static TemplateSet with_overrides(const std::string& dir);

  void add(PromptTemplate t);
  const PromptTemplate& get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace cfsim::tasks
