#pragma once

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/core/error.hpp"
#include "cfsim/core/types.hpp"

namespace cfsim::pipeline {

inline constexpr int kSchemaVersion = 1;

class StoreError : public Error {
 public:
  using Error::Error;
};

/// Append-only JSON-lines file `<dir>/<run_id>.jsonl`. Every record carries a
/// `kind` and `schema_version`. A final line without a newline is a write that
/// was cut short; it is truncated on open.
class RunStore {
 public:
  RunStore(const std::string& dir, const std::string& run_id);

  const std::vector<nlohmann::json>& records() const { return records_; }
  const std::string& path() const { return path_; }
  std::size_t truncated_bytes() const { return truncated_bytes_; }

  /// Adds `schema_version`, writes one line and flushes. Thread-safe.
  void append(nlohmann::json record);

 private:
  std::string path_;
  std::vector<nlohmann::json> records_;
  std::size_t truncated_bytes_ = 0;
  std::mutex mu_;
  std::ofstream out_;
};

nlohmann::json explanation_to_json(const ExplanationRecord& r);
ExplanationRecord explanation_from_json(const nlohmann::json& j);

/// Result of generating counterfactuals for one explanation and one group.
struct CounterfactualSet {
  std::string parent_key;
  std::string group;
  std::vector<CounterfactualRecord> counterfactuals;
  int generated = 0;  // completions requested
  std::map<std::string, int> parse_failures;  // per generator
  int duplicates = 0;
  int dropped_original = 0;
  std::vector<std::string> failed_generators;
};

nlohmann::json counterfactual_set_to_json(const CounterfactualSet& s);
CounterfactualSet counterfactual_set_from_json(const nlohmann::json& j);

std::string counterfactual_set_key(const std::string& parent_key, const std::string& group);

/// Everything a run store says, folded into current state. Later records for
/// the same explanation, set or counterfactual are ignored.
struct RunState {
  std::optional<nlohmann::json> header;
  std::map<std::string, ExplanationRecord> explanations;
  std::map<std::string, nlohmann::json> explanation_extras;  // answer_completion etc.
  std::map<std::string, CounterfactualSet> counterfactual_sets;
  std::vector<CounterfactualRecord> counterfactuals;  // store order
  std::map<std::string, std::size_t> counterfactual_index;
  std::map<std::string, std::vector<std::size_t>> counterfactuals_by_parent;
  std::set<std::string> stages_complete;  // "<scope>:<stage>"
  std::map<std::string, nlohmann::json> analyses;  // latest record per analysis kind

  static RunState from_records(const std::vector<nlohmann::json>& records);
  void apply(const nlohmann::json& record);

  const ExplanationRecord* explanation(const std::string& key) const;
  const CounterfactualRecord* counterfactual(const std::string& id) const;
  std::vector<const CounterfactualRecord*> counterfactuals_of(const std::string& parent_key) const;
  bool stage_complete(const std::string& scope, const std::string& stage) const;
};

}  // namespace cfsim::pipeline
