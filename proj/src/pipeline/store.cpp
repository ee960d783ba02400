#include "cfsim/pipeline/store.hpp"

#include <filesystem>

#include "cfsim/core/text.hpp"

namespace cfsim::pipeline {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json label_or_null(const std::optional<Label>& l) {
  return l ? json(std::string(to_string(*l))) : json(nullptr);
}

std::optional<Label> label_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return label_from_string(j.get<std::string>());
}

}  // namespace

RunStore::RunStore(const std::string& dir, const std::string& run_id) {
  fs::create_directories(dir);
  path_ = (fs::path(dir) / (run_id + ".jsonl")).string();
  if (fs::exists(path_)) {
    auto content = read_file(path_);
    auto complete = content.rfind('\n');
    auto keep = complete == std::string::npos ? 0 : complete + 1;
    if (keep < content.size()) {
      truncated_bytes_ = content.size() - keep;
      fs::resize_file(path_, keep);
      content.resize(keep);
    }
    std::size_t line_no = 0;
    for (const auto& line : split_lines(content)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        records_.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw StoreError(path_ + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw StoreError("cannot open run store " + path_);
}

void RunStore::append(json record) {
  record["schema_version"] = kSchemaVersion;
  auto line = record.dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
  if (!out_) throw StoreError("write failed: " + path_);
  records_.push_back(std::move(record));
}

json explanation_to_json(const ExplanationRecord& r) {
  return {{"kind", "explanation"},
          {"instance_id", r.instance_id},
          {"system_id", r.system_id},
          {"method", std::string(to_string(r.method))},
          {"explanation", r.explanation},
          {"output", label_or_null(r.output)},
          {"raw_completion", r.raw_completion}};
}

ExplanationRecord explanation_from_json(const json& j) {
  ExplanationRecord r;
  r.instance_id = j.at("instance_id").get<std::string>();
  r.system_id = j.at("system_id").get<std::string>();
  r.method = method_from_string(j.at("method").get<std::string>());
  r.explanation = j.value("explanation", "");
  r.output = label_from_json(j.at("output"));
  r.raw_completion = j.value("raw_completion", "");
  return r;
}

std::string counterfactual_set_key(const std::string& parent_key, const std::string& group) {
  return parent_key + "|" + group;
}

json counterfactual_set_to_json(const CounterfactualSet& s) {
  json cfs = json::array();
  for (const auto& c : s.counterfactuals) {
    cfs.push_back({{"id", c.id},
                   {"text", c.text},
                   {"generator_id", c.generator_id},
                   {"sample_index", c.sample_index}});
  }
  return {{"kind", "counterfactual_set"},
          {"parent_key", s.parent_key},
          {"group", s.group},
          {"counterfactuals", cfs},
          {"generated", s.generated},
          {"parse_failures", s.parse_failures},
          {"duplicates", s.duplicates},
          {"dropped_original", s.dropped_original},
          {"failed_generators", s.failed_generators}};
}

CounterfactualSet counterfactual_set_from_json(const json& j) {
  CounterfactualSet s;
  s.parent_key = j.at("parent_key").get<std::string>();
  s.group = j.at("group").get<std::string>();
  s.generated = j.value("generated", 0);
  s.parse_failures = j.value("parse_failures", std::map<std::string, int>{});
  s.duplicates = j.value("duplicates", 0);
  s.dropped_original = j.value("dropped_original", 0);
  s.failed_generators = j.value("failed_generators", std::vector<std::string>{});
  for (const auto& c : j.at("counterfactuals")) {
    CounterfactualRecord r;
    r.id = c.at("id").get<std::string>();
    r.parent_key = s.parent_key;
    r.group = s.group;
    r.text = c.at("text").get<std::string>();
    r.generator_id = c.at("generator_id").get<std::string>();
    r.sample_index = c.at("sample_index").get<int>();
    s.counterfactuals.push_back(std::move(r));
  }
  return s;
}

RunState RunState::from_records(const std::vector<json>& records) {
  RunState state;
  for (const auto& r : records) state.apply(r);
  return state;
}

void RunState::apply(const json& record) {
  auto version = record.value("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    throw StoreError("unsupported schema_version " + std::to_string(version));
  }
  auto kind = record.at("kind").get<std::string>();
  if (kind == "run_header") {
    if (!header) header = record;
  } else if (kind == "explanation") {
    auto r = explanation_from_json(record);
    auto key = r.key();
    if (explanations.emplace(key, std::move(r)).second) {
      explanation_extras[key] = record.value("extra", json::object());
    }
  } else if (kind == "counterfactual_set") {
    auto s = counterfactual_set_from_json(record);
    auto key = counterfactual_set_key(s.parent_key, s.group);
    if (counterfactual_sets.count(key)) return;
    for (const auto& c : s.counterfactuals) {
      if (counterfactual_index.count(c.id)) continue;
      counterfactual_index[c.id] = counterfactuals.size();
      counterfactuals_by_parent[c.parent_key].push_back(counterfactuals.size());
      counterfactuals.push_back(c);
    }
    counterfactual_sets.emplace(key, std::move(s));
  } else if (kind == "judgment") {
    auto it = counterfactual_index.find(record.at("counterfactual_id").get<std::string>());
    if (it == counterfactual_index.end()) throw StoreError("judgment for unknown counterfactual");
    auto& c = counterfactuals[it->second];
    if (c.judgment) return;
    c.judgment = SimulationJudgment::from_string(record.at("judgment").get<std::string>());
    c.judgment_source = judgment_source_from_string(record.at("source").get<std::string>());
    c.simulation_parse_failed = record.value("parse_failed", false);
  } else if (kind == "actual_output") {
    auto it = counterfactual_index.find(record.at("counterfactual_id").get<std::string>());
    if (it == counterfactual_index.end()) throw StoreError("output for unknown counterfactual");
    auto& c = counterfactuals[it->second];
    if (c.actual_output || c.output_parse_failed) return;
    c.actual_output = label_from_json(record.at("output"));
    c.output_parse_failed = record.value("parse_failed", false);
  } else if (kind == "stage_complete") {
    stages_complete.insert(record.at("scope").get<std::string>() + ":" +
                           record.at("stage").get<std::string>());
  } else {
    analyses[kind] = record;
  }
}

const ExplanationRecord* RunState::explanation(const std::string& key) const {
  auto it = explanations.find(key);
  return it == explanations.end() ? nullptr : &it->second;
}

const CounterfactualRecord* RunState::counterfactual(const std::string& id) const {
  auto it = counterfactual_index.find(id);
  return it == counterfactual_index.end() ? nullptr : &counterfactuals[it->second];
}

std::vector<const CounterfactualRecord*> RunState::counterfactuals_of(
    const std::string& parent_key) const {
  std::vector<const CounterfactualRecord*> out;
  auto it = counterfactuals_by_parent.find(parent_key);
  if (it == counterfactuals_by_parent.end()) return out;
  for (auto i : it->second) out.push_back(&counterfactuals[i]);
  return out;
}

bool RunState::stage_complete(const std::string& scope, const std::string& stage) const {
  return stages_complete.count(scope + ":" + stage) != 0;
}

}  // namespace cfsim::pipeline
