#include "cfsim/tasks/dataset.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "cfsim/core/text.hpp"

namespace cfsim::tasks {
namespace {

using nlohmann::json;

// Line (1-based) and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view content, std::size_t offset) {
  offset = std::min(offset, content.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (content[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string required_string(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw MissingField(where + ": missing field '" + field + "'");
  }
  if (!it->is_string()) throw DatasetError(where + ": field '" + field + "' is not a string");
  auto value = trim(it->get<std::string>());
  if (value.empty()) throw DatasetError(where + ": field '" + field + "' is empty");
  return value;
}

std::optional<std::string> optional_id(const json& obj) {
  for (const char* key : {"qid", "id"}) {
    auto it = obj.find(key);
    if (it == obj.end()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return std::nullopt;
}

void add_instance(Dataset& ds, std::set<std::string>& seen, TaskInstance inst) {
  if (!seen.insert(inst.id).second) throw DatasetError("duplicate instance id '" + inst.id + "'");
  ds.instances.push_back(std::move(inst));
}

void warn_if_empty(Dataset& ds) {
  if (ds.instances.empty()) ds.warnings.push_back("dataset '" + ds.id + "' has no instances");
}

}  // namespace

const TaskInstance* Dataset::find(std::string_view instance_id) const {
  for (const auto& inst : instances) {
    if (inst.id == instance_id) return &inst;
  }
  return nullptr;
}

const TaskInstance& Dataset::at(std::string_view instance_id) const {
  const auto* inst = find(instance_id);
  if (!inst) throw UnknownInstance("unknown instance '" + std::string(instance_id) + "'");
  return *inst;
}

Dataset parse_strategyqa(std::string_view content, std::string dataset_id) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    auto offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = locate(content, offset);
    throw MalformedJson("malformed JSON at line " + std::to_string(line) + ", column " +
                            std::to_string(col) + ": " + e.what(),
                        line, offset);
  }
  if (!doc.is_array()) throw MalformedJson("expected a JSON array of questions", 1, 0);

  Dataset ds;
  ds.id = std::move(dataset_id);
  ds.kind = TaskKind::YesNoQA;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    auto where = "item " + std::to_string(i);
    if (!obj.is_object()) throw DatasetError(where + ": not an object");
    auto question = required_string(obj, "question", where);
    auto answer = obj.find("answer");
    if (answer == obj.end() || answer->is_null()) {
      throw MissingField(where + ": missing field 'answer'");
    }
    if (!answer->is_boolean()) throw DatasetError(where + ": field 'answer' is not a boolean");
    TaskInstance inst{optional_id(obj).value_or("strategyqa-" + std::to_string(i)),
                      QuestionInput{question}, answer->get<bool>() ? Label::Yes : Label::No};
    add_instance(ds, seen, std::move(inst));
  }
  warn_if_empty(ds);
  return ds;
}

Dataset load_strategyqa(const std::string& path) { return parse_strategyqa(read_file(path)); }

Dataset parse_shp(std::string_view content, std::string dataset_id) {
  Dataset ds;
  ds.id = std::move(dataset_id);
  ds.kind = TaskKind::PairwisePreference;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t line_start = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    auto offset = line_start;
    line_start += line.size() + 1;
    if (trim(line).empty()) continue;
    auto where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedJson(where + ": malformed JSON: " + e.what(), line_no,
                          offset + (e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!obj.is_object()) throw DatasetError(where + ": not an object");
    PairwiseInput input{required_string(obj, "context", where),
                        required_string(obj, "response_1", where),
                        required_string(obj, "response_2", where)};
    auto pref = obj.find("preferred");
    if (pref == obj.end() || pref->is_null()) {
      throw MissingField(where + ": missing field 'preferred'");
    }
    if (!pref->is_number_integer() || (pref->get<long long>() != 1 && pref->get<long long>() != 2)) {
      throw BadPreferredValue(where + ": 'preferred' must be 1 or 2, got " + pref->dump());
    }
    TaskInstance inst{optional_id(obj).value_or("shp-" + std::to_string(line_no)), input,
                      pref->get<long long>() == 1 ? Label::Response1 : Label::Response2};
    add_instance(ds, seen, std::move(inst));
  }
  warn_if_empty(ds);
  return ds;
}

Dataset load_shp(const std::string& path) { return parse_shp(read_file(path)); }

double task_accuracy(std::span<const ExplanationRecord> records, const Dataset& dataset) {
  if (records.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : records) {
    const auto& inst = dataset.at(r.instance_id);
    if (r.output && *r.output == inst.gold) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

}  // namespace cfsim::tasks
