#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/core/error.hpp"
#include "cfsim/core/types.hpp"

namespace cfsim::tasks {

class DatasetError : public Error {
 public:
  using Error::Error;
};

class MissingField : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class MalformedJson : public DatasetError {
 public:
  MalformedJson(const std::string& what, std::size_t line, std::size_t offset)
      : DatasetError(what), line_(line), offset_(offset) {}
  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

class BadPreferredValue : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class UnknownInstance : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

struct Dataset {
  std::string id;
  TaskKind kind = TaskKind::YesNoQA;
  std::vector<TaskInstance> instances;
  std::vector<std::string> warnings;

  const TaskInstance* find(std::string_view instance_id) const;
  const TaskInstance& at(std::string_view instance_id) const;
};

/// JSON array of objects with `question` (string) and `answer` (bool). The id
/// comes from `qid` or `id` when present, else "strategyqa-<index>".
Dataset parse_strategyqa(std::string_view content, std::string dataset_id = "strategyqa");
Dataset load_strategyqa(const std::string& path);

/// JSON lines with `context`, `response_1`, `response_2` and `preferred` (1 or
/// 2). The id comes from `id` when present, else "shp-<line>".
Dataset parse_shp(std::string_view content, std::string dataset_id = "shp");
Dataset load_shp(const std::string& path);

/// Fraction of records whose output equals the gold label; parse failures
/// count as wrong. 0 for an empty record list.
double task_accuracy(std::span<const ExplanationRecord> records, const Dataset& dataset);

}  // namespace cfsim::tasks
