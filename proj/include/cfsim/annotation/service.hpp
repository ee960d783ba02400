#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/core/error.hpp"
#include "cfsim/core/types.hpp"

namespace cfsim::annotation {

class AnnotationError : public Error {
 public:
  using Error::Error;
};

class NoWork : public AnnotationError {
 public:
  using AnnotationError::AnnotationError;
};

class NotAssigned : public AnnotationError {
 public:
  using AnnotationError::AnnotationError;
};

class AlreadySubmitted : public AnnotationError {
 public:
  using AnnotationError::AnnotationError;
};

class BadLabelShape : public AnnotationError {
 public:
  using AnnotationError::AnnotationError;
};

enum class AnnotationKind { Simulation, Plausibility, Qualification };

std::string_view to_string(AnnotationKind kind);
AnnotationKind annotation_kind_from_string(std::string_view s);

struct AnnotationTask {
  std::string task_id;
  AnnotationKind kind = AnnotationKind::Simulation;
  std::string ref;  // counterfactual id or explanation key
  std::string run_id;
  TaskKind task_kind = TaskKind::YesNoQA;
  /// Simulation: starter, explanation, output, counterfactual. Plausibility:
  /// input, explanation, output. Qualification: a simulation item.
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static AnnotationTask from_json(const nlohmann::json& j);
};

struct QualificationItem {
  AnnotationTask task;
  std::string answer;  // a simulation label
};

struct QualificationSet {
  std::vector<QualificationItem> items;
  int pass_threshold = 9;

  static QualificationSet parse(const nlohmann::json& j);
  static QualificationSet bundled();
  static QualificationSet from_file(const std::string& path);
};

enum class AssignmentState { Pending, Submitted, Expired };

std::string_view to_string(AssignmentState state);

struct Assignment {
  std::string task_id;
  std::string worker_id;
  AssignmentState state = AssignmentState::Pending;
  std::optional<nlohmann::json> label;
  std::chrono::system_clock::time_point reserved_at;
  std::optional<std::chrono::system_clock::time_point> submitted_at;
};

struct WorkerProfile {
  std::string worker_id;
  bool qualified = false;
  bool blocked = false;  // finished the exam below the threshold
  int score = 0;         // correct qualification answers
  int answered = 0;
  int total = 0;

  nlohmann::json to_json() const;
};

struct ServiceConfig {
  int redundancy = 3;
  std::chrono::seconds ttl{30 * 60};
  /// Append-only judgment log, replayed on start. Empty: memory only.
  std::string log_path;
};

/// Assigns annotation tasks to workers. Every operation runs under one mutex,
/// so assignment decisions are serialized and log writes come from one place.
class AnnotationService {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  AnnotationService(ServiceConfig config, std::vector<AnnotationTask> tasks,
                    QualificationSet qualification = QualificationSet::bundled(),
                    Clock clock = [] { return std::chrono::system_clock::now(); });

  /// Unqualified workers get the next exam item; qualified workers get the
  /// oldest task with a free slot that they were never assigned. A worker
  /// with a live reservation gets that task again. Throws NoWork.
  AnnotationTask next_task(const std::string& worker_id);

  /// Simulation labels: "yes"/"no" (or "response1"/"response2") and
  /// "cannot_tell". Plausibility labels: integers 1 to 5.
  void submit(const std::string& worker_id, const std::string& task_id,
              const nlohmann::json& label);

  /// JSON lines sorted by (task_id, worker_id), one per submitted simulation
  /// or plausibility label. An empty `run_id` exports every run.
  std::string export_judgments(const std::string& run_id = {});

  nlohmann::json progress();
  WorkerProfile worker(const std::string& worker_id);
  const ServiceConfig& config() const { return config_; }
  const QualificationSet& qualification() const { return qualification_; }

 private:
  struct Worker {
    WorkerProfile profile;
    std::map<std::string, std::string> exam_answers;  // task id -> label
  };

  Worker& worker_locked(const std::string& worker_id);
  const AnnotationTask* task(const std::string& task_id) const;
  void expire_locked(std::chrono::system_clock::time_point now);
  void log(const nlohmann::json& event);
  void replay(const std::string& path);
  void apply_assign(const std::string& task_id, const std::string& worker_id,
                    std::chrono::system_clock::time_point at);
  void apply_submit(const std::string& task_id, const std::string& worker_id,
                    const nlohmann::json& label, std::chrono::system_clock::time_point at);
  nlohmann::json normalize_label(const AnnotationTask& t, const nlohmann::json& label) const;
  int live_assignments(const std::string& task_id) const;

  ServiceConfig config_;
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  QualificationSet qualification_;
  std::map<std::string, std::size_t> qualification_index_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Assignment> assignments_;  // (task, worker)
  std::map<std::string, std::vector<std::string>> assigned_workers_;       // task -> workers
  std::map<std::string, Worker> workers_;
  std::ofstream log_;
};

std::string iso8601(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point parse_iso8601(const std::string& s);

}  // namespace cfsim::annotation
