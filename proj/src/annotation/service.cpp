#include "cfsim/annotation/service.hpp"

#include <algorithm>
#include <ctime>
#include <filesystem>

#include "cfsim/core/bundled_data.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim::annotation {
namespace {

using nlohmann::json;
using SysClock = std::chrono::system_clock;

std::string qualification_task_id(const std::string& item_id) { return "qual:" + item_id; }

}  // namespace

std::string_view to_string(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::Simulation: return "simulation";
    case AnnotationKind::Plausibility: return "plausibility";
    case AnnotationKind::Qualification: return "qualification";
  }
  return "?";
}

AnnotationKind annotation_kind_from_string(std::string_view s) {
  if (s == "simulation") return AnnotationKind::Simulation;
  if (s == "plausibility") return AnnotationKind::Plausibility;
  if (s == "qualification") return AnnotationKind::Qualification;
  throw AnnotationError("unknown annotation kind: " + std::string(s));
}

std::string_view to_string(AssignmentState state) {
  switch (state) {
    case AssignmentState::Pending: return "pending";
    case AssignmentState::Submitted: return "submitted";
    case AssignmentState::Expired: return "expired";
  }
  return "?";
}

std::string iso8601(SysClock::time_point t) {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

SysClock::time_point parse_iso8601(const std::string& s) {
  std::tm tm{};
  int ms = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms) < 6) {
    throw AnnotationError("bad timestamp: " + s);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return SysClock::from_time_t(timegm(&tm)) + std::chrono::milliseconds(ms);
}

json AnnotationTask::to_json() const {
  return {{"task_id", task_id},
          {"kind", std::string(annotation::to_string(kind))},
          {"ref", ref},
          {"run_id", run_id},
          {"task_kind", std::string(cfsim::to_string(task_kind))},
          {"payload", payload}};
}

AnnotationTask AnnotationTask::from_json(const json& j) {
  AnnotationTask t;
  t.task_id = j.at("task_id").get<std::string>();
  t.kind = annotation_kind_from_string(j.at("kind").get<std::string>());
  t.ref = j.value("ref", "");
  t.run_id = j.value("run_id", "");
  t.task_kind = task_kind_from_string(j.value("task_kind", "yes_no_qa"));
  t.payload = j.value("payload", json::object());
  return t;
}

QualificationSet QualificationSet::parse(const json& j) {
  QualificationSet set;
  set.pass_threshold = j.value("pass_threshold", set.pass_threshold);
  for (const auto& item : j.at("items")) {
    QualificationItem q;
    auto id = item.at("id").get<std::string>();
    q.task.task_id = qualification_task_id(id);
    q.task.kind = AnnotationKind::Qualification;
    q.task.ref = id;
    q.task.task_kind = TaskKind::YesNoQA;
    q.task.payload = {{"starter", {{"question", item.at("starter")}}},
                      {"explanation", item.at("explanation")},
                      {"output", item.at("output")},
                      {"counterfactual", {{"question", item.at("follow_up")}}}};
    q.answer = SimulationJudgment::from_string(item.at("answer").get<std::string>()).to_string();
    set.items.push_back(std::move(q));
  }
  if (set.pass_threshold > static_cast<int>(set.items.size())) {
    throw AnnotationError("pass threshold exceeds the number of qualification items");
  }
  return set;
}

QualificationSet QualificationSet::bundled() {
  return parse(json::parse(bundled_files().at("qualification.json")));
}

QualificationSet QualificationSet::from_file(const std::string& path) {
  return parse(json::parse(read_file(path)));
}

json WorkerProfile::to_json() const {
  return {{"worker_id", worker_id},
          {"qualified", qualified},
          {"blocked", blocked},
          {"score", score},
          {"answered", answered},
          {"total", total}};
}

AnnotationService::AnnotationService(ServiceConfig config, std::vector<AnnotationTask> tasks,
                                     QualificationSet qualification, Clock clock)
    : config_(std::move(config)),
      tasks_(std::move(tasks)),
      qualification_(std::move(qualification)),
      clock_(std::move(clock)) {
  if (config_.redundancy < 1) throw AnnotationError("redundancy must be at least 1");
  for (std::size_t i = 0; i < qualification_.items.size(); ++i) {
    qualification_index_[qualification_.items[i].task.task_id] = i;
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    const auto& id = tasks_[i].task_id;
    if (tasks_[i].kind == AnnotationKind::Qualification) {
      throw AnnotationError("task " + id + ": qualification items come from the qualification set");
    }
    if (qualification_index_.count(id) || !task_index_.emplace(id, i).second) {
      throw AnnotationError("duplicate task id " + id);
    }
  }
  if (!config_.log_path.empty()) {
    if (std::filesystem::exists(config_.log_path)) replay(config_.log_path);
    log_.open(config_.log_path, std::ios::app | std::ios::binary);
    if (!log_) throw AnnotationError("cannot open judgment log " + config_.log_path);
  }
}

const AnnotationTask* AnnotationService::task(const std::string& task_id) const {
  if (auto it = task_index_.find(task_id); it != task_index_.end()) return &tasks_[it->second];
  if (auto it = qualification_index_.find(task_id); it != qualification_index_.end()) {
    return &qualification_.items[it->second].task;
  }
  return nullptr;
}

AnnotationService::Worker& AnnotationService::worker_locked(const std::string& worker_id) {
  if (trim(worker_id).empty()) throw AnnotationError("worker id must not be empty");
  auto [it, inserted] = workers_.try_emplace(worker_id);
  if (inserted) {
    it->second.profile.worker_id = worker_id;
    it->second.profile.total = static_cast<int>(qualification_.items.size());
    it->second.profile.qualified = qualification_.items.empty();
  }
  return it->second;
}

void AnnotationService::log(const json& event) {
  if (!log_.is_open()) return;
  log_ << event.dump() << "\n";
  log_.flush();
}

void AnnotationService::replay(const std::string& path) {
  auto content = read_file(path);
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json e;
    try {
      e = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      // A final line cut short by a crash carries no committed event.
      if (i + 1 == lines.size()) break;
      throw AnnotationError(path + ": corrupt line " + std::to_string(i + 1));
    }
    auto kind = e.at("event").get<std::string>();
    auto task_id = e.at("task_id").get<std::string>();
    auto worker_id = e.at("worker_id").get<std::string>();
    if (!task(task_id)) throw AnnotationError(path + ": event for unknown task " + task_id);
    if (kind == "assign") {
      apply_assign(task_id, worker_id, parse_iso8601(e.at("at").get<std::string>()));
    } else if (kind == "submit") {
      apply_submit(task_id, worker_id, e.at("label"), parse_iso8601(e.at("at").get<std::string>()));
    } else if (kind == "expire") {
      auto it = assignments_.find({task_id, worker_id});
      if (it != assignments_.end()) it->second.state = AssignmentState::Expired;
    }
  }
}

void AnnotationService::apply_assign(const std::string& task_id, const std::string& worker_id,
                                     SysClock::time_point at) {
  worker_locked(worker_id);
  Assignment a;
  a.task_id = task_id;
  a.worker_id = worker_id;
  a.reserved_at = at;
  auto [it, inserted] = assignments_.insert_or_assign({task_id, worker_id}, a);
  if (inserted) assigned_workers_[task_id].push_back(worker_id);
}

void AnnotationService::apply_submit(const std::string& task_id, const std::string& worker_id,
                                     const json& label, SysClock::time_point at) {
  auto& a = assignments_.at({task_id, worker_id});
  a.state = AssignmentState::Submitted;
  a.label = label;
  a.submitted_at = at;
  auto q = qualification_index_.find(task_id);
  if (q == qualification_index_.end()) return;
  auto& w = worker_locked(worker_id);
  if (!w.exam_answers.emplace(task_id, label.get<std::string>()).second) return;
  ++w.profile.answered;
  if (label.get<std::string>() == qualification_.items[q->second].answer) ++w.profile.score;
  if (w.profile.answered == w.profile.total) {
    w.profile.qualified = w.profile.score >= qualification_.pass_threshold;
    w.profile.blocked = !w.profile.qualified;
  }
}

void AnnotationService::expire_locked(SysClock::time_point now) {
  for (auto& [key, a] : assignments_) {
    if (a.state != AssignmentState::Pending || now < a.reserved_at + config_.ttl) continue;
    a.state = AssignmentState::Expired;
    log({{"event", "expire"}, {"task_id", a.task_id}, {"worker_id", a.worker_id}});
  }
}

int AnnotationService::live_assignments(const std::string& task_id) const {
  auto it = assigned_workers_.find(task_id);
  if (it == assigned_workers_.end()) return 0;
  int live = 0;
  for (const auto& w : it->second) {
    if (assignments_.at({task_id, w}).state != AssignmentState::Expired) ++live;
  }
  return live;
}

AnnotationTask AnnotationService::next_task(const std::string& worker_id) {
  std::lock_guard lock(mu_);
  auto now = clock_();
  expire_locked(now);
  auto& w = worker_locked(worker_id);

  auto reserve = [&](const AnnotationTask& t) {
    apply_assign(t.task_id, worker_id, now);
    log({{"event", "assign"}, {"task_id", t.task_id}, {"worker_id", worker_id}, {"at", iso8601(now)}});
    return t;
  };

  if (!w.profile.qualified) {
    if (w.profile.blocked) throw NoWork("worker " + worker_id + " did not pass the qualification");
    for (const auto& item : qualification_.items) {
      if (w.exam_answers.count(item.task.task_id)) continue;
      auto it = assignments_.find({item.task.task_id, worker_id});
      if (it != assignments_.end() && it->second.state == AssignmentState::Pending) return item.task;
      return reserve(item.task);
    }
    throw NoWork("qualification pending");
  }

  for (const auto& t : tasks_) {
    auto it = assignments_.find({t.task_id, worker_id});
    if (it != assignments_.end() && it->second.state == AssignmentState::Pending) return t;
  }
  for (const auto& t : tasks_) {
    if (assignments_.count({t.task_id, worker_id})) continue;
    if (live_assignments(t.task_id) >= config_.redundancy) continue;
    return reserve(t);
  }
  throw NoWork("no open task for worker " + worker_id);
}

json AnnotationService::normalize_label(const AnnotationTask& t, const json& label) const {
  if (t.kind == AnnotationKind::Plausibility) {
    if (!label.is_number_integer()) throw BadLabelShape("plausibility label must be an integer");
    auto v = label.get<long long>();
    if (v < 1 || v > 5) throw BadLabelShape("plausibility label must be between 1 and 5");
    return v;
  }
  if (!label.is_string()) throw BadLabelShape("simulation label must be a string");
  std::optional<SimulationJudgment> j;
  try {
    j = SimulationJudgment::from_string(label.get<std::string>());
  } catch (const Error&) {
    throw BadLabelShape("unknown simulation label '" + label.get<std::string>() + "'");
  }
  if (j->label() && !label_valid_for(*j->label(), t.task_kind)) {
    throw BadLabelShape("label '" + label.get<std::string>() + "' does not fit task " + t.task_id);
  }
  return j->to_string();
}

void AnnotationService::submit(const std::string& worker_id, const std::string& task_id,
                               const json& label) {
  std::lock_guard lock(mu_);
  auto now = clock_();
  expire_locked(now);
  const auto* t = task(task_id);
  if (!t) throw NotAssigned("unknown task " + task_id);
  auto it = assignments_.find({task_id, worker_id});
  if (it == assignments_.end()) throw NotAssigned(task_id + " is not assigned to " + worker_id);
  if (it->second.state == AssignmentState::Submitted) {
    throw AlreadySubmitted(worker_id + " already submitted " + task_id);
  }
  if (it->second.state == AssignmentState::Expired) {
    throw NotAssigned("reservation of " + task_id + " by " + worker_id + " expired");
  }
  auto normalized = normalize_label(*t, label);
  apply_submit(task_id, worker_id, normalized, now);
  log({{"event", "submit"},
       {"task_id", task_id},
       {"worker_id", worker_id},
       {"label", normalized},
       {"at", iso8601(now)}});
}

std::string AnnotationService::export_judgments(const std::string& run_id) {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [key, a] : assignments_) {
    if (a.state != AssignmentState::Submitted) continue;
    const auto* t = task(a.task_id);
    if (t->kind == AnnotationKind::Qualification) continue;
    if (!run_id.empty() && t->run_id != run_id) continue;
    json line = {{"task_id", a.task_id},
                 {"kind", std::string(to_string(t->kind))},
                 {"ref", t->ref},
                 {"worker_id", a.worker_id},
                 {"label", *a.label},
                 {"timestamp", iso8601(*a.submitted_at)}};
    out += line.dump() + "\n";
  }
  return out;
}

json AnnotationService::progress() {
  std::lock_guard lock(mu_);
  expire_locked(clock_());
  std::map<std::string, int> states = {{"pending", 0}, {"submitted", 0}, {"expired", 0}};
  std::map<std::string, int> submitted_per_task;
  for (const auto& [key, a] : assignments_) {
    if (qualification_index_.count(a.task_id)) continue;
    ++states[std::string(to_string(a.state))];
    if (a.state == AssignmentState::Submitted) ++submitted_per_task[a.task_id];
  }
  int complete = 0;
  for (const auto& [id, n] : submitted_per_task) {
    if (n >= config_.redundancy) ++complete;
  }
  int qualified = 0;
  int blocked = 0;
  for (const auto& [id, w] : workers_) {
    qualified += w.profile.qualified ? 1 : 0;
    blocked += w.profile.blocked ? 1 : 0;
  }
  return {{"tasks", tasks_.size()},
          {"tasks_complete", complete},
          {"redundancy", config_.redundancy},
          {"assignments", states},
          {"workers", {{"total", workers_.size()}, {"qualified", qualified}, {"blocked", blocked}}}};
}

WorkerProfile AnnotationService::worker(const std::string& worker_id) {
  std::lock_guard lock(mu_);
  return worker_locked(worker_id).profile;
}

}  // namespace cfsim::annotation
