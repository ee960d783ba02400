#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "cfsim/annotation/run_tasks.hpp"
#include "cfsim/annotation/server.hpp"
#include "cfsim/annotation/service.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/pipeline/pipeline.hpp"
#include "test_util.hpp"

using namespace cfsim;
using namespace cfsim::annotation;
using cfsim::testing::fixture;
using cfsim::testing::TempDir;
using nlohmann::json;

namespace {

using SysClock = std::chrono::system_clock;

QualificationSet no_exam() { return QualificationSet::parse({{"items", json::array()}, {"pass_threshold", 0}}); }

AnnotationTask sim_task(const std::string& id, const std::string& run = "r") {
  return {id, AnnotationKind::Simulation, "ref-" + id, run, TaskKind::YesNoQA, json::object()};
}

std::vector<AnnotationTask> sim_tasks(int n) {
  std::vector<AnnotationTask> out;
  for (int i = 0; i < n; ++i) out.push_back(sim_task("t" + std::to_string(i)));
  return out;
}

// Answers the exam, getting the first `correct` items right.
void take_exam(AnnotationService& s, const std::string& worker, int correct) {
  const auto& items = s.qualification().items;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto t = s.next_task(worker);
    ASSERT_EQ(t.kind, AnnotationKind::Qualification);
    std::string answer;
    for (const auto& item : items) {
      if (item.task.task_id == t.task_id) answer = item.answer;
    }
    std::string wrong = answer == "yes" ? "no" : "yes";
    s.submit(worker, t.task_id, static_cast<int>(i) < correct ? answer : wrong);
  }
}

struct ManualClock {
  SysClock::time_point now = SysClock::from_time_t(1767225600);  // 2026-01-01
  AnnotationService::Clock fn() {
    return [this] { return now; };
  }
};

}  // namespace

TEST(Qualification, BundledExamThreshold) {
  auto q = QualificationSet::bundled();
  EXPECT_EQ(q.items.size(), 11u);
  EXPECT_EQ(q.pass_threshold, 9);
}

TEST(Qualification, EightCorrectBlocksNineQualifies) {
  AnnotationService s({}, sim_tasks(1));
  take_exam(s, "low", 8);
  EXPECT_TRUE(s.worker("low").blocked);
  EXPECT_FALSE(s.worker("low").qualified);
  EXPECT_EQ(s.worker("low").score, 8);
  EXPECT_THROW(s.next_task("low"), NoWork);

  take_exam(s, "ok", 9);
  EXPECT_TRUE(s.worker("ok").qualified);
  EXPECT_EQ(s.next_task("ok").task_id, "t0");
}

TEST(Qualification, ExamAnswersAreNotExported) {
  AnnotationService s({}, sim_tasks(1));
  take_exam(s, "w", 11);
  EXPECT_EQ(s.export_judgments(), "");
}

TEST(Assignment, RedundancyCapAndNoRepeat) {
  AnnotationService s({3}, sim_tasks(2), no_exam());
  for (auto w : {"a", "b", "c"}) {
    auto t = s.next_task(w);
    EXPECT_EQ(t.task_id, "t0");
    s.submit(w, t.task_id, "yes");
  }
  EXPECT_EQ(s.next_task("d").task_id, "t1");
  auto again = s.next_task("a");
  EXPECT_EQ(again.task_id, "t1");
  s.submit("a", "t1", "no");
  EXPECT_THROW(s.next_task("a"), NoWork);
}

TEST(Assignment, LiveReservationIsReturnedAgain) {
  AnnotationService s({2}, sim_tasks(3), no_exam());
  EXPECT_EQ(s.next_task("a").task_id, "t0");
  EXPECT_EQ(s.next_task("a").task_id, "t0");
  EXPECT_EQ(s.next_task("b").task_id, "t0");
  EXPECT_EQ(s.next_task("c").task_id, "t1");
}

TEST(Assignment, ExpiredReservationFreesTheSlot) {
  ManualClock clock;
  AnnotationService s({1, std::chrono::seconds(60)}, sim_tasks(1), no_exam(), clock.fn());
  EXPECT_EQ(s.next_task("a").task_id, "t0");
  EXPECT_THROW(s.next_task("b"), NoWork);
  clock.now += std::chrono::seconds(61);
  EXPECT_EQ(s.next_task("b").task_id, "t0");
  EXPECT_THROW(s.submit("a", "t0", "yes"), NotAssigned);
  s.submit("b", "t0", "yes");
  EXPECT_EQ(s.progress()["assignments"]["expired"], 1);
}

TEST(Assignment, SubmitErrors) {
  AnnotationService s({3}, {sim_task("t0"),
                            {"p0", AnnotationKind::Plausibility, "x::s", "r", TaskKind::YesNoQA, {}},
                            {"s0", AnnotationKind::Simulation, "c", "r",
                             TaskKind::PairwisePreference, {}}},
                      no_exam());
  EXPECT_THROW(s.submit("a", "t0", "yes"), NotAssigned);
  EXPECT_THROW(s.submit("a", "nope", "yes"), NotAssigned);
  s.next_task("a");
  EXPECT_THROW(s.submit("a", "t0", "maybe"), BadLabelShape);
  EXPECT_THROW(s.submit("a", "t0", 3), BadLabelShape);
  EXPECT_THROW(s.submit("a", "t0", "response1"), BadLabelShape);
  s.submit("a", "t0", "cannot_tell");
  EXPECT_THROW(s.submit("a", "t0", "yes"), AlreadySubmitted);

  EXPECT_EQ(s.next_task("a").task_id, "p0");
  EXPECT_THROW(s.submit("a", "p0", 6), BadLabelShape);
  EXPECT_THROW(s.submit("a", "p0", "3"), BadLabelShape);
  s.submit("a", "p0", 4);
  EXPECT_EQ(s.next_task("a").task_id, "s0");
  EXPECT_THROW(s.submit("a", "s0", "no"), BadLabelShape);
  s.submit("a", "s0", "response2");
}

TEST(Assignment, ConcurrentWorkersRespectCaps) {
  constexpr int kTasks = 20;
  AnnotationService s({3}, sim_tasks(kTasks), no_exam());
  std::vector<std::thread> threads;
  for (int w = 0; w < 10; ++w) {
    threads.emplace_back([&s, w] {
      auto id = "w" + std::to_string(w);
      for (;;) {
        AnnotationTask t;
        try {
          t = s.next_task(id);
        } catch (const NoWork&) {
          return;
        }
        s.submit(id, t.task_id, w % 2 ? "yes" : "no");
      }
    });
  }
  for (auto& t : threads) t.join();

  std::map<std::string, int> per_task;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& line : split_lines(s.export_judgments())) {
    if (line.empty()) continue;
    auto j = json::parse(line);
    auto task = j["task_id"].get<std::string>();
    ++per_task[task];
    EXPECT_TRUE(pairs.insert({task, j["worker_id"].get<std::string>()}).second);
  }
  EXPECT_EQ(per_task.size(), static_cast<std::size_t>(kTasks));
  for (const auto& [task, n] : per_task) EXPECT_EQ(n, 3) << task;
}

TEST(Export, SortedAndDeterministic) {
  ManualClock clock;
  AnnotationService s({3}, {sim_task("b"), sim_task("a"), sim_task("x", "other")}, no_exam(),
                      clock.fn());
  for (auto w : {"w2", "w1"}) {
    for (int i = 0; i < 3; ++i) {
      auto t = s.next_task(w);
      s.submit(w, t.task_id, "yes");
    }
  }
  auto out = s.export_judgments("r");
  EXPECT_EQ(out, s.export_judgments("r"));
  std::vector<std::string> lines;
  for (const auto& l : split_lines(out)) {
    if (!l.empty()) lines.push_back(l);
  }
  ASSERT_EQ(lines.size(), 4u);
  std::vector<std::string> order;
  for (std::size_t i = 0; i < 4; ++i) {
    auto j = json::parse(lines[i]);
    order.push_back(j["task_id"].get<std::string>() + "/" + j["worker_id"].get<std::string>());
    EXPECT_EQ(j["timestamp"], "2026-01-01T00:00:00.000Z");
    EXPECT_EQ(j["kind"], "simulation");
    EXPECT_EQ(j["ref"], "ref-" + j["task_id"].get<std::string>());
  }
  EXPECT_EQ(order, (std::vector<std::string>{"a/w1", "a/w2", "b/w1", "b/w2"}));
  EXPECT_EQ(s.export_judgments().size(), out.size() + s.export_judgments("other").size());
}

TEST(Export, TimestampFormat) {
  auto t = SysClock::from_time_t(1767225600) + std::chrono::milliseconds(42);
  EXPECT_EQ(iso8601(t), "2026-01-01T00:00:00.042Z");
  EXPECT_EQ(parse_iso8601(iso8601(t)), t);
}

TEST(Log, ReplayRestoresState) {
  TempDir dir;
  ServiceConfig config{2, std::chrono::seconds(1800), dir.file("log.jsonl")};
  std::string before;
  {
    AnnotationService s(config, sim_tasks(3));
    take_exam(s, "q", 9);
    s.submit("q", s.next_task("q").task_id, "yes");
    s.next_task("q");
    before = s.export_judgments();
  }
  std::ofstream(dir.file("log.jsonl"), std::ios::app) << "{\"event\":\"sub";
  AnnotationService s(config, sim_tasks(3));
  EXPECT_EQ(s.export_judgments(), before);
  EXPECT_TRUE(s.worker("q").qualified);
  EXPECT_EQ(s.next_task("q").task_id, "t1");
}

TEST(Server, EndpointsAndSecret) {
  ::setenv("CFSIM_TEST_SECRET", "s3cret", 1);
  AnnotationService s({3}, sim_tasks(1), no_exam());
  AnnotationServer server(s, {"127.0.0.1", 0, "", "CFSIM_TEST_SECRET"});
  int port = server.start();
  httplib::Client c("127.0.0.1", port);
  httplib::Headers auth = {{"X-Annotation-Secret", "s3cret"}};

  auto denied = c.Get("/api/tasks/next?worker=a");
  ASSERT_TRUE(denied);
  EXPECT_EQ(denied->status, 401);
  auto wrong = c.Get("/api/progress", httplib::Headers{{"X-Annotation-Secret", "nope"}});
  ASSERT_TRUE(wrong);
  EXPECT_EQ(wrong->status, 401);

  auto next = c.Get("/api/tasks/next?worker=a", auth);
  ASSERT_TRUE(next);
  EXPECT_EQ(next->status, 200);
  auto body = json::parse(next->body);
  EXPECT_EQ(body["status"], "ok");
  EXPECT_EQ(body["task"]["task_id"], "t0");

  auto missing_worker = c.Get("/api/tasks/next", auth);
  EXPECT_EQ(missing_worker->status, 400);

  auto post = [&](const json& j) {
    return c.Post("/api/judgments", auth, j.dump(), "application/json");
  };
  EXPECT_EQ(post({{"worker", "a"}, {"task_id", "t0"}, {"label", "maybe"}})->status, 400);
  EXPECT_EQ(post({{"worker", "b"}, {"task_id", "t0"}, {"label", "yes"}})->status, 409);
  EXPECT_EQ(post({{"worker", "a"}})->status, 400);
  EXPECT_EQ(c.Post("/api/judgments", auth, "{", "application/json")->status, 400);
  EXPECT_EQ(post({{"worker", "a"}, {"task_id", "t0"}, {"label", "yes"}})->status, 200);
  auto dup = post({{"worker", "a"}, {"task_id", "t0"}, {"label", "yes"}});
  EXPECT_EQ(dup->status, 409);
  EXPECT_EQ(json::parse(dup->body)["error"], "already_submitted");

  auto none = c.Get("/api/tasks/next?worker=a", auth);
  EXPECT_EQ(json::parse(none->body)["status"], "no_work");

  auto exported = c.Get("/api/export?run=r", auth);
  ASSERT_TRUE(exported);
  EXPECT_EQ(exported->body, s.export_judgments("r"));
  auto instructions = c.Get("/api/instructions", auth);
  EXPECT_EQ(instructions->status, 200);
  EXPECT_TRUE(json::parse(instructions->body).is_object());
  EXPECT_EQ(c.Get("/api/progress", auth)->status, 200);
  server.stop();
}

TEST(RunTasks, PayloadsOmitCounterfactualOutputs) {
  TempDir store;
  auto config = pipeline::RunConfig::load(fixture("golden_run/config.json"));
  config.store_dir = store.str();
  pipeline::Pipeline p(config);
  p.run_all();
  auto tasks = tasks_from_run(p);
  ASSERT_EQ(tasks.size(), 12u);
  EXPECT_EQ(tasks[0].task_id, "sim:cf:sqa-1:explainer/cot:gen:0");
  EXPECT_EQ(tasks[0].payload["starter"]["question"], "Can eagles fly?");
  EXPECT_EQ(tasks[0].payload["counterfactual"]["question"], "Can penguins fly?");
  EXPECT_EQ(tasks[0].payload["output"], "yes");
  for (const auto& t : tasks) {
    std::set<std::string> keys;
    for (const auto& [k, v] : t.payload.items()) keys.insert(k);
    if (t.kind == AnnotationKind::Simulation) {
      EXPECT_EQ(keys, (std::set<std::string>{"starter", "explanation", "output", "counterfactual"}));
    } else {
      EXPECT_EQ(keys, (std::set<std::string>{"input", "explanation", "output"}));
    }
  }
  EXPECT_EQ(tasks.back().task_id, "plaus:sqa-2::explainer/cot");

  TempDir dir;
  write_tasks_file(dir.file("tasks.json"), tasks);
  auto loaded = load_tasks_file(dir.file("tasks.json"));
  ASSERT_EQ(loaded.size(), tasks.size());
  EXPECT_EQ(loaded[3].to_json(), tasks[3].to_json());
}

TEST(RunTasks, ExportFeedsHumanSimulation) {
  TempDir store;
  auto config = pipeline::RunConfig::load(fixture("golden_run/config.json"));
  config.store_dir = store.str();
  pipeline::Pipeline llm(config);
  llm.run_all();

  AnnotationService s({3}, tasks_from_run(llm, false), no_exam());
  // Labels of w1, w2, w3 on the five sqa-1 counterfactuals.
  const std::map<int, std::vector<std::string>> votes = {
      {0, {"yes", "yes", "yes"}},
      {1, {"no", "no", "yes"}},
      {2, {"cannot_tell", "cannot_tell", "yes"}},
      {3, {"yes", "yes", "no"}},
      {4, {"yes", "yes", "no"}}};
  const std::string prefix = "cf:sqa-1:explainer/cot:gen:";
  for (int w = 0; w < 3; ++w) {
    auto id = "w" + std::to_string(w + 1);
    for (;;) {
      auto t = s.next_task(id);
      if (t.ref.rfind(prefix, 0) != 0) break;
      int k = std::stoi(t.ref.substr(prefix.size()));
      s.submit(id, t.task_id, votes.at(k)[w]);
    }
  }
  TempDir dir;
  auto export_path = dir.write("export.jsonl", s.export_judgments("golden"));

  auto human = pipeline::RunConfig::load(fixture("golden_run/config_human.json"));
  human.store_dir = store.str();
  human.simulator.export_path = export_path;
  pipeline::Pipeline p(human);
  auto reports = p.run_all();
  ASSERT_EQ(reports.size(), 4u);
  EXPECT_EQ(reports[2].unjudged, 5);
  // Majorities: yes, no, unsimulatable, yes, yes against actual yes, no, -, no, yes.
  auto score = p.score("sqa-1::explainer/cot");
  EXPECT_EQ(*score.precision, 0.75);
  EXPECT_EQ(*score.sim_rate, 0.8);
  EXPECT_EQ(score.counts.unjudged, 0);
  EXPECT_EQ(p.score("sqa-2::explainer/cot").counts.unjudged, 5);
}
