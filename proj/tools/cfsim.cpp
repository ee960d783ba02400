// Command-line front end: run stages, emit reports, analyses and the
// annotation server.
#include <csignal>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfsim/annotation/run_tasks.hpp"
#include "cfsim/annotation/server.hpp"
#include "cfsim/annotation/service.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/pipeline/pipeline.hpp"
#include "cfsim/pipeline/report.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace cfsim;

constexpr int kRetriableExit = 3;

cfsim::annotation::AnnotationServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

int serve(const std::string& config_path) {
  auto j = json::parse(read_file(config_path));
  auto base = fs::absolute(config_path).parent_path();

  annotation::ServiceConfig svc;
  svc.redundancy = j.value("redundancy", svc.redundancy);
  svc.ttl = std::chrono::seconds(j.value("ttl_minutes", 30) * 60);
  svc.log_path = resolve(base, j.value("log", "annotations.log.jsonl"));

  auto qualification = j.contains("qualification_path")
                           ? annotation::QualificationSet::from_file(
                                 resolve(base, j["qualification_path"].get<std::string>()))
                           : annotation::QualificationSet::bundled();
  qualification.pass_threshold = j.value("pass_threshold", qualification.pass_threshold);

  auto tasks = annotation::load_tasks_file(resolve(base, j.at("tasks").get<std::string>()));
  annotation::AnnotationService service(svc, std::move(tasks), std::move(qualification));

  annotation::ServerConfig server_cfg;
  server_cfg.host = j.value("host", server_cfg.host);
  server_cfg.port = j.value("port", server_cfg.port);
  server_cfg.static_dir = resolve(base, j.value("static_dir", ""));
  server_cfg.secret_env_var = j.value("secret_env_var", "");
  annotation::AnnotationServer server(service, server_cfg);
  auto port = server.start();
  std::cerr << "annotation server listening on " << server_cfg.host << ":" << port << "\n";
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.wait();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual simulatability of natural language explanations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string stage = "all";
  std::string run_id;
  std::string store_dir = "runs";
  std::string format = "table";
  std::string export_path;
  std::string out_path;
  bool no_plausibility = false;

  auto* run = app.add_subcommand("run", "Run pipeline stages");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--stage", stage, "Stage to run")
      ->check(CLI::IsMember({"explanations", "counterfactuals", "simulate", "outputs", "all"}));

  auto* report = app.add_subcommand("report", "Emit the metric report of a completed run");
  report->add_option("--run", run_id, "Run id")->required();
  report->add_option("--store-dir", store_dir, "Run store directory");
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

  auto* sanity = app.add_subcommand("sanity", "Sanity checks");
  sanity->require_subcommand(1);
  auto* forced = sanity->add_subcommand("forced", "Normal post-hoc vs Forced comparison");
  forced->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

  auto* iaa = app.add_subcommand("iaa", "Inter-annotator agreement against a human export");
  iaa->add_option("--run", run_id, "Run id")->required();
  iaa->add_option("--store-dir", store_dir, "Run store directory");
  iaa->add_option("--human-export", export_path, "Annotation export (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* correlate = app.add_subcommand("correlate", "Precision-plausibility correlation");
  correlate->add_option("--run", run_id, "Run id")->required();
  correlate->add_option("--store-dir", store_dir, "Run store directory");
  correlate->add_option("--plausibility", export_path, "Annotation export with plausibility labels")
      ->required()
      ->check(CLI::ExistingFile);

  auto* tasks = app.add_subcommand("tasks", "Write annotation tasks for a run");
  tasks->add_option("--run", run_id, "Run id")->required();
  tasks->add_option("--store-dir", store_dir, "Run store directory");
  tasks->add_option("--out", out_path, "Tasks file to write")->required();
  tasks->add_flag("--no-plausibility", no_plausibility, "Only simulation tasks");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the annotation API and UI");
  serve_cmd->add_option("--config", config_path, "Annotation server configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      pipeline::Pipeline p(pipeline::RunConfig::load(config_path));
      std::vector<pipeline::StageReport> reports;
      if (stage == "all") {
        reports = p.run_all();
      } else {
        reports.push_back(p.run_stage(stage));
      }
      json out = json::array();
      bool ok = true;
      for (const auto& r : reports) {
        out.push_back(r.to_json());
        ok = ok && r.ok();
      }
      std::cout << out.dump(2) << "\n";
      return ok ? 0 : kRetriableExit;
    }
    if (*report) {
      auto r = pipeline::emit_report(store_dir, run_id);
      std::cout << (format == "json" ? r.dump(2) + "\n" : pipeline::render_report_table(r));
      return 0;
    }
    if (*forced) {
      pipeline::Pipeline p(pipeline::RunConfig::load(config_path));
      std::cout << p.forced_sanity_check().to_json().dump(2) << "\n";
      return 0;
    }
    if (*iaa) {
      auto p = pipeline::Pipeline::open_run(store_dir, run_id);
      auto lines = pipeline::read_annotation_export(export_path);
      std::cout << p.iaa(lines).to_json().dump(2) << "\n";
      return 0;
    }
    if (*correlate) {
      auto p = pipeline::Pipeline::open_run(store_dir, run_id);
      auto lines = pipeline::read_annotation_export(export_path);
      std::cout << p.correlate(lines).to_json().dump(2) << "\n";
      return 0;
    }
    if (*tasks) {
      auto p = pipeline::Pipeline::open_run(store_dir, run_id);
      auto t = annotation::tasks_from_run(p, !no_plausibility);
      annotation::write_tasks_file(out_path, t);
      std::cout << "wrote " << t.size() << " tasks to " << out_path << "\n";
      return 0;
    }
    if (*serve_cmd) return serve(config_path);
  } catch (const pipeline::IncompleteRun& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
