#include "cfsim/annotation/server.hpp"

#include <cstdlib>
#include <filesystem>

#include <httplib.h>

#include "cfsim/core/bundled_data.hpp"

namespace cfsim::annotation {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"status", "error"}, {"error", code}, {"message", message}});
}

}  // namespace

json bundled_instructions() { return json::parse(bundled_files().at("instructions.json")); }

struct AnnotationServer::Impl {
  AnnotationService& service;
  ServerConfig config;
  json instructions;
  httplib::Server server;
  std::thread thread;
  std::string secret;

  Impl(AnnotationService& s, ServerConfig c, json i)
      : service(s), config(std::move(c)), instructions(std::move(i)) {}

  void routes() {
    if (!config.secret_env_var.empty()) {
      const char* value = std::getenv(config.secret_env_var.c_str());
      if (!value || !*value) {
        throw AnnotationError("shared secret variable " + config.secret_env_var + " is not set");
      }
      secret = value;
    }
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (secret.empty() || req.path.rfind("/api/", 0) != 0) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      if (req.get_header_value("X-Annotation-Secret") != secret) {
        send_error(res, 401, "unauthorized", "missing or wrong X-Annotation-Secret header");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });

    server.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      auto worker = req.get_param_value("worker");
      if (worker.empty()) return send_error(res, 400, "bad_request", "worker parameter is required");
      try {
        auto task = service.next_task(worker);
        send_json(res, 200,
                  {{"status", "ok"}, {"task", task.to_json()}, {"worker", service.worker(worker).to_json()}});
      } catch (const NoWork& e) {
        send_json(res, 200,
                  {{"status", "no_work"}, {"message", e.what()}, {"worker", service.worker(worker).to_json()}});
      } catch (const AnnotationError& e) {
        send_error(res, 400, "bad_request", e.what());
      }
    });

    server.Post("/api/judgments", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        return send_error(res, 400, "bad_request", e.what());
      }
      if (!body.is_object() || !body.contains("worker") || !body.contains("task_id") ||
          !body.contains("label") || !body["worker"].is_string() || !body["task_id"].is_string()) {
        return send_error(res, 400, "bad_request", "expected {worker, task_id, label}");
      }
      auto worker = body["worker"].get<std::string>();
      try {
        service.submit(worker, body["task_id"].get<std::string>(), body["label"]);
        send_json(res, 200, {{"status", "ok"}, {"worker", service.worker(worker).to_json()}});
      } catch (const AlreadySubmitted& e) {
        send_error(res, 409, "already_submitted", e.what());
      } catch (const NotAssigned& e) {
        send_error(res, 409, "not_assigned", e.what());
      } catch (const BadLabelShape& e) {
        send_error(res, 400, "bad_label_shape", e.what());
      } catch (const AnnotationError& e) {
        send_error(res, 400, "bad_request", e.what());
      }
    });

    server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, service.progress());
    });

    server.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
      res.status = 200;
      res.set_content(service.export_judgments(req.get_param_value("run")), "application/x-ndjson");
    });

    server.Get("/api/instructions", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, instructions);
    });

    if (!config.static_dir.empty()) {
      if (!std::filesystem::is_directory(config.static_dir) ||
          !server.set_mount_point("/", config.static_dir)) {
        throw AnnotationError("static directory not found: " + config.static_dir);
      }
    }
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service, ServerConfig config, json instructions)
    : impl_(std::make_unique<Impl>(service, std::move(config), std::move(instructions))) {
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start() {
  auto& s = impl_->server;
  int port = impl_->config.port;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->config.host);
  } else if (!s.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) throw AnnotationError("cannot bind " + impl_->config.host);
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

void AnnotationServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace cfsim::annotation
