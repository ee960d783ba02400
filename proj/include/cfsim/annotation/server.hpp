#pragma once

#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "cfsim/annotation/service.hpp"

namespace cfsim::annotation {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string static_dir;  // annotation UI bundle served at /
  /// Environment variable holding the shared secret expected in the
  /// X-Annotation-Secret header. Empty disables the check.
  std::string secret_env_var;
};

/// Instruction texts shown by the UI, keyed by annotation kind.
nlohmann::json bundled_instructions();

/// JSON-over-HTTP front of an AnnotationService:
///   GET  /api/tasks/next?worker=ID
///   POST /api/judgments   {"worker", "task_id", "label"}
///   GET  /api/progress
///   GET  /api/export?run=ID
///   GET  /api/instructions
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, ServerConfig config,
                   nlohmann::json instructions = bundled_instructions());
  ~AnnotationServer();

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Blocks until stop() is called.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cfsim::annotation
