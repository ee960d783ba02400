#include <httplib.h>

#include <cstdlib>

#include "cfsim/gateway/provider.hpp"

namespace cfsim::gateway {
namespace {

std::string credential(const RemoteProviderConfig& config) {
  if (config.credential_env_var.empty()) return {};
  const char* value = std::getenv(config.credential_env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw AuthError("credential variable " + config.credential_env_var + " is not set");
  }
  return value;
}

}  // namespace

OpenAICompatibleProvider::OpenAICompatibleProvider(RemoteProviderConfig config)
    : config_(std::move(config)) {
  auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw PreconditionError("base_url needs a scheme: " + config_.base_url);
  }
  auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

nlohmann::json OpenAICompatibleProvider::chat_body(const CompletionRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& t : request.turns) {
    messages.push_back({{"role", t.role == Role::Human ? "user" : "assistant"}, {"content", t.content}});
  }
  nlohmann::json body = {{"model", request.model_id},
                         {"messages", std::move(messages)},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::string OpenAICompatibleProvider::post(const std::string& path, const std::string& body) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(10);
  client.set_read_timeout(config_.timeout_seconds);
  client.set_write_timeout(30);
  httplib::Headers headers;
  if (auto key = credential(config_); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  auto res = client.Post(base_path_ + path, headers, body, "application/json");
  if (!res) {
    throw TransportError(config_.id + ": " + httplib::to_string(res.error()) + " for " + path);
  }
  const std::string status = std::to_string(res->status);
  if (res->status == 401 || res->status == 403) {
    throw AuthError(config_.id + ": http " + status + " for " + path);
  }
  if (res->status == 429) throw ThrottleError(config_.id + ": http 429 for " + path);
  if (res->status >= 500) throw TransportError(config_.id + ": http " + status + " for " + path);
  if (res->status < 200 || res->status >= 300) {
    throw GatewayError(config_.id + ": http " + status + " for " + path + ": " + res->body);
  }
  return res->body;
}

std::string OpenAICompatibleProvider::complete(const CompletionRequest& request, int,
                                               const std::string&) {
  auto reply = nlohmann::json::parse(post("/chat/completions", chat_body(request).dump()), nullptr,
                                     false);
  if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty()) {
    throw GatewayError(config_.id + ": malformed chat completion response");
  }
  const auto& message = reply["choices"][0].value("message", nlohmann::json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw GatewayError(config_.id + ": chat completion without text content");
  }
  return message["content"].get<std::string>();
}

std::vector<std::vector<double>> OpenAICompatibleProvider::embed(
    const std::string& model_id, std::span<const std::string> texts) {
  nlohmann::json body = {{"model", model_id},
                         {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  auto reply = nlohmann::json::parse(post("/embeddings", body.dump()), nullptr, false);
  if (reply.is_discarded() || !reply.contains("data") || !reply["data"].is_array() ||
      reply["data"].size() != texts.size()) {
    throw GatewayError(config_.id + ": malformed embeddings response");
  }
  std::vector<std::vector<double>> out(texts.size());
  for (const auto& item : reply["data"]) {
    auto index = item.value("index", std::size_t{0});
    if (index >= out.size()) throw GatewayError(config_.id + ": embedding index out of range");
    out[index] = item.at("embedding").get<std::vector<double>>();
  }
  return out;
}

}  // namespace cfsim::gateway
