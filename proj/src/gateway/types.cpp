#include "cfsim/gateway/types.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include <json.hpp>

namespace cfsim::gateway {

std::string_view to_string(Role role) { return role == Role::Human ? "human" : "assistant"; }

void validate(const CompletionRequest& request) {
  if (request.turns.empty() || request.turns.back().role != Role::Human) {
    throw PreconditionError("completion request must end with a human turn");
  }
  for (const auto& t : request.turns) {
    if (t.content.empty()) throw PreconditionError("completion request has an empty turn");
  }
  if (request.temperature < 0.0) throw PreconditionError("temperature must be >= 0");
  if (request.max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string fingerprint(const CompletionRequest& request, int sample_index) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : request.turns) turns.push_back({to_string(t.role), t.content});
  nlohmann::json j = {
      {"provider", request.provider_id},
      {"model", request.model_id},
      {"turns", std::move(turns)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"seed", request.seed ? nlohmann::json(*request.seed) : nlohmann::json(nullptr)},
      {"sample_index", sample_index},
  };
  return sha256_hex(j.dump());
}

}  // namespace cfsim::gateway
