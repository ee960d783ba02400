#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/core/error.hpp"

namespace cfsim::gateway {

enum class Role { Human, Assistant };

std::string_view to_string(Role role);

struct ChatTurn {
  Role role = Role::Human;
  std::string content;

  bool operator==(const ChatTurn&) const = default;
};

struct CompletionRequest {
  std::string provider_id;
  std::string model_id;
  std::vector<ChatTurn> turns;
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<long long> seed;

  /// Content of the last turn (always a human turn for a valid request).
  const std::string& final_turn() const { return turns.back().content; }
};

struct CompletionResult {
  std::string text;
  bool cached = false;
  long long latency_ms = 0;
  std::string request_fingerprint;
};

class GatewayError : public Error {
 public:
  using Error::Error;
};

/// Missing or rejected credentials. Never retried.
class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Connection failures and 5xx responses. Retried.
class TransportError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// A 429 response. Retried; surfaces as ThrottleExhausted once attempts run out.
class ThrottleError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ThrottleExhausted : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ScriptMissing : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class AmbiguousMatch : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// Throws PreconditionError unless the request ends with a non-empty human turn,
/// every turn has content and temperature >= 0.
void validate(const CompletionRequest& request);

std::string sha256_hex(std::string_view data);

/// Stable hash over provider, model, turns, temperature, max_tokens, seed and
/// the sample index.
std::string fingerprint(const CompletionRequest& request, int sample_index);

}  // namespace cfsim::gateway
