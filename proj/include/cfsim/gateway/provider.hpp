#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/gateway/types.hpp"

namespace cfsim::gateway {

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  virtual std::string id() const = 0;
  virtual std::string complete(const CompletionRequest& request, int sample_index,
                               const std::string& fingerprint) = 0;
  virtual std::vector<std::vector<double>> embed(const std::string& model_id,
                                                 std::span<const std::string> texts);
};

struct RemoteProviderConfig {
  std::string id;
  std::string base_url = "https://api.openai.com/v1";
  std::string credential_env_var = "OPENAI_API_KEY";
  int timeout_seconds = 120;
};

/// Chat-completions over HTTP(S): POST {base_url}/chat/completions with a
/// messages array; the reply is choices[0].message.content.
class OpenAICompatibleProvider final : public ChatProvider {
 public:
  explicit OpenAICompatibleProvider(RemoteProviderConfig config);

  std::string id() const override { return config_.id; }
  std::string complete(const CompletionRequest& request, int sample_index,
                       const std::string& fingerprint) override;
  std::vector<std::vector<double>> embed(const std::string& model_id,
                                         std::span<const std::string> texts) override;

  /// Request body sent for `request` (exposed for wire-format tests).
  static nlohmann::json chat_body(const CompletionRequest& request);

 private:
  std::string post(const std::string& path, const std::string& body) const;

  RemoteProviderConfig config_;
  std::string scheme_host_port_;
  std::string base_path_;
};

/// Deterministic provider backed by fixtures. A request is resolved by exact
/// fingerprint first, then by substring matchers over its final human turn.
/// A substring fixture may restrict itself to one model id and may carry a
/// list of responses indexed by sample_index; a single response serves every
/// sample index.
///
/// JSON form:
///   {"exact": {"<fingerprint>": "text", ...},
///    "substring": [{"match": "...", "model": "optional", "response": "text"},
///                  {"match": "...", "responses": ["s0", "s1"]}]}
class ScriptedProvider final : public ChatProvider {
 public:
  explicit ScriptedProvider(std::string id = "scripted") : id_(std::move(id)) {}

  static std::shared_ptr<ScriptedProvider> from_json(std::string id, const nlohmann::json& j);
  static std::shared_ptr<ScriptedProvider> from_file(std::string id, const std::string& path);

  void add_exact(std::string fingerprint, std::string response);
  void add_substring(std::string match, std::vector<std::string> responses,
                     std::string model_id = {});

  std::string id() const override { return id_; }
  std::string complete(const CompletionRequest& request, int sample_index,
                       const std::string& fingerprint) override;
  long long calls() const { return calls_.load(); }

 private:
  struct SubstringFixture {
    std::string match;
    std::string model_id;
    std::vector<std::string> responses;
  };

  std::string id_;
  std::map<std::string, std::string> exact_;
  std::vector<SubstringFixture> substrings_;
  std::atomic<long long> calls_{0};
};

}  // namespace cfsim::gateway
