#include "cfsim/core/text.hpp"
#include "cfsim/gateway/provider.hpp"

namespace cfsim::gateway {

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(std::string id,
                                                              const nlohmann::json& j) {
  auto p = std::make_shared<ScriptedProvider>(std::move(id));
  if (j.contains("exact")) {
    for (const auto& [fp, text] : j.at("exact").items()) p->add_exact(fp, text.get<std::string>());
  }
  if (j.contains("substring")) {
    for (const auto& f : j.at("substring")) {
      std::vector<std::string> responses;
      if (f.contains("responses")) {
        responses = f.at("responses").get<std::vector<std::string>>();
      } else {
        responses.push_back(f.at("response").get<std::string>());
      }
      p->add_substring(f.at("match").get<std::string>(), std::move(responses),
                       f.value("model", std::string()));
    }
  }
  return p;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(std::string id,
                                                              const std::string& path) {
  return from_json(std::move(id), nlohmann::json::parse(read_file(path)));
}

void ScriptedProvider::add_exact(std::string fingerprint, std::string response) {
  exact_[std::move(fingerprint)] = std::move(response);
}

void ScriptedProvider::add_substring(std::string match, std::vector<std::string> responses,
                                     std::string model_id) {
  substrings_.push_back({std::move(match), std::move(model_id), std::move(responses)});
}

std::string ScriptedProvider::complete(const CompletionRequest& request, int sample_index,
                                       const std::string& fingerprint) {
  calls_.fetch_add(1);
  if (auto it = exact_.find(fingerprint); it != exact_.end()) return it->second;

  const SubstringFixture* found = nullptr;
  for (const auto& f : substrings_) {
    if (!f.model_id.empty() && f.model_id != request.model_id) continue;
    if (request.final_turn().find(f.match) == std::string::npos) continue;
    if (found != nullptr) {
      throw AmbiguousMatch("fixtures \"" + found->match + "\" and \"" + f.match +
                           "\" both match the request");
    }
    found = &f;
  }
  if (found == nullptr) {
    throw ScriptMissing("no fixture for request " + fingerprint.substr(0, 12) + " (model " +
                        request.model_id + ")");
  }
  if (sample_index < 0 || static_cast<std::size_t>(sample_index) >= found->responses.size()) {
    if (found->responses.size() == 1) return found->responses.front();
    throw ScriptMissing("fixture \"" + found->match + "\" has no response for sample " +
                        std::to_string(sample_index));
  }
  return found->responses[static_cast<std::size_t>(sample_index)];
}

}  // namespace cfsim::gateway
