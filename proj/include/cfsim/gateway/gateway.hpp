#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfsim/gateway/provider.hpp"
#include "cfsim/gateway/types.hpp"

namespace cfsim::gateway {

/// Completion texts keyed by request fingerprint. With a directory, every entry
/// is also one file `<dir>/<fingerprint>.txt`, written to a temporary name and
/// renamed into place.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& fingerprint);
  void put(const std::string& fingerprint, const std::string& text);

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::map<std::string, std::string> memory_;
};

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  int max_attempts = 5;
};

struct GatewayStats {
  long long provider_calls = 0;
  long long cache_hits = 0;
  long long retries = 0;
  int peak_in_flight = 0;
};

/// Counting semaphore with a runtime bound.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int cap);
  void acquire();
  void release();
  int peak() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int cap_;
  int in_flight_ = 0;
  int peak_ = 0;
};

class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit Gateway(std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>(),
                   RetryPolicy retry = {}, int max_in_flight = 4);

  void add_provider(std::shared_ptr<ChatProvider> provider);
  ChatProvider& provider(const std::string& id) const;
  bool has_provider(const std::string& id) const;

  /// Cache first; on a miss the provider is called under the in-flight cap with
  /// exponential backoff on TransportError and ThrottleError.
  CompletionResult complete(const CompletionRequest& request, int sample_index = 0);

  std::vector<std::vector<double>> embed(const std::string& provider_id,
                                         const std::string& model_id,
                                         std::span<const std::string> texts);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  int max_in_flight() const { return max_in_flight_; }
  GatewayStats stats() const;

 private:
  template <typename Fn>
  auto with_retry(const std::string& what, Fn&& fn) -> decltype(fn());

  std::shared_ptr<ResponseCache> cache_;
  RetryPolicy retry_;
  int max_in_flight_;
  InFlightLimiter limiter_;
  std::map<std::string, std::shared_ptr<ChatProvider>> providers_;
  Sleeper sleeper_;
  std::atomic<long long> provider_calls_{0};
  std::atomic<long long> cache_hits_{0};
  std::atomic<long long> retries_{0};
};

}  // namespace cfsim::gateway
