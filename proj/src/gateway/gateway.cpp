#include "cfsim/gateway/gateway.hpp"

#include <fstream>
#include <sstream>
#include <thread>

namespace cfsim::gateway {

std::vector<std::vector<double>> ChatProvider::embed(const std::string&,
                                                     std::span<const std::string>) {
  throw GatewayError("provider " + id() + " does not serve embeddings");
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& fingerprint) {
  std::lock_guard lock(mu_);
  if (auto it = memory_.find(fingerprint); it != memory_.end()) return it->second;
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (fingerprint + ".txt"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  memory_[fingerprint] = ss.str();
  return ss.str();
}

void ResponseCache::put(const std::string& fingerprint, const std::string& text) {
  std::lock_guard lock(mu_);
  memory_[fingerprint] = text;
  if (!dir_) return;
  auto final_path = *dir_ / (fingerprint + ".txt");
  std::ostringstream tmp_name;
  tmp_name << fingerprint << ".tmp." << std::this_thread::get_id();
  auto tmp_path = *dir_ / tmp_name.str();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw GatewayError("cannot write cache entry " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

InFlightLimiter::InFlightLimiter(int cap) : cap_(cap < 1 ? 1 : cap) {}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < cap_; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

int InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

Gateway::Gateway(std::shared_ptr<ResponseCache> cache, RetryPolicy retry, int max_in_flight)
    : cache_(std::move(cache)),
      retry_(retry),
      max_in_flight_(max_in_flight < 1 ? 1 : max_in_flight),
      limiter_(max_in_flight_),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Gateway::add_provider(std::shared_ptr<ChatProvider> provider) {
  auto id = provider->id();
  providers_[id] = std::move(provider);
}

bool Gateway::has_provider(const std::string& id) const { return providers_.count(id) != 0; }

ChatProvider& Gateway::provider(const std::string& id) const {
  auto it = providers_.find(id);
  if (it == providers_.end()) throw GatewayError("unknown provider: " + id);
  return *it->second;
}

template <typename Fn>
auto Gateway::with_retry(const std::string& what, Fn&& fn) -> decltype(fn()) {
  auto delay = retry_.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      limiter_.acquire();
      struct Release {
        InFlightLimiter& l;
        ~Release() { l.release(); }
      } release{limiter_};
      provider_calls_.fetch_add(1);
      return fn();
    } catch (const ThrottleError& e) {
      if (attempt >= retry_.max_attempts) {
        throw ThrottleExhausted(what + ": throttled after " + std::to_string(attempt) +
                                " attempts: " + e.what());
      }
    } catch (const TransportError&) {
      if (attempt >= retry_.max_attempts) throw;
    }
    retries_.fetch_add(1);
    sleeper_(delay);
    delay = std::chrono::milliseconds(static_cast<long long>(delay.count() * retry_.factor));
  }
}

CompletionResult Gateway::complete(const CompletionRequest& request, int sample_index) {
  validate(request);
  CompletionResult result;
  result.request_fingerprint = fingerprint(request, sample_index);
  if (auto hit = cache_->get(result.request_fingerprint)) {
    cache_hits_.fetch_add(1);
    result.text = std::move(*hit);
    result.cached = true;
    return result;
  }
  auto& p = provider(request.provider_id);
  const auto start = std::chrono::steady_clock::now();
  result.text = with_retry(request.provider_id + "/" + request.model_id,
                           [&] { return p.complete(request, sample_index, result.request_fingerprint); });
  result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  cache_->put(result.request_fingerprint, result.text);
  return result;
}

std::vector<std::vector<double>> Gateway::embed(const std::string& provider_id,
                                                const std::string& model_id,
                                                std::span<const std::string> texts) {
  auto& p = provider(provider_id);
  return with_retry(provider_id + "/" + model_id, [&] { return p.embed(model_id, texts); });
}

GatewayStats Gateway::stats() const {
  return {provider_calls_.load(), cache_hits_.load(), retries_.load(), limiter_.peak()};
}

}  // namespace cfsim::gateway
