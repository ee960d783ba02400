#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace cfsim::testing {

// Brute-force sentence BLEU: n-grams compared position by position, no maps.
inline double oracle_bleu(const std::vector<std::string>& h, const std::vector<std::string>& r,
                          int max_order) {
  if (h.empty() && r.empty()) return 1.0;
  if (h.empty() || r.empty()) return 0.0;
  int order = max_order;
  if (static_cast<int>(h.size()) < order) order = static_cast<int>(h.size());
  if (static_cast<int>(r.size()) < order) order = static_cast<int>(r.size());
  auto same = [](const std::vector<std::string>& a, std::size_t i,
                 const std::vector<std::string>& b, std::size_t j, int n) {
    for (int k = 0; k < n; ++k) {
      if (a[i + k] != b[j + k]) return false;
    }
    return true;
  };
  double log_sum = 0.0;
  for (int n = 1; n <= order; ++n) {
    const std::size_t hn = h.size() - n + 1;
    const std::size_t rn = r.size() - n + 1;
    int clipped = 0;
    for (std::size_t i = 0; i < hn; ++i) {
      bool first = true;
      for (std::size_t k = 0; k < i; ++k) {
        if (same(h, k, h, i, n)) first = false;
      }
      if (!first) continue;
      int in_hyp = 0;
      for (std::size_t k = 0; k < hn; ++k) in_hyp += same(h, k, h, i, n) ? 1 : 0;
      int in_ref = 0;
      for (std::size_t k = 0; k < rn; ++k) in_ref += same(r, k, h, i, n) ? 1 : 0;
      clipped += in_hyp < in_ref ? in_hyp : in_ref;
    }
    double p = clipped == 0 ? 1e-9 : static_cast<double>(clipped) / static_cast<double>(hn);
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (r.size() > h.size()) bp = std::exp(1.0 - static_cast<double>(r.size()) / h.size());
  return bp * std::exp(log_sum / order);
}

}  // namespace cfsim::testing
