#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cfsim/stats/stats.hpp"

namespace cfsim::stats {
namespace {

void check_paired(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw LengthMismatch(std::string(what) + ": lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  if (x.size() < 2) throw InsufficientData(std::string(what) + ": need at least two points");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, "pearson");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ConstantVector("pearson: constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, "spearman");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const ConstantVector&) {
    throw ConstantVector("spearman: constant vector");
  }
}

PermutationResult paired_permutation_test(std::span<const double> a, std::span<const double> b,
                                          int iterations, std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw LengthMismatch("paired_permutation_test: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  if (a.empty()) throw InsufficientData("paired_permutation_test: empty samples");
  if (iterations < 1) throw PreconditionError("paired_permutation_test: iterations must be >= 1");

  std::vector<double> diff(a.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    scale = std::max(scale, std::abs(diff[i]));
  }
  const auto n = static_cast<double>(diff.size());
  const double observed = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  // Sign-flipped sums of the same terms can differ from the observed sum by rounding.
  const double tolerance = 1e-12 * std::max(1.0, scale);

  std::mt19937_64 rng(seed);
  long long extreme = 0;
  for (int it = 0; it < iterations; ++it) {
    double sum = 0.0;
    std::uint64_t bits = 0;
    int available = 0;
    for (double d : diff) {
      if (available == 0) {
        bits = rng();
        available = 64;
      }
      sum += (bits & 1U) ? d : -d;
      bits >>= 1U;
      --available;
    }
    if (std::abs(sum / n) >= std::abs(observed) - tolerance) ++extreme;
  }
  PermutationResult r;
  r.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + iterations);
  r.observed_difference = observed;
  r.iterations = iterations;
  r.seed = seed;
  return r;
}

}  // namespace cfsim::stats
