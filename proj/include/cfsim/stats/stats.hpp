#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfsim/core/error.hpp"
#include "cfsim/core/types.hpp"

namespace cfsim::stats {

class StatsError : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public StatsError {
 public:
  using StatsError::StatsError;
};

class DegenerateMarginals : public StatsError {
 public:
  using StatsError::StatsError;
};

class ConstantVector : public StatsError {
 public:
  using StatsError::StatsError;
};

class InsufficientData : public StatsError {
 public:
  using StatsError::StatsError;
};

class EmptyInput : public StatsError {
 public:
  using StatsError::StatsError;
};

/// Categorical labels for one rater, aligned by position with other series.
using LabelSeries = std::vector<std::string>;

struct KappaDetail {
  double kappa = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  /// p_e == 1: both raters used one identical label throughout, so kappa is
  /// 0/0. cohen_kappa reports 1.0 for it.
  bool degenerate = false;
};

KappaDetail cohen_kappa_detail(std::span<const std::string> a, std::span<const std::string> b);

/// (p_o - p_e) / (1 - p_e).
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

struct AveragedKappa {
  double mean = 0.0;
  int pairs_used = 0;
  int pairs_degenerate = 0;
};

/// Mean kappa over all unordered pairs of `series`. Degenerate pairs are left
/// out of the mean and counted; DegenerateMarginals if no pair is usable.
AveragedKappa avg_pairwise_kappa(std::span<const LabelSeries> series);

double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson over average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

struct PermutationResult {
  double p_value = 1.0;
  double observed_difference = 0.0;  // mean(a - b)
  int iterations = 0;
  std::uint64_t seed = 0;
};

/// Two-sided sign-flip test on paired differences:
/// p = (1 + #{|mean(s * d)| >= |mean(d)|}) / (1 + iterations), signs drawn
/// from mt19937_64(seed).
PermutationResult paired_permutation_test(std::span<const double> a, std::span<const double> b,
                                          int iterations = 10000, std::uint64_t seed = 0);

/// The judgment held by a strict majority of `judgments`; Unsimulatable when no
/// value has one. Unsimulatable counts as its own category.
SimulationJudgment majority_vote(std::span<const SimulationJudgment> judgments,
                                 int redundancy = 3);

}  // namespace cfsim::stats
