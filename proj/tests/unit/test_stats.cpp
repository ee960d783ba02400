#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cfsim/stats/stats.hpp"

using namespace cfsim;
using namespace cfsim::stats;

namespace {

LabelSeries series(const std::string& letters) {
  LabelSeries s;
  for (char c : letters) s.push_back(c == 'Y' ? "yes" : c == 'N' ? "no" : "unsimulatable");
  return s;
}

SimulationJudgment j(const char* s) { return SimulationJudgment::from_string(s); }

}  // namespace

TEST(Kappa, HandCases) {
  auto a = series("YYYYYNNNNN");
  auto b = series("YYYYNNNNNY");
  EXPECT_NEAR(cohen_kappa(a, b), 0.6, 1e-12);
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
  EXPECT_NEAR(cohen_kappa(series("YN"), series("NY")), -1.0, 1e-12);
  auto d = cohen_kappa_detail(a, b);
  EXPECT_NEAR(d.observed, 0.8, 1e-12);
  EXPECT_NEAR(d.expected, 0.5, 1e-12);
}

TEST(Kappa, SymmetricAndErrors) {
  auto a = series("YYNUNYYNUY");
  auto b = series("YNNUUYYNNY");
  EXPECT_NEAR(cohen_kappa(a, b), cohen_kappa(b, a), 1e-12);
  EXPECT_THROW(cohen_kappa(series("YY"), series("Y")), LengthMismatch);
  auto constant = series("YYY");
  auto d = cohen_kappa_detail(constant, constant);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.kappa, 1.0);
}

TEST(AvgPairwiseKappa, HandCases) {
  auto a = series("YYYYYNNNNN");
  auto b = series("YYYYNNNNNY");
  std::vector<LabelSeries> three = {a, b, b};
  EXPECT_NEAR(avg_pairwise_kappa(three).mean, (0.6 + 0.6 + 1.0) / 3.0, 1e-12);
  std::vector<LabelSeries> same = {a, a, a};
  EXPECT_EQ(avg_pairwise_kappa(same).mean, 1.0);
  std::vector<LabelSeries> two = {a, b};
  EXPECT_NEAR(avg_pairwise_kappa(two).mean, cohen_kappa(a, b), 1e-15);
}

TEST(AvgPairwiseKappa, DegeneratePairsExcluded) {
  auto c = series("YYYY");
  auto v = series("YNYN");
  std::vector<LabelSeries> s = {c, c, v};
  auto r = avg_pairwise_kappa(s);
  EXPECT_EQ(r.pairs_degenerate, 1);
  EXPECT_EQ(r.pairs_used, 2);
  EXPECT_NEAR(r.mean, 0.0, 1e-12);
}

TEST(Correlation, HandCases) {
  std::vector<double> x = {1, 2, 3};
  std::vector<double> y = {3, 1, 2};
  EXPECT_NEAR(pearson(x, y), -0.5, 1e-12);
  EXPECT_NEAR(spearman(x, y), -0.5, 1e-12);

  std::vector<double> lin = {1, 2, 3, 4};
  std::vector<double> aff = {3, 5, 7, 9};
  std::vector<double> neg = {-1, -2, -3, -4};
  EXPECT_NEAR(pearson(lin, aff), 1.0, 1e-12);
  EXPECT_NEAR(pearson(lin, neg), -1.0, 1e-12);

  std::vector<double> tied = {1, 1, 2};
  EXPECT_NEAR(spearman(tied, tied), 1.0, 1e-12);
  std::vector<double> cubes = {1, 8, 27, 64};
  EXPECT_NEAR(spearman(lin, cubes), 1.0, 1e-12);
}

TEST(Correlation, Invariances) {
  std::vector<double> x = {0.3, 1.7, -2.0, 4.5, 0.9};
  std::vector<double> y = {1.0, 0.2, -1.5, 3.3, 2.2};
  std::vector<double> xa;
  std::vector<double> xm;
  for (double v : x) {
    xa.push_back(2.5 * v - 7.0);
    xm.push_back(std::exp(v));
  }
  EXPECT_NEAR(pearson(x, y), pearson(xa, y), 1e-12);
  EXPECT_EQ(spearman(x, y), spearman(xm, y));
}

TEST(Correlation, Errors) {
  std::vector<double> c = {1, 1, 1};
  std::vector<double> v = {1, 2, 3};
  EXPECT_THROW(pearson(c, v), ConstantVector);
  EXPECT_THROW(spearman(v, c), ConstantVector);
  std::vector<double> one = {1};
  EXPECT_THROW(pearson(one, one), InsufficientData);
  std::vector<double> two = {1, 2};
  EXPECT_THROW(pearson(two, v), LengthMismatch);
}

TEST(Ranks, TiesAveraged) {
  std::vector<double> v = {10, 20, 10, 30};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Permutation, IdenticalSamplesGiveOne) {
  std::vector<double> a = {0.1, 0.5, 0.9, 0.4};
  EXPECT_EQ(paired_permutation_test(a, a, 10000, 3).p_value, 1.0);
}

TEST(Permutation, ConstantShiftIsSignificant) {
  std::vector<double> a(50);
  std::vector<double> b(50);
  for (int i = 0; i < 50; ++i) {
    b[i] = 0.01 * i;
    a[i] = b[i] + 1.0;
  }
  auto r = paired_permutation_test(a, b, 10000, 42);
  EXPECT_LE(r.p_value, 0.001);
  EXPECT_NEAR(r.observed_difference, 1.0, 1e-12);
}

TEST(Permutation, SeedDeterminism) {
  std::vector<double> a = {0.2, 0.8, 0.5, 0.9, 0.1, 0.6};
  std::vector<double> b = {0.1, 0.7, 0.6, 0.4, 0.3, 0.2};
  auto r1 = paired_permutation_test(a, b, 5000, 11);
  auto r2 = paired_permutation_test(a, b, 5000, 11);
  EXPECT_EQ(std::memcmp(&r1.p_value, &r2.p_value, sizeof(double)), 0);
  EXPECT_EQ(r1.seed, 11u);
  EXPECT_EQ(r1.iterations, 5000);
}

TEST(Permutation, LargerShiftLowersP) {
  std::vector<double> base = {0.5, -0.4, 0.3, -0.2, 0.6, -0.1, 0.2, -0.5, 0.4, 0.0};
  std::vector<double> zero(base.size(), 0.0);
  double previous = 2.0;
  for (double shift : {0.0, 0.1, 0.3, 1.0}) {
    std::vector<double> a;
    for (double v : base) a.push_back(v + shift);
    auto p = paired_permutation_test(a, zero, 4000, 5).p_value;
    EXPECT_LE(p, previous);
    previous = p;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(Permutation, Errors) {
  std::vector<double> a = {1, 2};
  std::vector<double> b = {1};
  EXPECT_THROW(paired_permutation_test(a, b), LengthMismatch);
}

TEST(MajorityVote, Rules) {
  std::vector<SimulationJudgment> strict = {j("yes"), j("yes"), j("unsimulatable")};
  EXPECT_EQ(majority_vote(strict), SimulationJudgment::entailed(Label::Yes));
  std::vector<SimulationJudgment> split = {j("yes"), j("no"), j("unsimulatable")};
  EXPECT_FALSE(majority_vote(split).simulatable());
  std::vector<SimulationJudgment> single = {j("no")};
  EXPECT_EQ(majority_vote(single), SimulationJudgment::entailed(Label::No));
  std::vector<SimulationJudgment> pair = {j("yes"), j("yes")};
  EXPECT_EQ(majority_vote(pair), SimulationJudgment::entailed(Label::Yes));
  std::vector<SimulationJudgment> tie = {j("yes"), j("no")};
  EXPECT_FALSE(majority_vote(tie).simulatable());
  EXPECT_THROW(majority_vote(std::vector<SimulationJudgment>{}), EmptyInput);
}

TEST(MajorityVote, PermutationInvariant) {
  std::vector<SimulationJudgment> v = {j("no"), j("unsimulatable"), j("no")};
  auto expected = majority_vote(v);
  std::sort(v.begin(), v.end(),
            [](const auto& x, const auto& y) { return x.to_string() < y.to_string(); });
  do {
    EXPECT_EQ(majority_vote(v), expected);
  } while (std::next_permutation(v.begin(), v.end(), [](const auto& x, const auto& y) {
    return x.to_string() < y.to_string();
  }));
}
