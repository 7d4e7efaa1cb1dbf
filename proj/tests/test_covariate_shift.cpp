#include "xsd/covariate_shift.hpp"

#include "oracles.hpp"
#include "xsd/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace xsd {
namespace {

Matrix gaussian(std::uint64_t seed, std::uint32_t stream, int n, int d, double mean) {
  const CounterRng rng(seed);
  Matrix x(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = mean + rng.normal(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), stream, 0);
  }
  return x;
}

TEST(TrueGaussianRatio, ClosedFormValues) {
  for (double x : {-2.0, 0.0, 3.5}) EXPECT_DOUBLE_EQ(true_gaussian_ratio(x, 0.3, 1.2, 0.3, 1.2), 1.0);
  EXPECT_NEAR(true_gaussian_ratio(0.5, 0, 1, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(true_gaussian_ratio(1.5, 0, 1, 1, 1), std::exp(1.0), 1e-12);
  // Unequal widths: N(0,1) -> N(0,2) at x = 0 is sigma_s / sigma_t.
  EXPECT_NEAR(true_gaussian_ratio(0.0, 0, 1, 0, 2), 0.5, 1e-15);
}

TEST(EstimateWeights, IdenticalDomainsGiveNearUnitWeights) {
  const Matrix x = gaussian(1, 0, 200, 4, 0.0);
  ShiftOptions opts;
  opts.seed = 3;
  const auto w = estimate_weights(x, x, opts);
  ASSERT_EQ(w.weights.size(), 200);
  EXPECT_GE(w.weights.minCoeff(), 0.5);
  EXPECT_LE(w.weights.maxCoeff(), 2.0);
  EXPECT_NEAR(w.weights.mean(), 1.0, 1e-14);
}

TEST(EstimateWeights, RecoversGaussianRatioOrdering) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix s = gaussian(seed, 0, 2000, 1, 0.0);
    const Matrix t = gaussian(seed, 1, 2000, 1, 1.0);
    ShiftOptions opts;
    opts.seed = seed;
    const auto w = estimate_weights(s, t, opts);
    std::vector<double> est(w.weights.begin(), w.weights.end()), truth;
    for (Eigen::Index i = 0; i < s.rows(); ++i) truth.push_back(true_gaussian_ratio(s(i, 0), 0, 1, 1, 1));
    EXPECT_GT(oracle::spearman(est, truth), 0.9) << "seed " << seed;
  }
}

TEST(EstimateWeights, CollapsedClipRangeGivesOnes) {
  const Matrix s = gaussian(2, 0, 100, 3, 0.0);
  const Matrix t = gaussian(2, 1, 80, 3, 3.0);
  ShiftOptions opts;
  opts.clip_lo = opts.clip_hi = 1.0;
  const auto w = estimate_weights(s, t, opts);
  for (double v : w.weights) EXPECT_EQ(v, 1.0);
}

TEST(EstimateWeights, MeanOneAndClipBoundsUnderStrongShift) {
  const Matrix s = gaussian(4, 0, 300, 2, 0.0);
  const Matrix t = gaussian(4, 1, 150, 2, 2.5);
  const auto w = estimate_weights(s, t, {});
  EXPECT_NEAR(w.weights.mean(), 1.0, 1e-14);
  // Before the mean division every ratio sits in [clip_lo, clip_hi].
  const Vector raw = w.weights * w.raw_mean;
  EXPECT_GE(raw.minCoeff(), 0.1 - 1e-12);
  EXPECT_LE(raw.maxCoeff(), 10.0 + 1e-12);
  EXPECT_GT(w.weights.maxCoeff() / w.weights.minCoeff(), 10.0);
}

TEST(EstimateWeights, MonotoneInDomainPosterior) {
  const Matrix s = gaussian(5, 0, 250, 3, 0.0);
  const Matrix t = gaussian(5, 1, 250, 3, 0.7);
  const auto w = estimate_weights(s, t, {});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w.posterior[a] < w.posterior[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    EXPECT_LE(w.weights[order[i - 1]], w.weights[order[i]] + 1e-15);
  }
}

TEST(EstimateWeights, PermutationEquivariant) {
  const Matrix s = gaussian(6, 0, 120, 3, 0.0);
  const Matrix t = gaussian(6, 1, 90, 3, 0.8);
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  RandomStream rng(1, 2);
  shuffle(std::span<std::size_t>(perm), rng);
  std::vector<std::size_t> tperm(90);
  std::iota(tperm.begin(), tperm.end(), 0);
  shuffle(std::span<std::size_t>(tperm), rng);
  const auto a = estimate_weights(s, t, {});
  const auto b = estimate_weights(select_rows(s, perm), select_rows(t, tperm), {});
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_EQ(b.weights[static_cast<Eigen::Index>(i)], a.weights[static_cast<Eigen::Index>(perm[i])]);
  }
}

TEST(EstimateWeights, RejectsBadInput) {
  const Matrix s = gaussian(7, 0, 20, 2, 0.0);
  EXPECT_THROW(estimate_weights(s, gaussian(7, 1, 20, 3, 0.0), {}), Error);
  EXPECT_THROW(estimate_weights(s, Matrix(0, 2), {}), Error);
  ShiftOptions bad;
  bad.clip_lo = 2.0;
  bad.clip_hi = 1.0;
  EXPECT_THROW(estimate_weights(s, s, bad), Error);
}

TEST(ShiftSpace, ParsesNames) {
  EXPECT_EQ(parse_shift_space(to_string(ShiftSpace::original)), ShiftSpace::original);
  EXPECT_EQ(parse_shift_space(to_string(ShiftSpace::second_level)), ShiftSpace::second_level);
  EXPECT_THROW(parse_shift_space("nope"), Error);
}

}  // namespace
}  // namespace xsd
