#include <gtest/gtest.h>

#include <random>

#include "shield/error.hpp"
#include "shield/utility.hpp"
#include "support.hpp"

namespace shield {
namespace {

SimilarityMatrix two_by_two(double s12) {
  SimilarityMatrix s{{"a", "b"}, Matrix::identity(2)};
  s.values(0, 1) = s.values(1, 0) = s12;
  return s;
}

TEST(SignalWeights, SingleArmUsesIncidence) {
  const IncidenceTable t({"X"}, {"active"}, {50}, {5});
  EXPECT_DOUBLE_EQ(signal_weights(t, nullptr)[0], 0.1);
}

TEST(SignalWeights, LowerBoundIsClampedAtZero) {
  const IncidenceTable t({"X", "Y"}, {"a", "b"}, {10, 10}, {1, 2, 3, 0});
  SignalStats stats;
  stats.terms.resize(2);
  stats.terms[0].ic.lower = -0.3;
  stats.terms[1].ic.lower = 0.8;
  const auto z = signal_weights(t, &stats);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.8);
  EXPECT_THROW(signal_weights(t, nullptr), Error);
}

TEST(Utility, WorkedExample) {
  const std::vector<double> z{2, 3};
  const auto u = utility_matrix(z, two_by_two(0.6));
  EXPECT_DOUBLE_EQ(u.matrix(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(u.matrix(0, 1), 3.6);
  EXPECT_DOUBLE_EQ(u.matrix(1, 0), 3.6);
  EXPECT_DOUBLE_EQ(u.matrix(1, 1), 9.0);
}

TEST(Utility, ZeroWeightZeroesRowAndColumn) {
  const std::vector<double> z{0, 3};
  const auto u = utility_matrix(z, two_by_two(0.6));
  EXPECT_EQ(u.matrix(0, 0), 0.0);
  EXPECT_EQ(u.matrix(0, 1), 0.0);
  EXPECT_EQ(u.matrix(1, 0), 0.0);
}

TEST(Utility, DiagonalSimilarityGivesDiagonalUtility) {
  const std::vector<double> z{2, 3};
  const auto u = utility_matrix(z, two_by_two(0.0));
  EXPECT_EQ(u.matrix(0, 1), 0.0);
  EXPECT_EQ(u.matrix(1, 1), 9.0);
}

TEST(Utility, RejectsBadWeights) {
  EXPECT_THROW(utility_matrix(std::vector<double>{-1.0, 1.0}, two_by_two(0.5)), Error);
  EXPECT_THROW(utility_matrix(std::vector<double>{1.0}, two_by_two(0.5)), Error);
}

TEST(Utility, PositiveExactlyWhenBothSignalsAndSimilarityArePositive) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 12;
    SimilarityMatrix s{{}, Matrix::identity(n)};
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      s.terms.push_back("t" + std::to_string(i));
      z[i] = u01(rng) < 0.3 ? 0.0 : u01(rng);
      for (std::size_t j = i + 1; j < n; ++j) s.values(i, j) = s.values(j, i) = u01(rng) < 0.5 ? 0.0 : u01(rng);
    }
    const auto g = utility_matrix(z, s);
    const auto g3 = utility_matrix(std::vector<double>(z.begin(), z.end()), s);
    std::vector<double> z3 = z;
    for (double& v : z3) v *= 3.0;
    const auto scaled = utility_matrix(z3, s);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_EQ(g.matrix(i, j) > 0.0, z[i] > 0.0 && z[j] > 0.0 && s.values(i, j) > 0.0);
        ASSERT_EQ(g.matrix(i, j), g.matrix(j, i));
        ASSERT_NEAR(scaled.matrix(i, j), 9.0 * g.matrix(i, j), 1e-12);
      }
    }
    EXPECT_EQ(g.matrix, g3.matrix);
  }
}

}  // namespace
}  // namespace shield
