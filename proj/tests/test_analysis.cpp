#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kite/analysis.hpp"
#include "oracles.hpp"

namespace kite {
namespace {

EmbeddingBank random_bank(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  return EmbeddingBank(oracle::gaussian_rows(rng, n, d));
}

TEST(MarginalGain, Examples) {
  const Vector e1 = Vector::Unit(2, 0), e2 = Vector::Unit(2, 1);
  EXPECT_DOUBLE_EQ(marginal_gain(init_design(2, 1.0), e1, e1), 0.5);
  EXPECT_EQ(marginal_gain(init_design(2, 1.0), e1, e2), 0.0);
}

TEST(MarginalGain, MatchesDifferenceOfObjectives) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const auto bank = random_bank(rng, 12, 5);
    const Vector z = oracle::gaussian_vector(rng, 5);
    const std::vector<std::size_t> S{1, 4, 7};
    auto with = S;
    with.push_back(9);
    const double want = oracle::f_z(bank, z, with, 0.5) - oracle::f_z(bank, z, S, 0.5);
    EXPECT_NEAR(marginal_gain(direct_design_state(bank, S, 0.5), z, bank.row(9)), want, 1e-9);
  }
}

TEST(Coherence, Examples) {
  const auto s = init_design(2, 1.0);
  const Vector e1 = Vector::Unit(2, 0), e2 = Vector::Unit(2, 1);
  EXPECT_EQ(coherence(s, e1, e2), 0.0);
  EXPECT_NEAR(coherence(s, e1, e1), 0.5, 1e-15);
}

TEST(Coherence, StrictlyInsideUnitInterval) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 500; ++t) {
    auto s = init_design(4, 0.02);
    for (int i = 0; i < t % 5; ++i) rank_one_update(s, oracle::gaussian_vector(rng, 4));
    const Vector a = oracle::gaussian_vector(rng, 4, 10.0);
    const Vector b = t % 7 == 0 ? a : oracle::gaussian_vector(rng, 4, 10.0);
    EXPECT_LT(std::abs(coherence(s, a, b)), 1.0);
  }
}

TEST(GammaLowerBound, Examples) {
  EXPECT_EQ(gamma_lower_bound(0.9, 1), 1.0);
  EXPECT_EQ(gamma_lower_bound(0.0, 10), 1.0);
  EXPECT_DOUBLE_EQ(gamma_lower_bound(0.5, 5), 1.0 / 3.0);
  EXPECT_THROW(gamma_lower_bound(0.5, 0), InvalidArgument);
}

TEST(GammaExact, SingletonIsOne) {
  std::mt19937_64 rng(3);
  const auto bank = random_bank(rng, 10, 4);
  for (int t = 0; t < 10; ++t) {
    const Vector z = oracle::gaussian_vector(rng, 4);
    EXPECT_EQ(gamma_exact(bank, z, {0, 1}, {static_cast<std::size_t>(2 + t % 8)}, 1.0).value(), 1.0);
    EXPECT_EQ(gamma_closed_form(bank, z, {0, 1}, {static_cast<std::size_t>(2 + t % 8)}, 1.0).value(), 1.0);
  }
}

TEST(GammaExact, OrthogonalSetIsOne) {
  RowMatrix rows = RowMatrix::Zero(4, 4);
  rows(0, 0) = 1.0;
  rows(1, 1) = 2.0;
  rows(2, 2) = -0.5;
  rows(3, 3) = 3.0;
  const EmbeddingBank bank(rows);
  const Vector z = Vector::Ones(4);
  EXPECT_NEAR(gamma_exact(bank, z, {0}, {1, 2, 3}, 0.7).value(), 1.0, 1e-9);
  EXPECT_NEAR(gamma_closed_form(bank, z, {0}, {1, 2, 3}, 0.7).value(), 1.0, 1e-12);
}

TEST(GammaExact, MatchesDirectObjectives) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto bank = random_bank(rng, 12, 8);
    const Vector z = oracle::gaussian_vector(rng, 8);
    const std::vector<std::size_t> S{0, 1, 2, 3}, L{4, 5, 6, 7, 8};
    const double f0 = oracle::f_z(bank, z, S, 1.0);
    double num = 0.0;
    for (auto i : L) {
      auto with = S;
      with.push_back(i);
      num += oracle::f_z(bank, z, with, 1.0) - f0;
    }
    auto all = S;
    all.insert(all.end(), L.begin(), L.end());
    const double want = num / (oracle::f_z(bank, z, all, 1.0) - f0);
    EXPECT_NEAR(gamma_exact(bank, z, S, L, 1.0).value(), want, 1e-8 * std::abs(want));
  }
}

// The exact ratio is a Rayleigh-quotient ratio u^T u / u^T (I + C)^{-1} u with
// C the off-diagonal coherence matrix, so it is bounded below by the smallest
// eigenvalue of I + C.
TEST(GammaExact, BoundedBySpectrumOfCoherenceMatrix) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto bank = random_bank(rng, 13, 8);
    const Vector z = oracle::gaussian_vector(rng, 8);
    const IndexSet S{0, 1, 2, 3}, L{4, 5, 6, 7, 8};
    const auto state = direct_design_state(bank, S, 1.0);
    Matrix C = Matrix::Identity(5, 5);
    for (Eigen::Index a = 0; a < 5; ++a)
      for (Eigen::Index b = 0; b < 5; ++b)
        if (a != b) C(a, b) = coherence(state, bank.row(L[a]), bank.row(L[b]));
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues().minCoeff();
    const double hi = Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues().maxCoeff();
    const auto g = gamma_exact(bank, z, S, L, 1.0);
    ASSERT_TRUE(g.has_value());
    EXPECT_GE(*g, lo - 1e-9);
    EXPECT_LE(*g, hi + 1e-9);
  }
}

TEST(GammaClosedForm, NeverBelowCoherenceBound) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const auto bank = random_bank(rng, 14, 6);
    const Vector z = oracle::gaussian_vector(rng, 6);
    const IndexSet S{0, 1, 2}, L{3, 4, 5, 6, 7, 8};
    const auto g = gamma_closed_form(bank, z, S, L, 0.5);
    if (!g) continue;
    const double mu = max_coherence(direct_design_state(bank, S, 0.5), bank, L);
    EXPECT_GE(*g, gamma_lower_bound(mu, L.size()) - 1e-12);
  }
}

TEST(GammaClosedForm, CloseToExactForNearOrthogonalSets) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 30; ++t) {
    // Nearly orthogonal L: scaled axes plus small noise.
    RowMatrix rows = RowMatrix::Zero(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i) rows(i, i) = 1.0 + i;
    rows += oracle::gaussian_rows(rng, 6, 6, 0.01);
    const EmbeddingBank bank(rows);
    const Vector z = oracle::gaussian_vector(rng, 6);
    const IndexSet S{0}, L{1, 2, 3, 4, 5};
    if (max_coherence(direct_design_state(bank, S, 1.0), bank, L) > 0.05) continue;
    ++checked;
    EXPECT_NEAR(gamma_closed_form(bank, z, S, L, 1.0).value(), gamma_exact(bank, z, S, L, 1.0).value(), 0.02);
  }
  EXPECT_GE(checked, 30);
}

TEST(GammaExact, Errors) {
  std::mt19937_64 rng(8);
  const auto bank = random_bank(rng, 6, 3);
  const Vector z = oracle::gaussian_vector(rng, 3);
  EXPECT_THROW(gamma_exact(bank, z, {0, 1}, {1, 2}, 1.0), InvalidArgument);
  EXPECT_THROW(gamma_closed_form(bank, z, {0, 1}, {1, 2}, 1.0), InvalidArgument);
  EXPECT_THROW(gamma_exact(bank, z, {0}, {}, 1.0), InvalidArgument);
  EXPECT_THROW(gamma_exact(bank, z, {0}, {9}, 1.0), InvalidArgument);
  EXPECT_FALSE(gamma_exact(bank, Vector::Zero(3), {0}, {1, 2}, 1.0).has_value());
}

TEST(FarthestPoint, Examples) {
  std::mt19937_64 rng(9);
  const auto bank = random_bank(rng, 8, 3);
  auto all = farthest_point_sample(bank, 8, 5);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, iota_indices(8));

  RowMatrix line(3, 1);
  line << 0.0, 1.0, 2.0;
  EXPECT_EQ(farthest_point_sample_from(EmbeddingBank(line), iota_indices(3), 2, 0), (IndexSet{0, 2}));
  EXPECT_EQ(farthest_point_sample(bank, 3, 17), farthest_point_sample(bank, 3, 17));
  EXPECT_THROW(farthest_point_sample(bank, 9, 1), InvalidArgument);
}

double min_pairwise(const EmbeddingBank& bank, const IndexSet& idx) {
  double m = INFINITY;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) m = std::min(m, (bank.row(idx[a]) - bank.row(idx[b])).norm());
  return m;
}

TEST(FarthestPoint, SpreadsBetterThanRandom) {
  std::mt19937_64 rng(10);
  int wins = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto bank = random_bank(rng, 100, 4);
    Rng draw(t);
    const auto random_set = sample_without_replacement(iota_indices(100), 8, draw);
    if (min_pairwise(bank, farthest_point_sample(bank, 8, t)) >= min_pairwise(bank, random_set)) ++wins;
  }
  EXPECT_GE(wins, 190);
}

TEST(EstimateGammaMin, SingletonCellIsOne) {
  std::mt19937_64 rng(11);
  const auto demo = random_bank(rng, 20, 4);
  const auto queries = random_bank(rng, 5, 4);
  const auto report = estimate_gamma_min(demo, queries, {1}, {1.0}, 1, 3);
  ASSERT_EQ(report.cells.size(), 1u);
  EXPECT_EQ(report.cells[0].gamma_min_exact.value(), 1.0);
  EXPECT_EQ(report.cells[0].violations, 0u);
}

TEST(EstimateGammaMin, DeterministicAndShaped) {
  std::mt19937_64 rng(12);
  const auto demo = random_bank(rng, 60, 6);
  const auto queries = random_bank(rng, 10, 6);
  const auto a = estimate_gamma_min(demo, queries, {2, 5}, {0.5, 2.0, 9.0}, 25, 42);
  const auto b = estimate_gamma_min(demo, queries, {2, 5}, {0.5, 2.0, 9.0}, 25, 42);
  ASSERT_EQ(a.cells.size(), 6u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].gamma_min_exact, b.cells[i].gamma_min_exact);
    EXPECT_EQ(a.cells[i].gamma_min_closed, b.cells[i].gamma_min_closed);
    EXPECT_EQ(a.cells[i].trials, 25u);
    ASSERT_TRUE(a.cells[i].gamma_min_exact.has_value());
    EXPECT_GT(*a.cells[i].gamma_min_exact, 0.0);
    EXPECT_LE(*a.cells[i].bound_min, 1.0);
  }
  EXPECT_EQ(a.cells[0].k, 2u);
  EXPECT_EQ(a.cells[5].beta, 9.0);
}

TEST(EstimateGammaMin, Errors) {
  std::mt19937_64 rng(13);
  const auto demo = random_bank(rng, 6, 3);
  EXPECT_THROW(estimate_gamma_min(demo, demo, {7}, {1.0}, 5, 0), InvalidArgument);
  EXPECT_THROW(estimate_gamma_min(demo, demo, {2}, {0.0}, 5, 0), InvalidArgument);
  EXPECT_THROW(estimate_gamma_min(demo, demo, {2}, {1.0}, 0, 0), InvalidArgument);
  EXPECT_THROW(estimate_gamma_min(demo, random_bank(rng, 3, 4), {2}, {1.0}, 5, 0), InvalidArgument);
}

TEST(Rng, DeriveSeedSeparatesPaths) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
  Rng r(5);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(r, 7), 7u);
}

}  // namespace
}  // namespace kite
