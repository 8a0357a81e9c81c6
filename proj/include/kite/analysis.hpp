#pragma once

// Submodularity-ratio tooling for f_z(S) = -z^T V_S^{-1} z.
//
// gamma_exact evaluates the ratio
//
//   sum_{x in L} (f(S + x) - f(S)) / (f(S + L) - f(S))
//
// by direct factorization of every design matrix involved. gamma_closed_form
// evaluates the coherence expression obtained by truncating
// (I + X_L^T V_S^{-1} X_L)^{-1} after its first-order Neumann term, so the two
// drift apart as coherences grow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kite/errors.hpp"
#include "kite/linalg.hpp"
#include "kite/rng.hpp"
#include "kite/types.hpp"

namespace kite {

using IndexSet = std::vector<std::size_t>;

/// Denominators below this are reported as an undefined ratio.
inline constexpr double kGammaDenominatorFloor = 1e-12;

/// (z^T V^{-1} x)^2 / (1 + x^T V^{-1} x)
inline double marginal_gain(const DesignState& state, const VectorRef& z, const VectorRef& x) {
  const double zx = quad_form(state, z, x);
  const double xx = quad_form(state, x, x);
  return zx * zx / (1.0 + xx);
}

inline double coherence(const DesignState& state, const VectorRef& xi, const VectorRef& xj) {
  const double ij = quad_form(state, xi, xj);
  const double ii = quad_form(state, xi, xi);
  const double jj = quad_form(state, xj, xj);
  return ij / (std::sqrt(1.0 + ii) * std::sqrt(1.0 + jj));
}

inline double gamma_lower_bound(double mu_max, std::size_t k) {
  detail::require(k >= 1, "gamma_lower_bound: k must be >= 1");
  return 1.0 / (1.0 + static_cast<double>(k - 1) * mu_max);
}

/// beta I + sum_{i in S} x_i x_i^T, accumulated in the order of S.
inline Matrix design_matrix(const EmbeddingBank& bank, const IndexSet& S, double beta) {
  const auto d = static_cast<Eigen::Index>(bank.dim());
  Matrix V = beta * Matrix::Identity(d, d);
  for (auto i : S) {
    detail::require(i < bank.size(), "design_matrix: index out of range");
    V.noalias() += bank.row(i) * bank.row(i).transpose();
  }
  return V;
}

inline double objective_from_design(const Matrix& V, const VectorRef& z) {
  Eigen::LLT<Matrix> llt(V);
  if (llt.info() != Eigen::Success) throw NumericalDegeneracy("f_z: design matrix is not positive definite");
  return -z.dot(llt.solve(z));
}

/// f_z(S) = -z^T V_S^{-1} z by direct Cholesky solve.
inline double objective_value(const EmbeddingBank& bank, const VectorRef& z, const IndexSet& S, double beta) {
  detail::require_dim(z.size(), static_cast<Eigen::Index>(bank.dim()), "objective_value");
  return objective_from_design(design_matrix(bank, S, beta), z);
}

/// Inverse design matrix of S built by direct inversion (not by rank-one updates).
inline DesignState direct_design_state(const EmbeddingBank& bank, const IndexSet& S, double beta) {
  DesignState state = init_design(bank.dim(), beta);
  const Matrix V = design_matrix(bank, S, beta);
  Eigen::LLT<Matrix> llt(V);
  state.inv = llt.solve(Matrix::Identity(V.rows(), V.cols()));
  state.inv = 0.5 * (state.inv + state.inv.transpose()).eval();
  state.count = S.size();
  return state;
}

namespace detail {

inline void check_sets(const EmbeddingBank& bank, const IndexSet& S, const IndexSet& L, const char* what) {
  require(!L.empty(), std::string(what) + ": L must be non-empty");
  for (auto i : S) require(i < bank.size(), std::string(what) + ": index in S out of range");
  for (auto i : L) {
    require(i < bank.size(), std::string(what) + ": index in L out of range");
    require(std::find(S.begin(), S.end(), i) == S.end(), std::string(what) + ": S and L overlap");
  }
}

}  // namespace detail

/// Exact ratio from direct inversions; nullopt when the joint gain is below the floor.
inline std::optional<double> gamma_exact(const EmbeddingBank& bank, const VectorRef& z, const IndexSet& S,
                                         const IndexSet& L, double beta) {
  detail::check_sets(bank, S, L, "gamma_exact");
  detail::require_dim(z.size(), static_cast<Eigen::Index>(bank.dim()), "gamma_exact");
  const Matrix VS = design_matrix(bank, S, beta);
  const double fS = objective_from_design(VS, z);
  double numerator = 0.0;
  Matrix VL = VS;
  for (auto i : L) {
    const Matrix outer = bank.row(i) * bank.row(i).transpose();
    numerator += objective_from_design(VS + outer, z) - fS;
    VL += outer;
  }
  const double denominator = objective_from_design(VL, z) - fS;
  if (!(denominator >= kGammaDenominatorFloor)) return std::nullopt;
  return numerator / denominator;
}

/// Coherence approximation sum D / (sum D - sum_{i != j} sqrt(D_i D_j) mu_ij).
inline std::optional<double> gamma_closed_form(const EmbeddingBank& bank, const VectorRef& z, const IndexSet& S,
                                               const IndexSet& L, double beta) {
  detail::check_sets(bank, S, L, "gamma_closed_form");
  const DesignState state = direct_design_state(bank, S, beta);
  std::vector<double> gains(L.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < L.size(); ++a) {
    gains[a] = marginal_gain(state, z, bank.row(L[a]));
    sum += gains[a];
  }
  if (L.size() == 1) {
    if (!(sum >= kGammaDenominatorFloor)) return std::nullopt;
    return sum / sum;
  }
  double cross = 0.0;
  for (std::size_t a = 0; a < L.size(); ++a) {
    for (std::size_t b = 0; b < L.size(); ++b) {
      if (a == b) continue;
      cross += std::sqrt(gains[a] * gains[b]) * coherence(state, bank.row(L[a]), bank.row(L[b]));
    }
  }
  const double denominator = sum - cross;
  if (!(denominator >= kGammaDenominatorFloor)) return std::nullopt;
  return sum / denominator;
}

/// max |mu_ij| over distinct pairs of `L` under V_S^{-1}; 0 for |L| < 2.
inline double max_coherence(const DesignState& state, const EmbeddingBank& bank, const IndexSet& L) {
  double mu = 0.0;
  for (std::size_t a = 0; a < L.size(); ++a) {
    for (std::size_t b = a + 1; b < L.size(); ++b) {
      mu = std::max(mu, std::abs(coherence(state, bank.row(L[a]), bank.row(L[b]))));
    }
  }
  return mu;
}

/// Farthest-point sampling within `pool`: first pick uniform, then each pick
/// maximizes the minimum Euclidean distance to the picks so far (ties: lowest
/// position in `pool`).
inline IndexSet farthest_point_sample_from(const EmbeddingBank& bank, const IndexSet& pool, std::size_t size,
                                           std::size_t start) {
  detail::require(size <= pool.size(), "farthest_point_sample: size exceeds pool");
  detail::require(start < pool.size() || size == 0, "farthest_point_sample: start outside pool");
  IndexSet chosen;
  if (size == 0) return chosen;
  chosen.reserve(size);
  std::vector<double> min_dist(pool.size(), std::numeric_limits<double>::infinity());
  std::vector<char> used(pool.size(), 0);
  std::size_t pick = start;
  for (;;) {
    used[pick] = 1;
    chosen.push_back(pool[pick]);
    if (chosen.size() == size) break;
    const auto anchor = bank.row(pool[pick]);
    std::size_t next = pool.size();
    double best = -1.0;
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (used[p]) continue;
      min_dist[p] = std::min(min_dist[p], (bank.row(pool[p]) - anchor).squaredNorm());
      if (min_dist[p] > best) {
        best = min_dist[p];
        next = p;
      }
    }
    pick = next;
  }
  return chosen;
}

inline IndexSet farthest_point_sample(const EmbeddingBank& bank, const IndexSet& pool, std::size_t size,
                                      Rng& rng) {
  detail::require(size <= pool.size(), "farthest_point_sample: size exceeds pool");
  if (size == 0) return {};
  return farthest_point_sample_from(bank, pool, size, uniform_index(rng, pool.size()));
}

inline IndexSet farthest_point_sample(const EmbeddingBank& bank, std::size_t size, std::uint64_t seed) {
  detail::require(size <= bank.size(), "farthest_point_sample: size exceeds bank");
  Rng rng(seed);
  return farthest_point_sample(bank, iota_indices(bank.size()), size, rng);
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimate of the minimum submodularity ratio over a (k, beta) grid.

struct GammaCell {
  std::size_t k = 0;
  double beta = 0.0;
  std::optional<double> gamma_min_exact;
  std::optional<double> gamma_min_closed;
  std::optional<double> bound_min;
  std::size_t trials = 0;
  std::size_t violations = 0;         // exact ratio below the coherence bound by more than 1e-6
  std::size_t undefined = 0;          // exact ratio undefined (joint gain below floor)
  double max_violation = 0.0;         // largest (bound - exact) among violating trials
};

struct GammaReport {
  std::vector<GammaCell> cells;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t total_violations() const {
    std::size_t v = 0;
    for (const auto& c : cells) v += c.violations;
    return v;
  }
};

/// One sampled (S, L, z) instance and its ratios.
struct GammaTrial {
  IndexSet S;
  IndexSet L;
  std::size_t query = 0;
  std::optional<double> exact;
  std::optional<double> closed;
  double mu_max = 0.0;
  double bound = 1.0;
};

inline constexpr double kBoundViolationTolerance = 1e-6;

/// S: uniform size in [1, k] drawn without replacement; L: farthest-point
/// sample of uniform size in [1, k] from the remaining rows; z: uniform query.
inline GammaTrial sample_gamma_trial(const EmbeddingBank& demo, const EmbeddingBank& queries, std::size_t k,
                                     double beta, Rng& rng) {
  const std::size_t n = demo.size();
  GammaTrial t;
  const std::size_t s_size = std::min<std::size_t>(1 + uniform_index(rng, k), n - 1);
  std::vector<std::size_t> perm = sample_without_replacement(iota_indices(n), n, rng);
  t.S.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s_size));
  IndexSet rest(perm.begin() + static_cast<std::ptrdiff_t>(s_size), perm.end());
  std::sort(rest.begin(), rest.end());
  const std::size_t l_size = std::min(1 + uniform_index(rng, k), rest.size());
  t.L = farthest_point_sample(demo, rest, l_size, rng);
  t.query = uniform_index(rng, queries.size());

  const auto z = queries.row(t.query);
  t.exact = gamma_exact(demo, z, t.S, t.L, beta);
  t.closed = gamma_closed_form(demo, z, t.S, t.L, beta);
  const DesignState state = direct_design_state(demo, t.S, beta);
  t.mu_max = max_coherence(state, demo, t.L);
  t.bound = gamma_lower_bound(t.mu_max, t.L.size());
  return t;
}

inline GammaReport estimate_gamma_min(const EmbeddingBank& demo, const EmbeddingBank& queries,
                                      const std::vector<std::size_t>& k_grid, const std::vector<double>& beta_grid,
                                      std::size_t trials, std::uint64_t seed) {
  detail::require(!k_grid.empty() && !beta_grid.empty(), "estimate_gamma_min: grids must be non-empty");
  detail::require(trials >= 1, "estimate_gamma_min: trials must be >= 1");
  detail::require(demo.size() >= 2, "estimate_gamma_min: demo bank needs at least two rows");
  detail::require_dim(static_cast<Eigen::Index>(queries.dim()), static_cast<Eigen::Index>(demo.dim()),
                      "estimate_gamma_min: query bank");
  for (auto k : k_grid) {
    detail::require(k >= 1, "estimate_gamma_min: k must be >= 1");
    detail::require(k <= demo.size(), "estimate_gamma_min: k=" + std::to_string(k) + " exceeds demo bank size " +
                                          std::to_string(demo.size()));
  }
  for (auto b : beta_grid) detail::require(b > 0.0 && std::isfinite(b), "estimate_gamma_min: beta must be positive");

  GammaReport report;
  report.seed = seed;
  report.trials = trials;
  std::size_t cell_index = 0;
  for (auto k : k_grid) {
    for (auto beta : beta_grid) {
      GammaCell cell;
      cell.k = k;
      cell.beta = beta;
      cell.trials = trials;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, {cell_index, trial}));
        const GammaTrial t = sample_gamma_trial(demo, queries, k, beta, rng);
        cell.bound_min = std::min(cell.bound_min.value_or(t.bound), t.bound);
        if (t.closed) cell.gamma_min_closed = std::min(cell.gamma_min_closed.value_or(*t.closed), *t.closed);
        if (!t.exact) {
          ++cell.undefined;
          continue;
        }
        cell.gamma_min_exact = std::min(cell.gamma_min_exact.value_or(*t.exact), *t.exact);
        if (*t.exact < t.bound - kBoundViolationTolerance) {
          ++cell.violations;
          cell.max_violation = std::max(cell.max_violation, t.bound - *t.exact);
        }
      }
      report.cells.push_back(cell);
      ++cell_index;
    }
  }
  return report;
}

}  // namespace kite
