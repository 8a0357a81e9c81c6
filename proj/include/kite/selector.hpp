#pragma once

// Greedy relevance + diversity exemplar selection.
//
// For a query z and the current selected set S each unselected candidate x
// is scored as
//
//   rel(x) = (z^T V_S^{-1} x)^2 / (1 + x^T V_S^{-1} x)
//   div(x) = log(1 + x^T V_S^{-1} x)
//   total  = rel + lambda * div
//
// and the argmax is appended to S. With a non-linear kernel the same rule is
// evaluated in the kernel's feature space through the residual kernel k_S:
// x^T V^{-1} y = k_S(x, y) / beta. The linear kernel therefore reproduces the
// Euclidean rule exactly, whichever of the two paths computes it.
//
// Both paths keep per-candidate caches of the two quadratic forms and update
// them after each selection in O(n d) instead of re-evaluating V_S^{-1} x for
// every candidate.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "kite/config.hpp"
#include "kite/errors.hpp"
#include "kite/kernels.hpp"
#include "kite/linalg.hpp"
#include "kite/types.hpp"

namespace kite {

inline StepScore combine(double rel, double div, double lambda) {
  return StepScore{rel, div, rel + lambda * div};
}

inline StepScore score_candidate(const DesignState& state, const VectorRef& z, const VectorRef& x,
                                 const SelectionConfig& config) {
  const double zx = quad_form(state, z, x);
  const double xx = quad_form(state, x, x);
  if (xx < 0.0) throw NumericalDegeneracy("score_candidate: negative quadratic form x^T V^-1 x");
  return combine(zx * zx / (1.0 + xx), std::log1p(xx), config.lambda);
}

inline StepScore score_from_residuals(double kzx, double kxx, double beta, double lambda, ScoreForm form) {
  if (form == ScoreForm::box) return combine(kzx * kzx / (beta + kxx), std::log(beta + kxx), lambda);
  return combine(kzx * kzx / (beta * (beta + kxx)), std::log1p(kxx / beta), lambda);
}

inline StepScore score_candidate(const KernelState& state, const EmbeddingBank& bank, const VectorRef& z,
                                 const VectorRef& x, const SelectionConfig& config) {
  const double kzx = residual_kernel(state, bank, z, x);
  const double kxx = residual_kernel(state, bank, x, x);
  return score_from_residuals(kzx, kxx, state.beta, config.lambda, config.score_form);
}

namespace detail {

inline bool use_design_path(const SelectionConfig& config, std::size_t dim) {
  switch (config.path) {
    case SelectionPath::design: return true;
    case SelectionPath::kernel: return false;
    case SelectionPath::automatic:
      return config.kernel.kind == KernelKind::linear && dim <= 4 * config.k;
  }
  return false;
}

// Lowest index wins ties: only a strictly larger score replaces the incumbent.
template <typename ScoreFn>
std::size_t argmax_unselected(std::size_t n, const std::vector<char>& taken, ScoreFn&& score, StepScore& best) {
  std::size_t arg = n;
  best.total = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) continue;
    const StepScore s = score(i);
    if (std::isnan(s.total)) {
      throw NumericalDegeneracy("select: score of candidate " + std::to_string(i) + " is NaN");
    }
    if (arg == n || s.total > best.total) {
      arg = i;
      best = s;
    }
  }
  return arg;
}

inline void select_design(const EmbeddingBank& bank, const VectorRef& z, const SelectionConfig& config,
                          std::size_t steps, SelectionResult& out) {
  const RowMatrix& X = bank.vectors();
  const std::size_t n = bank.size();
  DesignState state = init_design(bank.dim(), config.beta);

  // p_i = z^T V^{-1} x_i, q_i = x_i^T V^{-1} x_i
  Vector p = (X * z) / config.beta;
  Vector q = X.rowwise().squaredNorm() / config.beta;
  std::vector<char> taken(n, 0);

  for (std::size_t step = 0; step < steps; ++step) {
    StepScore best;
    const std::size_t s = argmax_unselected(n, taken, [&](std::size_t i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (q[ii] < 0.0) {
        throw NumericalDegeneracy("select: quadratic form x^T V^-1 x went negative for candidate " +
                                  std::to_string(i));
      }
      return combine(p[ii] * p[ii] / (1.0 + q[ii]), std::log1p(q[ii]), config.lambda);
    }, best);

    taken[s] = 1;
    out.indices.push_back(s);
    out.steps.push_back({s, best.rel, best.div, best.total});
    if (step + 1 == steps) break;

    const auto xs = bank.row(s);
    const Vector u = state.inv * xs;
    const double c = 1.0 + xs.dot(u);
    const double pz = z.dot(u);
    const Vector w = X * u;
    p -= (pz / c) * w;
    q -= w.cwiseAbs2() / c;
    rank_one_update(state, xs);
  }
}

inline void select_kernel(const EmbeddingBank& bank, const VectorRef& z, const SelectionConfig& config,
                          std::size_t steps, SelectionResult& out) {
  const RowMatrix& X = bank.vectors();
  const std::size_t n = bank.size();
  const auto nn = static_cast<Eigen::Index>(n);
  const double beta = config.beta;
  KernelState state = init_kernel_state(config.kernel, beta);

  const Vector sq = X.rowwise().squaredNorm();
  const Vector kz = kernel_against(config.kernel, X, z, sq);
  // residual_self_i = k_S(x_i, x_i), residual_z_i = k_S(z, x_i)
  Vector residual_self = kernel_diagonal(config.kernel, X);
  Vector residual_z = kz;
  // Column j holds (L^{-1} k_S(x_i))_j for every candidate i.
  Matrix coords(nn, static_cast<Eigen::Index>(steps));
  Vector z_coords(static_cast<Eigen::Index>(steps));
  std::vector<char> taken(n, 0);

  for (std::size_t step = 0; step < steps; ++step) {
    StepScore best;
    const std::size_t s = argmax_unselected(n, taken, [&](std::size_t i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double kxx = clamp_residual(residual_self[ii], "select");
      return score_from_residuals(residual_z[ii], kxx, beta, config.lambda, config.score_form);
    }, best);

    taken[s] = 1;
    out.indices.push_back(s);
    out.steps.push_back({s, best.rel, best.div, best.total});
    if (step + 1 == steps) break;

    extend_kernel_state(state, bank, s);
    const auto j = static_cast<Eigen::Index>(step);
    const auto row = state.chol.row(j).head(j);
    const double pivot = state.chol(j, j);

    Vector col = kernel_against(config.kernel, X, bank.row(s), sq);
    if (j > 0) col.noalias() -= coords.leftCols(j) * row.transpose();
    col /= pivot;
    coords.col(j) = col;
    z_coords[j] = (kz[static_cast<Eigen::Index>(s)] - (j > 0 ? z_coords.head(j).dot(row) : 0.0)) / pivot;

    residual_self -= col.cwiseAbs2();
    residual_z -= z_coords[j] * col;
  }
}

inline EmbeddingBank normalized_copy(const EmbeddingBank& bank) {
  RowMatrix rows = bank.vectors();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return EmbeddingBank(std::move(rows), bank.ids(), bank.source_path());
}

}  // namespace detail

/// Greedy selection of min(k, n) candidates for query `z`.
inline SelectionResult select(const EmbeddingBank& bank, const VectorRef& z, const SelectionConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  detail::require(bank.size() >= 1, "select: empty bank");
  detail::require_dim(z.size(), static_cast<Eigen::Index>(bank.dim()), "select: query");
  detail::require(z.allFinite(), "select: query contains non-finite values");

  SelectionResult out;
  out.config = config;
  const std::size_t steps = std::min(config.k, bank.size());
  if (config.k > bank.size()) {
    out.warnings.push_back("k=" + std::to_string(config.k) + " exceeds bank size " +
                           std::to_string(bank.size()) + "; selected all candidates");
  }
  out.indices.reserve(steps);
  out.steps.reserve(steps);

  auto run = [&](const EmbeddingBank& b, const VectorRef& q) {
    if (detail::use_design_path(config, b.dim())) {
      detail::select_design(b, q, config, steps, out);
    } else {
      detail::select_kernel(b, q, config, steps, out);
    }
  };

  if (config.normalize_inputs) {
    const EmbeddingBank normalized = detail::normalized_copy(bank);
    const double zn = z.norm();
    const Vector zq = zn > 0.0 ? Vector(z / zn) : Vector(z);
    run(normalized, zq);
  } else {
    run(bank, z);
  }

  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace kite
