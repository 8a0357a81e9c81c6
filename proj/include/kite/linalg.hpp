#pragma once

// Incrementally maintained inverse of the regularized design matrix
//   V_S = beta * I + sum_{x in S} x x^T
// and the quadratic forms read off it.

#include <cmath>
#include <cstddef>
#include <string>

#include "kite/errors.hpp"
#include "kite/types.hpp"

namespace kite {

struct DesignState {
  std::size_t dim = 0;
  double beta = 0.0;
  Matrix inv;  // V_S^{-1}, kept symmetric
  std::size_t count = 0;
};

inline DesignState init_design(std::size_t dim, double beta) {
  detail::require(dim >= 1, "init_design: dim must be >= 1");
  detail::require(beta > 0.0 && std::isfinite(beta), "init_design: beta must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  return DesignState{dim, beta, Matrix::Identity(d, d) / beta, 0};
}

/// a^T V_S^{-1} b
inline double quad_form(const DesignState& state, const VectorRef& a, const VectorRef& b) {
  detail::require_dim(a.size(), state.inv.rows(), "quad_form");
  detail::require_dim(b.size(), state.inv.rows(), "quad_form");
  return a.dot(state.inv * b);
}

/// Sherman-Morrison update V^{-1} <- V^{-1} - (V^{-1}x)(V^{-1}x)^T / (1 + x^T V^{-1} x).
inline void rank_one_update(DesignState& state, const VectorRef& x) {
  detail::require_dim(x.size(), state.inv.rows(), "rank_one_update");
  detail::require(x.allFinite(), "rank_one_update: non-finite entries in update vector");
  const Vector u = state.inv * x;
  const double q = x.dot(u);
  if (q < 0.0) {
    throw NumericalDegeneracy("rank_one_update: design inverse lost positive definiteness (x^T V^-1 x = " +
                              std::to_string(q) + ")");
  }
  state.inv.noalias() -= (u * u.transpose()) / (1.0 + q);
  state.inv = 0.5 * (state.inv + state.inv.transpose()).eval();
  ++state.count;
}

/// log det(V + x x^T) - log det(V) = log(1 + x^T V^{-1} x), by the matrix determinant lemma.
inline double log_det_increment(const DesignState& state, const VectorRef& x) {
  const double q = quad_form(state, x, x);
  if (q < 0.0) {
    throw NumericalDegeneracy("log_det_increment: negative quadratic form " + std::to_string(q));
  }
  return std::log1p(q);
}

}  // namespace kite
