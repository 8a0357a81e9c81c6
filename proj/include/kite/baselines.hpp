#pragma once

// Reference selection strategies: uniform random, dense top-k similarity and
// greedy MAP inference for a query-conditioned DPP.
//
// The DPP uses L = diag(q) S diag(q) with S_ij = k(x_i, x_j) and quality
// q_i = exp(sim(x_i, z) / tau). Greedy MAP adds the candidate with the largest
// conditional variance of L given the selected set, which is the increment of
// log det L_S; conditional variances are maintained by an incremental
// Cholesky factorization.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kite/config.hpp"
#include "kite/errors.hpp"
#include "kite/kernels.hpp"
#include "kite/rng.hpp"
#include "kite/types.hpp"

namespace kite {

namespace detail {

inline SelectionResult baseline_result(const char* method, const EmbeddingBank& bank, std::size_t k,
                                       const BaselineSpec& spec) {
  detail::require(k >= 1, std::string(method) + ": k must be >= 1");
  detail::require(bank.size() >= 1, std::string(method) + ": empty bank");
  SelectionResult out;
  out.method = method;
  out.config.k = k;
  out.config.lambda = spec.method == BaselineMethod::dpp_greedy ? 1.0 : 0.0;
  out.config.kernel = spec.kernel;
  out.baseline = spec;
  if (k > bank.size()) {
    out.warnings.push_back("k=" + std::to_string(k) + " exceeds bank size " + std::to_string(bank.size()) +
                           "; selected all candidates");
  }
  return out;
}

inline double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// sim(x_i, z) for every row. Cosine gives -inf for zero-norm rows or query.
inline Vector similarity_scores(const EmbeddingBank& bank, const VectorRef& z, Similarity similarity) {
  detail::require_dim(z.size(), static_cast<Eigen::Index>(bank.dim()), "similarity: query");
  Vector s = bank.vectors() * z;
  if (similarity == Similarity::cosine) {
    const double zn = z.norm();
    const Vector norms = bank.vectors().rowwise().norm();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s[i] = (zn > 0.0 && norms[i] > 0.0) ? s[i] / (norms[i] * zn) : -std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

inline SelectionResult select_random(const EmbeddingBank& bank, std::size_t k, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  BaselineSpec spec;
  spec.method = BaselineMethod::random;
  spec.seed = seed;
  SelectionResult out = detail::baseline_result("random", bank, k, spec);
  Rng rng(seed);
  out.indices = sample_without_replacement(iota_indices(bank.size()), std::min(k, bank.size()), rng);
  for (auto i : out.indices) out.steps.push_back({i, 0.0, 0.0, 0.0});
  out.wall_time = detail::elapsed_since(t0);
  return out;
}

inline SelectionResult select_dense_topk(const EmbeddingBank& bank, const VectorRef& z, std::size_t k,
                                         Similarity similarity = Similarity::cosine) {
  const auto t0 = std::chrono::steady_clock::now();
  BaselineSpec spec;
  spec.method = BaselineMethod::dense_topk;
  spec.similarity = similarity;
  SelectionResult out = detail::baseline_result("dense", bank, k, spec);
  const Vector s = similarity_scores(bank, z, similarity);
  std::vector<std::size_t> order = iota_indices(bank.size());
  const std::size_t take = std::min(k, bank.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = s[static_cast<Eigen::Index>(a)];
                      const double sb = s[static_cast<Eigen::Index>(b)];
                      return sa > sb || (sa == sb && a < b);
                    });
  order.resize(take);
  out.indices = order;
  for (auto i : order) {
    const double v = s[static_cast<Eigen::Index>(i)];
    out.steps.push_back({i, v, 0.0, v});
  }
  out.wall_time = detail::elapsed_since(t0);
  return out;
}

/// Greedy DPP MAP. Step records: rel = log q_i^2, div = log of the conditional
/// kernel variance, total = rel + div = log-det increment of L.
inline SelectionResult select_dpp_greedy(const EmbeddingBank& bank, const VectorRef& z, std::size_t k,
                                         const BaselineSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  spec.validate();
  BaselineSpec echo = spec;
  echo.method = BaselineMethod::dpp_greedy;
  SelectionResult out = detail::baseline_result("dpp", bank, k, echo);

  const RowMatrix& X = bank.vectors();
  const std::size_t n = bank.size();
  const auto nn = static_cast<Eigen::Index>(n);
  const std::size_t steps = std::min(k, n);

  // Zero-norm rows carry no direction; their cosine quality is taken as exp(0).
  Vector sim = similarity_scores(bank, z, spec.similarity);
  for (Eigen::Index i = 0; i < nn; ++i) {
    if (!std::isfinite(sim[i])) sim[i] = 0.0;
  }
  const Vector log_q = sim / spec.relevance_temp;
  const Vector q = log_q.array().exp();

  const Vector sq = X.rowwise().squaredNorm();
  Vector cond_s = kernel_diagonal(spec.kernel, X);  // conditional variance of S (unscaled)
  Matrix coords(nn, static_cast<Eigen::Index>(steps));
  std::vector<char> taken(n, 0);

  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t best = n;
    double best_val = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      double c = cond_s[ii];
      if (c < 0.0) {
        if (c < -kResidualSlack) {
          throw NumericalDegeneracy("select_dpp_greedy: conditional variance " + std::to_string(c) +
                                    " of candidate " + std::to_string(i) + " is negative beyond slack");
        }
        c = cond_s[ii] = 0.0;
      }
      const double val = q[ii] * q[ii] * c;
      if (best == n || val > best_val) {
        best = i;
        best_val = val;
      }
    }
    if (!(best_val > 0.0)) {
      throw NumericalDegeneracy("select_dpp_greedy: no candidate with positive conditional variance at step " +
                                std::to_string(step));
    }
    const auto bi = static_cast<Eigen::Index>(best);
    taken[best] = 1;
    out.indices.push_back(best);
    const double rel = 2.0 * log_q[bi];
    const double div = std::log(cond_s[bi]);
    out.steps.push_back({best, rel, div, rel + div});
    if (step + 1 == steps) break;

    // Conditional variances in S-space; the quality factors cancel out of the
    // Schur complement except as the q_i^2 scale applied when ranking.
    const auto j = static_cast<Eigen::Index>(step);
    Vector col = kernel_against(spec.kernel, X, bank.row(best), sq);
    if (j > 0) col.noalias() -= coords.leftCols(j) * coords.row(bi).head(j).transpose();
    col /= std::sqrt(cond_s[bi]);
    coords.col(j) = col;
    cond_s -= col.cwiseAbs2();
  }
  out.wall_time = detail::elapsed_since(t0);
  return out;
}

}  // namespace kite
