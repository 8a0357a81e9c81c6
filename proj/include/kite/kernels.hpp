#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kite/errors.hpp"
#include "kite/types.hpp"

namespace kite {

enum class KernelKind { linear, polynomial, gaussian };

/// Kernel choice plus its hyperparameters. Fields unused by `kind` are ignored.
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double c = 1.0;      // polynomial offset
  int m = 3;           // polynomial degree
  double sigma = 1.0;  // gaussian length-scale

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(double c, int m) { return {KernelKind::polynomial, c, m, 1.0}; }
  static KernelSpec gaussian(double sigma) { return {KernelKind::gaussian, 1.0, 3, sigma}; }

  void validate() const {
    if (kind == KernelKind::polynomial) {
      detail::require(m >= 1, "polynomial kernel degree must be >= 1");
      detail::require(std::isfinite(c), "polynomial kernel offset must be finite");
    }
    if (kind == KernelKind::gaussian) {
      detail::require(sigma > 0.0 && std::isfinite(sigma), "gaussian kernel sigma must be positive");
    }
  }

  friend bool operator==(const KernelSpec& a, const KernelSpec& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case KernelKind::linear: return true;
      case KernelKind::polynomial: return a.c == b.c && a.m == b.m;
      case KernelKind::gaussian: return a.sigma == b.sigma;
    }
    return false;
  }
};

inline double kernel_eval(const KernelSpec& spec, const VectorRef& x, const VectorRef& y) {
  detail::require_dim(y.size(), x.size(), "kernel_eval");
  switch (spec.kind) {
    case KernelKind::linear:
      return x.dot(y);
    case KernelKind::polynomial:
      return std::pow(x.dot(y) + spec.c, spec.m);
    case KernelKind::gaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
  }
  return 0.0;
}

/// k(x_i, z) for every bank row, evaluated with matrix-vector products.
inline Vector kernel_against(const KernelSpec& spec, const RowMatrix& rows, const VectorRef& z,
                             const Vector& row_sq_norms) {
  detail::require_dim(z.size(), rows.cols(), "kernel_against");
  Vector dots = rows * z;
  switch (spec.kind) {
    case KernelKind::linear:
      return dots;
    case KernelKind::polynomial:
      return dots.unaryExpr([&](double v) { return std::pow(v + spec.c, spec.m); });
    case KernelKind::gaussian: {
      const double zz = z.squaredNorm();
      const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
      Vector out(dots.size());
      for (Eigen::Index i = 0; i < dots.size(); ++i) {
        // Clamp rounding-induced negative distances; exact duplicates must map to 1.
        const double dist = std::max(0.0, row_sq_norms[i] + zz - 2.0 * dots[i]);
        out[i] = std::exp(scale * dist);
      }
      return out;
    }
  }
  return dots;
}

/// Self-kernel k(x, x) for every row.
inline Vector kernel_diagonal(const KernelSpec& spec, const RowMatrix& rows) {
  const Vector sq = rows.rowwise().squaredNorm();
  switch (spec.kind) {
    case KernelKind::linear: return sq;
    case KernelKind::polynomial:
      return sq.unaryExpr([&](double v) { return std::pow(v + spec.c, spec.m); });
    case KernelKind::gaussian: return Vector::Ones(rows.rows());
  }
  return sq;
}

// ---------------------------------------------------------------------------
// Textual encoding: `linear`, `poly:c=<real>,m=<int>`, `rbf:sigma=<real>`.
// Omitted parameters keep their defaults.

namespace detail {

inline double parse_real(std::string_view s, const std::string& ctx) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidArgument("kernel spec '" + ctx + "': cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline KernelSpec parse_kernel_spec(std::string_view text) {
  const std::string ctx(text);
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view params = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  KernelSpec spec;
  if (name == "linear") {
    spec.kind = KernelKind::linear;
  } else if (name == "poly") {
    spec.kind = KernelKind::polynomial;
  } else if (name == "rbf") {
    spec.kind = KernelKind::gaussian;
  } else {
    throw InvalidArgument("unknown kernel '" + ctx + "' (expected linear, poly:c=..,m=.., rbf:sigma=..)");
  }

  std::size_t pos = 0;
  while (pos < params.size()) {
    auto comma = params.find(',', pos);
    if (comma == std::string_view::npos) comma = params.size();
    const std::string_view kv = params.substr(pos, comma - pos);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("kernel spec '" + ctx + "': expected key=value");
    const std::string_view key = kv.substr(0, eq);
    const std::string_view val = kv.substr(eq + 1);
    if (spec.kind == KernelKind::polynomial && key == "c") {
      spec.c = detail::parse_real(val, ctx);
    } else if (spec.kind == KernelKind::polynomial && key == "m") {
      const double m = detail::parse_real(val, ctx);
      if (m != std::floor(m)) throw InvalidArgument("kernel spec '" + ctx + "': degree must be an integer");
      spec.m = static_cast<int>(m);
    } else if (spec.kind == KernelKind::gaussian && key == "sigma") {
      spec.sigma = detail::parse_real(val, ctx);
    } else {
      throw InvalidArgument("kernel spec '" + ctx + "': unknown parameter '" + std::string(key) + "'");
    }
    pos = comma + 1;
  }
  spec.validate();
  return spec;
}

inline std::string to_string(const KernelSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  switch (spec.kind) {
    case KernelKind::linear: os << "linear"; break;
    case KernelKind::polynomial: os << "poly:c=" << spec.c << ",m=" << spec.m; break;
    case KernelKind::gaussian: os << "rbf:sigma=" << spec.sigma; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Residual kernel over a growing selected set S:
//   k_S(a, b) = k(a, b) - k_S(a)^T (K_S + beta I)^{-1} k_S(b)
// with K_S + beta I = L L^T grown one row per selection.

/// Slack below zero tolerated on residual self-kernels and pivots before
/// reporting numerical degeneracy.
inline constexpr double kResidualSlack = 1e-9;

struct KernelState {
  KernelSpec spec;
  double beta = 0.0;
  std::vector<std::size_t> selected;
  Matrix chol;  // |S| x |S| lower-triangular factor of K_S + beta I

  std::size_t size() const { return selected.size(); }
};

inline KernelState init_kernel_state(const KernelSpec& spec, double beta) {
  spec.validate();
  detail::require(beta > 0.0 && std::isfinite(beta), "init_kernel_state: beta must be positive");
  return KernelState{spec, beta, {}, Matrix(0, 0)};
}

/// [k(a, x_s)]_{s in S}
inline Vector selected_kernel_vector(const KernelState& state, const EmbeddingBank& bank, const VectorRef& a) {
  detail::require_dim(a.size(), static_cast<Eigen::Index>(bank.dim()), "selected_kernel_vector");
  Vector out(static_cast<Eigen::Index>(state.size()));
  for (std::size_t j = 0; j < state.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] = kernel_eval(state.spec, a, bank.row(state.selected[j]));
  }
  return out;
}

/// L^{-1} k_S(a): the coordinates whose inner products give the projection term.
inline Vector whitened_kernel_vector(const KernelState& state, const EmbeddingBank& bank, const VectorRef& a) {
  Vector v = selected_kernel_vector(state, bank, a);
  if (v.size() > 0) state.chol.triangularView<Eigen::Lower>().solveInPlace(v);
  return v;
}

namespace detail {

inline double clamp_residual(double r, const char* where) {
  if (r >= 0.0) return r;
  if (r >= -kResidualSlack) return 0.0;
  throw NumericalDegeneracy(std::string(where) + ": residual self-kernel " + std::to_string(r) +
                            " is negative beyond slack");
}

}  // namespace detail

inline double residual_kernel(const KernelState& state, const EmbeddingBank& bank, const VectorRef& a,
                              const VectorRef& b) {
  detail::require_dim(a.size(), static_cast<Eigen::Index>(bank.dim()), "residual_kernel");
  detail::require_dim(b.size(), static_cast<Eigen::Index>(bank.dim()), "residual_kernel");
  const double kab = kernel_eval(state.spec, a, b);
  const bool self = a == b;
  if (state.size() == 0) return self ? detail::clamp_residual(kab, "residual_kernel") : kab;
  const Vector wa = whitened_kernel_vector(state, bank, a);
  const Vector wb = self ? wa : whitened_kernel_vector(state, bank, b);
  const double r = kab - wa.dot(wb);
  return self ? detail::clamp_residual(r, "residual_kernel") : r;
}

/// Appends bank row `idx` to S and grows the factor by one row:
/// L r = k_S(x), new pivot sqrt(k(x,x) + beta - r^T r).
inline void extend_kernel_state(KernelState& state, const EmbeddingBank& bank, std::size_t idx) {
  detail::require(idx < bank.size(), "extend_kernel_state: index out of range");
  detail::require(std::find(state.selected.begin(), state.selected.end(), idx) == state.selected.end(),
                  "extend_kernel_state: index " + std::to_string(idx) + " already selected");
  const auto x = bank.row(idx);
  const Vector r = whitened_kernel_vector(state, bank, x);
  const double pivot_sq = kernel_eval(state.spec, x, x) + state.beta - r.squaredNorm();
  // A zero pivot would make the factor singular, so only strictly positive values pass.
  if (!(pivot_sq > 0.0)) {
    throw NumericalDegeneracy("extend_kernel_state: kernel matrix not positive definite for beta=" +
                              std::to_string(state.beta) + " (pivot^2 = " + std::to_string(pivot_sq) + ")");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(state.size());
  state.chol.conservativeResize(n + 1, n + 1);
  state.chol.col(n).setZero();
  state.chol.row(n).head(n) = r.transpose();
  state.chol(n, n) = std::sqrt(pivot_sq);
  state.selected.push_back(idx);
}

}  // namespace kite
