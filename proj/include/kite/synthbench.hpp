#pragma once

// Synthetic linear-model benchmark.
//
// Per run: theta* ~ N(0, sigma^2 I), training rows x ~ N(mu_train 1, sigma^2 I),
// y = <x, theta*> + eps with eps ~ N(0, 1), test queries
// z ~ N((mu_train + mu_test) 1, sigma^2 I). For every test query each method
// picks k training rows conditioned on z, a ridge estimator is fit on them and
// the error |<z, theta* - theta_hat>| is recorded. Errors are averaged over the
// queries of a run, then mean and standard deviation are taken over runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kite/baselines.hpp"
#include "kite/errors.hpp"
#include "kite/rng.hpp"
#include "kite/selector.hpp"
#include "kite/types.hpp"

namespace kite {

enum class SynthMethod { lite, dense, dpp, random };

inline const char* to_string(SynthMethod m) {
  switch (m) {
    case SynthMethod::lite: return "lite";
    case SynthMethod::dense: return "dense";
    case SynthMethod::dpp: return "dpp";
    case SynthMethod::random: return "random";
  }
  return "?";
}

inline SynthMethod parse_synth_method(const std::string& s) {
  if (s == "lite" || s == "kite") return SynthMethod::lite;
  if (s == "dense") return SynthMethod::dense;
  if (s == "dpp") return SynthMethod::dpp;
  if (s == "random") return SynthMethod::random;
  throw InvalidArgument("unknown synth method '" + s + "' (expected lite, dense, dpp, random)");
}

struct SynthConfig {
  std::size_t d = 5;
  std::vector<std::size_t> n_grid{1000};   // train pool size N (one cell per value)
  std::vector<double> mu_test_grid{0.0};   // test mean shift (one cell per value)
  std::size_t n_test = 200;                // test queries per run
  std::size_t k = 5;
  double sigma = 5.0;
  double mu_train = 0.0;
  double beta_fit = 0.02;                  // ridge regularizer of the estimator
  double beta_select = 0.02;               // regularizer inside the LITE selector
  std::size_t runs = 20;
  std::vector<SynthMethod> methods{SynthMethod::lite, SynthMethod::dense, SynthMethod::dpp};
  std::vector<double> lambda_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  Similarity dense_similarity = Similarity::cosine;
  KernelSpec dpp_kernel = KernelSpec::gaussian(5.0);
  double dpp_tau = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(d >= 1, "synth: d must be >= 1");
    detail::require(k >= 1, "synth: k must be >= 1");
    detail::require(!n_grid.empty() && !mu_test_grid.empty(), "synth: sweep grids must be non-empty");
    for (auto n : n_grid) detail::require(n >= k, "synth: n must be >= k");
    for (auto mu : mu_test_grid) detail::require(std::isfinite(mu), "synth: mu_test must be finite");
    detail::require(n_test >= 1, "synth: n_test must be >= 1");
    detail::require(runs >= 1, "synth: runs must be >= 1");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "synth: sigma must be positive");
    detail::require(std::isfinite(mu_train), "synth: mu_train must be finite");
    detail::require(beta_fit > 0.0 && beta_select > 0.0, "synth: beta must be positive");
    detail::require(!methods.empty(), "synth: at least one method required");
    for (auto m : methods) {
      if (m == SynthMethod::lite) detail::require(!lambda_grid.empty(), "synth: lambda grid must be non-empty");
    }
    for (auto l : lambda_grid) detail::require(l >= 0.0 && std::isfinite(l), "synth: lambda must be >= 0");
    detail::require(dpp_tau > 0.0, "synth: dpp tau must be positive");
    dpp_kernel.validate();
  }
};

struct SynthData {
  Vector theta_star;
  RowMatrix X_train;
  Vector y_train;
  RowMatrix Z_test;
};

inline SynthData generate_synthetic(const SynthConfig& config, std::size_t n, double mu_test,
                                    std::uint64_t run_seed) {
  config.validate();
  detail::require(n >= 1, "generate_synthetic: n must be >= 1");
  Rng rng(run_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(config.d);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto nt = static_cast<Eigen::Index>(config.n_test);

  SynthData data;
  data.theta_star.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) data.theta_star[j] = config.sigma * gauss(rng);
  data.X_train.resize(nn, d);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X_train(i, j) = config.mu_train + config.sigma * gauss(rng);
  }
  data.y_train = data.X_train * data.theta_star;
  for (Eigen::Index i = 0; i < nn; ++i) data.y_train[i] += gauss(rng);
  const double z_mean = config.mu_train + mu_test;
  data.Z_test.resize(nt, d);
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.Z_test(i, j) = z_mean + config.sigma * gauss(rng);
  }
  return data;
}

/// (beta I + X^T X)^{-1} X^T y by direct Cholesky solve.
template <typename Derived>
Vector ridge_fit(const Eigen::MatrixBase<Derived>& X, const VectorRef& y, double beta) {
  detail::require(X.rows() >= 1, "ridge_fit: need at least one row");
  detail::require_dim(y.size(), X.rows(), "ridge_fit: responses");
  detail::require(beta > 0.0, "ridge_fit: beta must be positive");
  const auto d = X.cols();
  Matrix V = beta * Matrix::Identity(d, d);
  V.noalias() += X.transpose() * X;
  const Vector rhs = X.transpose() * y;
  Eigen::LLT<Matrix> llt(V);
  if (llt.info() != Eigen::Success) throw NumericalDegeneracy("ridge_fit: normal matrix not positive definite");
  return llt.solve(rhs);
}

/// (1/N) sum_j |<z_j, theta* - theta_hat>|
template <typename Derived>
double mae_eval(const VectorRef& theta_star, const VectorRef& theta_hat, const Eigen::MatrixBase<Derived>& Z) {
  detail::require_dim(theta_hat.size(), theta_star.size(), "mae_eval");
  detail::require_dim(Z.cols(), theta_star.size(), "mae_eval: test rows");
  detail::require(Z.rows() >= 1, "mae_eval: need at least one test row");
  const Vector diff = theta_star - theta_hat;
  return (Z * diff).cwiseAbs().mean();
}

struct MethodStats {
  std::string method;
  double lambda = 0.0;              // lite only
  double mean_abs_error = 0.0;      // mean over runs of per-run mean error
  double std_abs_error = 0.0;       // sample std over runs (0 for one run)
  std::vector<double> per_run;
};

struct SynthCell {
  std::size_t n = 0;
  double mu_test = 0.0;
  std::vector<MethodStats> methods;      // lite entry uses the best lambda
  std::vector<MethodStats> lite_lambda;  // one entry per lambda in the grid
  double best_lambda = 0.0;

  const MethodStats* find(const std::string& name) const {
    for (const auto& m : methods) {
      if (m.method == name) return &m;
    }
    return nullptr;
  }
};

struct SynthReport {
  SynthConfig config;
  std::vector<SynthCell> cells;
};

namespace detail {

inline MethodStats summarize(std::string name, double lambda, std::vector<double> per_run) {
  MethodStats s;
  s.method = std::move(name);
  s.lambda = lambda;
  const double n = static_cast<double>(per_run.size());
  double sum = 0.0;
  for (double v : per_run) sum += v;
  s.mean_abs_error = sum / n;
  double ss = 0.0;
  for (double v : per_run) ss += (v - s.mean_abs_error) * (v - s.mean_abs_error);
  s.std_abs_error = per_run.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.per_run = std::move(per_run);
  return s;
}

inline double subset_error(const SynthData& data, const std::vector<std::size_t>& subset, const VectorRef& z,
                           double beta_fit) {
  const auto d = data.X_train.cols();
  RowMatrix Xs(static_cast<Eigen::Index>(subset.size()), d);
  Vector ys(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t r = 0; r < subset.size(); ++r) {
    Xs.row(static_cast<Eigen::Index>(r)) = data.X_train.row(static_cast<Eigen::Index>(subset[r]));
    ys[static_cast<Eigen::Index>(r)] = data.y_train[static_cast<Eigen::Index>(subset[r])];
  }
  const Vector theta_hat = ridge_fit(Xs, ys, beta_fit);
  return std::abs(z.dot(data.theta_star - theta_hat));
}

}  // namespace detail

inline SynthCell run_cell(const SynthConfig& config, std::size_t n, double mu_test) {
  const std::size_t L = config.lambda_grid.size();
  const bool has_lite = std::find(config.methods.begin(), config.methods.end(), SynthMethod::lite) !=
                        config.methods.end();
  std::vector<std::vector<double>> other_runs(config.methods.size());
  std::vector<std::vector<double>> lite_runs(has_lite ? L : 0);

  for (std::size_t run = 0; run < config.runs; ++run) {
    const SynthData data = generate_synthetic(config, n, mu_test, derive_seed(config.seed, {run}));
    const EmbeddingBank bank(data.X_train);
    std::vector<double> other_sum(config.methods.size(), 0.0);
    std::vector<double> lite_sum(lite_runs.size(), 0.0);

    for (Eigen::Index qi = 0; qi < data.Z_test.rows(); ++qi) {
      const Vector z = data.Z_test.row(qi).transpose();
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        switch (config.methods[mi]) {
          case SynthMethod::lite:
            for (std::size_t li = 0; li < L; ++li) {
              SelectionConfig sc;
              sc.k = config.k;
              sc.beta = config.beta_select;
              sc.lambda = config.lambda_grid[li];
              lite_sum[li] += detail::subset_error(data, select(bank, z, sc).indices, z, config.beta_fit);
            }
            break;
          case SynthMethod::dense:
            other_sum[mi] += detail::subset_error(
                data, select_dense_topk(bank, z, config.k, config.dense_similarity).indices, z, config.beta_fit);
            break;
          case SynthMethod::dpp: {
            BaselineSpec spec;
            spec.method = BaselineMethod::dpp_greedy;
            spec.similarity = Similarity::cosine;
            spec.kernel = config.dpp_kernel;
            spec.relevance_temp = config.dpp_tau;
            other_sum[mi] +=
                detail::subset_error(data, select_dpp_greedy(bank, z, config.k, spec).indices, z, config.beta_fit);
            break;
          }
          case SynthMethod::random: {
            const auto seed = derive_seed(config.seed ^ 0x52414E44ull, {run, static_cast<std::uint64_t>(qi)});
            other_sum[mi] += detail::subset_error(data, select_random(bank, config.k, seed).indices, z,
                                                  config.beta_fit);
            break;
          }
        }
      }
    }
    const double nq = static_cast<double>(data.Z_test.rows());
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) other_runs[mi].push_back(other_sum[mi] / nq);
    for (std::size_t li = 0; li < lite_runs.size(); ++li) lite_runs[li].push_back(lite_sum[li] / nq);
  }

  SynthCell cell;
  cell.n = n;
  cell.mu_test = mu_test;
  for (std::size_t li = 0; li < lite_runs.size(); ++li) {
    cell.lite_lambda.push_back(detail::summarize("lite", config.lambda_grid[li], std::move(lite_runs[li])));
  }
  std::size_t best = 0;
  for (std::size_t li = 1; li < cell.lite_lambda.size(); ++li) {
    if (cell.lite_lambda[li].mean_abs_error < cell.lite_lambda[best].mean_abs_error) best = li;
  }
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    if (config.methods[mi] == SynthMethod::lite) {
      cell.methods.push_back(cell.lite_lambda[best]);
      cell.best_lambda = cell.lite_lambda[best].lambda;
    } else {
      cell.methods.push_back(detail::summarize(to_string(config.methods[mi]), 0.0, std::move(other_runs[mi])));
    }
  }
  return cell;
}

inline SynthReport run_sweep(const SynthConfig& config) {
  config.validate();
  SynthReport report;
  report.config = config;
  for (auto n : config.n_grid) {
    for (auto mu : config.mu_test_grid) report.cells.push_back(run_cell(config, n, mu));
  }
  return report;
}

}  // namespace kite
