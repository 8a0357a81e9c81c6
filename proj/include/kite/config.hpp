#pragma once

// Configuration and result records shared by the selector and the baselines.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kite/errors.hpp"
#include "kite/kernels.hpp"

namespace kite {

enum class SelectionPath {
  automatic,  // design path for the linear kernel when d <= 4k, kernel path otherwise
  design,     // d x d inverse design matrix (linear kernel only)
  kernel,     // residual kernel over the selected set (any kernel)
};

enum class ScoreForm {
  exact_lift,  // rel = k_S(z,x)^2 / (beta (beta + k_S(x,x))), div = log(1 + k_S(x,x)/beta)
  box,         // rel = k_S(z,x)^2 / (beta + k_S(x,x)),          div = log(beta + k_S(x,x))
};

struct SelectionConfig {
  std::size_t k = 50;
  double beta = 0.02;
  double lambda = 0.5;
  KernelSpec kernel = KernelSpec::linear();
  bool normalize_inputs = false;
  SelectionPath path = SelectionPath::automatic;
  ScoreForm score_form = ScoreForm::exact_lift;

  void validate() const {
    detail::require(k >= 1, "selection: k must be >= 1");
    detail::require(beta > 0.0 && std::isfinite(beta), "selection: beta must be positive");
    detail::require(lambda >= 0.0 && std::isfinite(lambda), "selection: lambda must be non-negative");
    kernel.validate();
    if (path == SelectionPath::design) {
      detail::require(kernel.kind == KernelKind::linear, "selection: design path requires the linear kernel");
    }
  }
};

struct StepScore {
  double rel = 0.0;
  double div = 0.0;
  double total = 0.0;
};

struct SelectionStep {
  std::size_t index = 0;
  double rel = 0.0;
  double div = 0.0;
  double total = 0.0;
};

enum class Similarity { cosine, dot };
enum class BaselineMethod { random, dense_topk, dpp_greedy };

/// Parameters of the reference strategies.
struct BaselineSpec {
  BaselineMethod method = BaselineMethod::dense_topk;
  Similarity similarity = Similarity::cosine;  // dense ranking and DPP quality
  KernelSpec kernel = KernelSpec::gaussian(1.0);  // DPP similarity kernel
  double relevance_temp = 1.0;                 // DPP quality temperature tau
  std::uint64_t seed = 0;                      // random

  void validate() const {
    detail::require(relevance_temp > 0.0 && std::isfinite(relevance_temp), "baseline: tau must be positive");
    kernel.validate();
  }
};

struct SelectionResult {
  std::string method = "kite";
  std::vector<std::size_t> indices;
  std::vector<SelectionStep> steps;
  SelectionConfig config;
  std::optional<BaselineSpec> baseline;  // set for reference strategies
  std::vector<std::string> warnings;
  double wall_time = 0.0;  // seconds
};

}  // namespace kite
