#pragma once

// JSON records for selection results, gamma reports and synthetic sweeps.
// Non-finite numbers (only -inf similarity scores in practice) are written as
// the strings "inf", "-inf" and "nan" so every record round-trips.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "kite/analysis.hpp"
#include "kite/config.hpp"
#include "kite/kernels.hpp"
#include "kite/synthbench.hpp"

namespace kite {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidArgument("expected a number, found string '" + s + "'");
  }
  return j.get<double>();
}

inline json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

inline std::optional<double> optional_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return number(j);
}

inline std::string versions_eigen() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace detail

inline json versions() {
  return json{{"kite", kVersion}, {"eigen", detail::versions_eigen()}, {"nlohmann_json",
              std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                  "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

NLOHMANN_JSON_SERIALIZE_ENUM(SelectionPath, {{SelectionPath::automatic, "auto"},
                                             {SelectionPath::design, "design"},
                                             {SelectionPath::kernel, "kernel"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ScoreForm, {{ScoreForm::exact_lift, "exact_lift"}, {ScoreForm::box, "box"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Similarity, {{Similarity::cosine, "cosine"}, {Similarity::dot, "dot"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BaselineMethod, {{BaselineMethod::random, "random"},
                                              {BaselineMethod::dense_topk, "dense_topk"},
                                              {BaselineMethod::dpp_greedy, "dpp_greedy"}})

inline void to_json(json& j, const KernelSpec& k) { j = to_string(k); }
inline void from_json(const json& j, KernelSpec& k) { k = parse_kernel_spec(j.get<std::string>()); }

inline void to_json(json& j, const SelectionConfig& c) {
  j = json{{"k", c.k},
           {"beta", c.beta},
           {"lambda", c.lambda},
           {"kernel", c.kernel},
           {"tie_break", "lowest_index"},
           {"normalize_inputs", c.normalize_inputs},
           {"path", c.path},
           {"score_form", c.score_form}};
}

inline void from_json(const json& j, SelectionConfig& c) {
  j.at("k").get_to(c.k);
  j.at("beta").get_to(c.beta);
  j.at("lambda").get_to(c.lambda);
  j.at("kernel").get_to(c.kernel);
  j.at("normalize_inputs").get_to(c.normalize_inputs);
  j.at("path").get_to(c.path);
  j.at("score_form").get_to(c.score_form);
}

inline void to_json(json& j, const BaselineSpec& b) {
  j = json{{"method", b.method},
           {"similarity", b.similarity},
           {"kernel", b.kernel},
           {"relevance_temp", b.relevance_temp},
           {"seed", b.seed}};
}

inline void from_json(const json& j, BaselineSpec& b) {
  j.at("method").get_to(b.method);
  j.at("similarity").get_to(b.similarity);
  j.at("kernel").get_to(b.kernel);
  j.at("relevance_temp").get_to(b.relevance_temp);
  j.at("seed").get_to(b.seed);
}

inline void to_json(json& j, const SelectionStep& s) {
  j = json{{"index", s.index}, {"rel", detail::number(s.rel)}, {"div", detail::number(s.div)},
           {"total", detail::number(s.total)}};
}

inline void from_json(const json& j, SelectionStep& s) {
  j.at("index").get_to(s.index);
  s.rel = detail::number(j.at("rel"));
  s.div = detail::number(j.at("div"));
  s.total = detail::number(j.at("total"));
}

inline void to_json(json& j, const SelectionResult& r) {
  j = json{{"method", r.method}, {"indices", r.indices}, {"steps", r.steps}, {"config", r.config},
           {"warnings", r.warnings}, {"wall_time", r.wall_time}};
  if (r.baseline) j["baseline"] = *r.baseline;
}

inline void from_json(const json& j, SelectionResult& r) {
  j.at("method").get_to(r.method);
  j.at("indices").get_to(r.indices);
  j.at("steps").get_to(r.steps);
  j.at("config").get_to(r.config);
  j.at("warnings").get_to(r.warnings);
  j.at("wall_time").get_to(r.wall_time);
  if (j.contains("baseline")) r.baseline = j.at("baseline").get<BaselineSpec>();
}

inline void to_json(json& j, const GammaCell& c) {
  j = json{{"k", c.k},
           {"beta", c.beta},
           {"gamma_min_exact", detail::optional_number(c.gamma_min_exact)},
           {"gamma_min_closed", detail::optional_number(c.gamma_min_closed)},
           {"bound_min", detail::optional_number(c.bound_min)},
           {"trials", c.trials},
           {"violations", c.violations},
           {"undefined", c.undefined},
           {"max_violation", c.max_violation}};
}

inline void from_json(const json& j, GammaCell& c) {
  j.at("k").get_to(c.k);
  j.at("beta").get_to(c.beta);
  c.gamma_min_exact = detail::optional_number(j.at("gamma_min_exact"));
  c.gamma_min_closed = detail::optional_number(j.at("gamma_min_closed"));
  c.bound_min = detail::optional_number(j.at("bound_min"));
  j.at("trials").get_to(c.trials);
  j.at("violations").get_to(c.violations);
  j.at("undefined").get_to(c.undefined);
  j.at("max_violation").get_to(c.max_violation);
}

inline void to_json(json& j, const GammaReport& r) {
  j = json{{"cells", r.cells}, {"seed", r.seed}, {"trials", r.trials}};
}

inline void from_json(const json& j, GammaReport& r) {
  j.at("cells").get_to(r.cells);
  j.at("seed").get_to(r.seed);
  j.at("trials").get_to(r.trials);
}

inline void to_json(json& j, const SynthMethod& m) { j = to_string(m); }
inline void from_json(const json& j, SynthMethod& m) { m = parse_synth_method(j.get<std::string>()); }

inline void to_json(json& j, const SynthConfig& c) {
  j = json{{"d", c.d},
           {"n", c.n_grid},
           {"mu_test", c.mu_test_grid},
           {"n_test", c.n_test},
           {"k", c.k},
           {"sigma", c.sigma},
           {"mu_train", c.mu_train},
           {"beta_fit", c.beta_fit},
           {"beta_select", c.beta_select},
           {"runs", c.runs},
           {"methods", c.methods},
           {"lambda_grid", c.lambda_grid},
           {"dense_similarity", c.dense_similarity},
           {"dpp_kernel", c.dpp_kernel},
           {"dpp_tau", c.dpp_tau},
           {"seed", c.seed}};
}

inline void from_json(const json& j, SynthConfig& c) {
  j.at("d").get_to(c.d);
  j.at("n").get_to(c.n_grid);
  j.at("mu_test").get_to(c.mu_test_grid);
  j.at("n_test").get_to(c.n_test);
  j.at("k").get_to(c.k);
  j.at("sigma").get_to(c.sigma);
  j.at("mu_train").get_to(c.mu_train);
  j.at("beta_fit").get_to(c.beta_fit);
  j.at("beta_select").get_to(c.beta_select);
  j.at("runs").get_to(c.runs);
  j.at("methods").get_to(c.methods);
  j.at("lambda_grid").get_to(c.lambda_grid);
  j.at("dense_similarity").get_to(c.dense_similarity);
  j.at("dpp_kernel").get_to(c.dpp_kernel);
  j.at("dpp_tau").get_to(c.dpp_tau);
  j.at("seed").get_to(c.seed);
}

inline void to_json(json& j, const MethodStats& m) {
  j = json{{"method", m.method}, {"lambda", m.lambda}, {"mean_abs_error", m.mean_abs_error},
           {"std_abs_error", m.std_abs_error}, {"per_run", m.per_run}};
}

inline void from_json(const json& j, MethodStats& m) {
  j.at("method").get_to(m.method);
  j.at("lambda").get_to(m.lambda);
  j.at("mean_abs_error").get_to(m.mean_abs_error);
  j.at("std_abs_error").get_to(m.std_abs_error);
  j.at("per_run").get_to(m.per_run);
}

inline void to_json(json& j, const SynthCell& c) {
  j = json{{"n", c.n}, {"mu_test", c.mu_test}, {"methods", c.methods}, {"lite_lambda", c.lite_lambda},
           {"best_lambda", c.best_lambda}};
}

inline void from_json(const json& j, SynthCell& c) {
  j.at("n").get_to(c.n);
  j.at("mu_test").get_to(c.mu_test);
  j.at("methods").get_to(c.methods);
  j.at("lite_lambda").get_to(c.lite_lambda);
  j.at("best_lambda").get_to(c.best_lambda);
}

inline void to_json(json& j, const SynthReport& r) { j = json{{"config", r.config}, {"cells", r.cells}}; }

inline void from_json(const json& j, SynthReport& r) {
  j.at("config").get_to(r.config);
  j.at("cells").get_to(r.cells);
}

/// One output record: what ran, with which effective configuration, and its result.
struct RunRecord {
  using Payload = std::variant<SelectionResult, GammaReport, SynthReport>;

  std::string command;
  json config;
  Payload result;
  json versions = kite::versions();
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

inline void to_json(json& j, const RunRecord& r) {
  j = json{{"command", r.command}, {"config", r.config}, {"versions", r.versions}, {"seed", r.seed},
           {"wall_time", r.wall_time}};
  std::visit([&](const auto& payload) { j["result"] = payload; }, r.result);
}

inline void from_json(const json& j, RunRecord& r) {
  j.at("command").get_to(r.command);
  r.config = j.at("config");
  r.versions = j.at("versions");
  j.at("seed").get_to(r.seed);
  j.at("wall_time").get_to(r.wall_time);
  const json& res = j.at("result");
  if (r.command == "select") {
    r.result = res.get<SelectionResult>();
  } else if (r.command == "gamma") {
    r.result = res.get<GammaReport>();
  } else if (r.command == "synth") {
    r.result = res.get<SynthReport>();
  } else {
    throw InvalidArgument("run record: unknown command '" + r.command + "'");
  }
}

}  // namespace kite
