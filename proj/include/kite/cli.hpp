#pragma once

// Command-line front end: `select`, `gamma`, `synth` and `convert`.
//
// Exit codes: 0 success, 2 argument error, 3 parse error (bank/query files),
// 4 numerical degeneracy, 1 anything else. Every failure prints one line.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kite/analysis.hpp"
#include "kite/baselines.hpp"
#include "kite/errors.hpp"
#include "kite/io.hpp"
#include "kite/selector.hpp"
#include "kite/serialize.hpp"
#include "kite/synthbench.hpp"

namespace kite {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitArgument = 2,
  kExitParse = 3,
  kExitNumerical = 4,
};

namespace cli {

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw InvalidArgument(std::string(what) + ": empty list element in '" + text + "'");
    T v{};
    const char* b = item.data();
    const char* e = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) {
      throw InvalidArgument(std::string(what) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + ": empty list");
  return out;
}

inline std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw InvalidArgument(path + ": cannot open for writing");
    }
    stream_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& operator*() { return *stream_; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct SelectArgs {
  std::string bank, query, out, kernel = "linear", method = "kite";
  std::string similarity = "cosine", score_form = "exact_lift", path = "auto";
  std::size_t k = 50;
  double beta = 0.02, lambda = 0.5, tau = 1.0;
  std::uint64_t seed = 0;
  bool normalize = false;
};

inline int run_select(const SelectArgs& a, std::ostream& out) {
  const EmbeddingBank bank = load_bank(a.bank);
  const EmbeddingBank queries = load_bank(a.query);
  detail::require_dim(static_cast<Eigen::Index>(queries.dim()), static_cast<Eigen::Index>(bank.dim()),
                      "select: query file");

  SelectionConfig sc;
  sc.k = a.k;
  sc.beta = a.beta;
  sc.lambda = a.lambda;
  sc.kernel = parse_kernel_spec(a.kernel);
  sc.normalize_inputs = a.normalize;
  sc.path = json(a.path).get<SelectionPath>();
  sc.score_form = json(a.score_form).get<ScoreForm>();
  if (a.path != "auto" && a.path != "design" && a.path != "kernel") throw InvalidArgument("unknown --path " + a.path);
  if (a.score_form != "exact_lift" && a.score_form != "box") throw InvalidArgument("unknown --score-form " + a.score_form);
  sc.validate();
  if (a.similarity != "cosine" && a.similarity != "dot") throw InvalidArgument("unknown --similarity " + a.similarity);
  const Similarity sim = a.similarity == "dot" ? Similarity::dot : Similarity::cosine;
  if (a.method != "kite" && a.method != "random" && a.method != "dense" && a.method != "dpp") {
    throw InvalidArgument("unknown --method '" + a.method + "' (expected kite, random, dense, dpp)");
  }
  detail::require(a.tau > 0.0, "--tau must be positive");

  json config{{"bank", a.bank},         {"query", a.query},       {"method", a.method},
              {"selection", sc},        {"similarity", a.similarity}, {"tau", a.tau},
              {"seed", a.seed}};

  Output sink(a.out, out);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const Vector z = queries.row(qi);
    SelectionResult result;
    if (a.method == "kite") {
      result = select(bank, z, sc);
    } else if (a.method == "random") {
      result = select_random(bank, a.k, derive_seed(a.seed, {qi}));
    } else if (a.method == "dense") {
      result = select_dense_topk(bank, z, a.k, sim);
    } else {
      BaselineSpec spec;
      spec.method = BaselineMethod::dpp_greedy;
      spec.similarity = sim;
      spec.kernel = sc.kernel;
      spec.relevance_temp = a.tau;
      result = select_dpp_greedy(bank, z, a.k, spec);
    }
    RunRecord rec;
    rec.command = "select";
    rec.config = config;
    rec.config["query_index"] = qi;
    rec.config["query_id"] = queries.ids()[qi];
    rec.seed = a.seed;
    rec.wall_time = result.wall_time;
    rec.result = std::move(result);
    *sink << json(rec).dump() << '\n';
  }
  return kExitOk;
}

struct GammaArgs {
  std::string demo, query, k_grid = "5,20", beta_grid = "1,9", out;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
};

inline std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "undef";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

inline void print_gamma_table(const GammaReport& r, std::ostream& os) {
  os << std::left << std::setw(6) << "k" << std::setw(10) << "beta" << std::setw(12) << "gamma_min" << std::setw(14)
     << "gamma_closed" << std::setw(12) << "bound_min" << std::setw(8) << "trials" << std::setw(12) << "violations"
     << "undefined\n";
  for (const auto& c : r.cells) {
    std::ostringstream beta;
    beta << c.beta;
    os << std::left << std::setw(6) << c.k << std::setw(10) << beta.str() << std::setw(12)
       << fmt_opt(c.gamma_min_exact) << std::setw(14) << fmt_opt(c.gamma_min_closed) << std::setw(12)
       << fmt_opt(c.bound_min) << std::setw(8) << c.trials << std::setw(12) << c.violations << c.undefined << '\n';
  }
}

inline int run_gamma(const GammaArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto k_grid = parse_list<std::size_t>(a.k_grid, "--k-grid");
  const auto beta_grid = parse_list<double>(a.beta_grid, "--beta-grid");
  const EmbeddingBank demo = load_bank(a.demo);
  const EmbeddingBank queries = load_bank(a.query);
  GammaReport report = estimate_gamma_min(demo, queries, k_grid, beta_grid, a.trials, a.seed);

  RunRecord rec;
  rec.command = "gamma";
  rec.config = json{{"demo_bank", a.demo}, {"query_bank", a.query}, {"k_grid", k_grid},
                    {"beta_grid", beta_grid}, {"trials", a.trials}, {"seed", a.seed}};
  rec.seed = a.seed;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.result = report;
  if (!a.out.empty()) {
    Output sink(a.out, out);
    *sink << json(rec).dump(2) << '\n';
  }
  print_gamma_table(report, out);
  return kExitOk;
}

struct SynthArgs {
  std::size_t d = 5, k = 5, runs = 20, n_test = 200;
  std::string n = "1000", mu_test = "0", methods = "lite,dense,dpp", lambda_grid = "1,2,3,4,5,6,7,8,9,10";
  std::string dpp_kernel = "rbf:sigma=5", similarity = "cosine", out;
  double sigma = 5.0, beta = 0.02, mu_train = 0.0;
  std::uint64_t seed = 0;
};

inline void print_synth_table(const SynthReport& r, std::ostream& os) {
  os << std::left << std::setw(8) << "N" << std::setw(9) << "mu_test" << std::setw(8) << "method" << std::setw(12)
     << "mean_err" << std::setw(12) << "std" << "lambda\n";
  for (const auto& c : r.cells) {
    for (const auto& m : c.methods) {
      std::ostringstream mu, mean, sd;
      mu << c.mu_test;
      mean << std::fixed << std::setprecision(4) << m.mean_abs_error;
      sd << std::fixed << std::setprecision(4) << m.std_abs_error;
      os << std::left << std::setw(8) << c.n << std::setw(9) << mu.str() << std::setw(8) << m.method << std::setw(12)
         << mean.str() << std::setw(12) << sd.str();
      if (m.method == "lite") os << m.lambda;
      os << '\n';
    }
  }
  bool any_lite = false;
  for (const auto& c : r.cells) any_lite = any_lite || !c.lite_lambda.empty();
  if (!any_lite) return;
  os << "\nlite error by lambda\n";
  for (const auto& c : r.cells) {
    os << "N=" << c.n << " mu_test=" << c.mu_test << ":";
    for (const auto& m : c.lite_lambda) {
      os << "  " << m.lambda << "=" << std::fixed << std::setprecision(4) << m.mean_abs_error;
      os.unsetf(std::ios::fixed);
    }
    os << '\n';
  }
}

inline int run_synth(const SynthArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig c;
  c.d = a.d;
  c.k = a.k;
  c.runs = a.runs;
  c.n_test = a.n_test;
  c.n_grid = parse_list<std::size_t>(a.n, "--n");
  c.mu_test_grid = parse_list<double>(a.mu_test, "--mu-test");
  c.methods.clear();
  for (const auto& m : split(a.methods)) c.methods.push_back(parse_synth_method(m));
  c.lambda_grid = parse_list<double>(a.lambda_grid, "--lambda-grid");
  c.sigma = a.sigma;
  c.beta_fit = a.beta;
  c.beta_select = a.beta;
  c.mu_train = a.mu_train;
  c.dpp_kernel = parse_kernel_spec(a.dpp_kernel);
  if (a.similarity != "cosine" && a.similarity != "dot") throw InvalidArgument("unknown --similarity " + a.similarity);
  c.dense_similarity = a.similarity == "dot" ? Similarity::dot : Similarity::cosine;
  c.seed = a.seed;
  c.validate();

  SynthReport report = run_sweep(c);
  RunRecord rec;
  rec.command = "synth";
  rec.config = c;
  rec.seed = a.seed;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.result = report;
  if (!a.out.empty()) {
    Output sink(a.out, out);
    *sink << json(rec).dump(2) << '\n';
  }
  print_synth_table(report, out);
  return kExitOk;
}

struct ConvertArgs {
  std::string in, out, format = "kitebin";
};

inline int run_convert(const ConvertArgs& a) {
  const EmbeddingBank bank = load_bank(a.in);
  if (a.format != "kitebin" && a.format != "csv") throw InvalidArgument("unknown --format " + a.format);
  save_bank(bank, a.out, a.format == "kitebin" ? BankFormat::kitebin : BankFormat::csv);
  return kExitOk;
}

}  // namespace cli

/// Runs one command line (args exclude the program name).
inline int cli_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"Query-specific exemplar selection with approximately submodular greedy rules", "kite"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  cli::SelectArgs sel;
  auto* s = app.add_subcommand("select", "select exemplars for every query row");
  s->add_option("--bank", sel.bank, "candidate bank (csv or kitebin)")->required();
  s->add_option("--query", sel.query, "query vectors, one per row (same format family)")->required();
  s->add_option("--k", sel.k, "subset size")->capture_default_str();
  s->add_option("--beta", sel.beta, "regularization beta > 0")->capture_default_str();
  s->add_option("--lambda", sel.lambda, "diversity weight >= 0")->capture_default_str();
  s->add_option("--kernel", sel.kernel, "linear | poly:c=<real>,m=<int> | rbf:sigma=<real>")->capture_default_str();
  s->add_option("--method", sel.method, "kite | random | dense | dpp")->capture_default_str();
  s->add_option("--out", sel.out, "write JSON lines here instead of stdout");
  s->add_option("--seed", sel.seed, "seed for the random baseline")->capture_default_str();
  s->add_option("--similarity", sel.similarity, "cosine | dot (dense and dpp)")->capture_default_str();
  s->add_option("--tau", sel.tau, "dpp quality temperature")->capture_default_str();
  s->add_option("--score-form", sel.score_form, "exact_lift | box")->capture_default_str();
  s->add_option("--path", sel.path, "auto | design | kernel")->capture_default_str();
  s->add_flag("--normalize", sel.normalize, "L2-normalize bank rows and queries");

  cli::GammaArgs gam;
  auto* g = app.add_subcommand("gamma", "Monte-Carlo estimate of the minimum submodularity ratio");
  g->add_option("--demo-bank", gam.demo, "demonstration bank")->required();
  g->add_option("--query-bank", gam.query, "query bank")->required();
  g->add_option("--k-grid", gam.k_grid, "comma-separated subset sizes")->capture_default_str();
  g->add_option("--beta-grid", gam.beta_grid, "comma-separated beta values")->capture_default_str();
  g->add_option("--trials", gam.trials, "trials per cell")->capture_default_str();
  g->add_option("--seed", gam.seed, "master seed")->capture_default_str();
  g->add_option("--out", gam.out, "write the JSON record here");

  cli::SynthArgs syn;
  auto* y = app.add_subcommand("synth", "synthetic linear-model benchmark");
  y->add_option("--d", syn.d, "feature dimension")->capture_default_str();
  y->add_option("--n", syn.n, "train pool size(s), comma-separated")->capture_default_str();
  y->add_option("--k", syn.k, "subset size")->capture_default_str();
  y->add_option("--mu-test", syn.mu_test, "test mean shift(s), comma-separated")->capture_default_str();
  y->add_option("--runs", syn.runs, "repetitions M")->capture_default_str();
  y->add_option("--methods", syn.methods, "subset of lite,dense,dpp,random")->capture_default_str();
  y->add_option("--lambda-grid", syn.lambda_grid, "lite lambda values")->capture_default_str();
  y->add_option("--n-test", syn.n_test, "test queries per run")->capture_default_str();
  y->add_option("--sigma", syn.sigma, "feature and parameter scale")->capture_default_str();
  y->add_option("--beta", syn.beta, "ridge / selection regularizer")->capture_default_str();
  y->add_option("--mu-train", syn.mu_train, "training mean")->capture_default_str();
  y->add_option("--dpp-kernel", syn.dpp_kernel, "kernel of the dpp baseline")->capture_default_str();
  y->add_option("--similarity", syn.similarity, "dense similarity: cosine | dot")->capture_default_str();
  y->add_option("--seed", syn.seed, "master seed")->capture_default_str();
  y->add_option("--out", syn.out, "write the JSON record here");

  cli::ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "convert a bank between csv and kitebin");
  c->add_option("--in", conv.in, "input bank")->required();
  c->add_option("--out", conv.out, "output path")->required();
  c->add_option("--format", conv.format, "kitebin | csv")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return kExitArgument;
  }

  try {
    if (s->parsed()) return cli::run_select(sel, out);
    if (g->parsed()) return cli::run_gamma(gam, out);
    if (y->parsed()) return cli::run_synth(syn, out);
    if (c->parsed()) return cli::run_convert(conv);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const NumericalDegeneracy& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitArgument;
}

}  // namespace kite
