// Command line front end: fit / path / simulate / tune / spark / oracle-check.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "threshreg/data.hpp"
#include "threshreg/diagnostics.hpp"
#include "threshreg/errors.hpp"
#include "threshreg/evaluation.hpp"
#include "threshreg/experiment.hpp"
#include "threshreg/reference.hpp"
#include "threshreg/solver.hpp"

namespace {

using namespace threshreg;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

Penalty make_penalty(const std::string& kind, std::optional<double> a) {
  const PenaltyKind k = parse_penalty_kind(kind);
  switch (k) {
    case PenaltyKind::scad: return Penalty::scad(a.value_or(3.7));
    case PenaltyKind::mcp: return Penalty::mcp(a.value_or(3.0));
    case PenaltyKind::sica: return Penalty::sica(a.value_or(1e-2));
    case PenaltyKind::l1: return Penalty::l1();
    case PenaltyKind::hard: return Penalty::hard();
    case PenaltyKind::l0: return Penalty::l0();
  }
  return Penalty::l1();
}

int resolve_cap(int requested, const Dataset& data, std::uint64_t seed) {
  if (requested > 0) return requested;
  Rng rng(seed);
  const SparkEstimate est = robust_spark_search(data.X, 0.5, 200, rng);
  return std::min(static_cast<int>(data.n()) + 1, est.value);
}

void print_fit(const FitResult& fit) {
  std::printf("lambda      %.6g\n", fit.lambda);
  std::printf("tau         %.6g\n", fit.tau);
  std::printf("objective   %.10g\n", fit.objective);
  std::printf("cycles      %d\n", fit.cycles_used);
  std::printf("converged   %s\n", fit.converged ? "yes" : "no");
  std::printf("eta_inf     %.6g\n", fit.eta_inf);
  std::printf("support     %zu nonzero\n", fit.support.size());
  for (int j : fit.support) std::printf("  beta[%d] = %.8g\n", j, fit.beta[j]);
  if (fit.support.empty()) std::printf("  (all-zero model)\n");
}

struct CommonDataArgs {
  std::string data_path;
  std::string response = "y";
  std::string family = "gaussian";
};

void add_data_options(CLI::App* cmd, CommonDataArgs& args) {
  cmd->add_option("--data", args.data_path, "CSV file with a header row")->required();
  cmd->add_option("--response", args.response, "response column name");
  cmd->add_option("--family", args.family, "gaussian | bernoulli | poisson");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse GLM regression in the thresholded parameter space"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit one dataset with one method");
  CommonDataArgs fit_data;
  add_data_options(fit_cmd, fit_data);
  std::string fit_penalty = "scad";
  std::optional<double> fit_shape;
  std::optional<double> fit_lambda;
  std::optional<double> fit_tau;
  double fit_c6 = 1.0;
  std::string fit_mode = "exact";
  int fit_cap = 0;
  fit_cmd->add_option("--penalty", fit_penalty, "l1 | scad | mcp | sica | hard");
  fit_cmd->add_option("--a", fit_shape, "penalty shape parameter");
  fit_cmd->add_option("--lambda", fit_lambda, "regularization level (default: schedule)");
  fit_cmd->add_option("--tau", fit_tau, "threshold (default: c6 schedule)");
  fit_cmd->add_option("--c6", fit_c6, "threshold multiplier when --tau is not given");
  fit_cmd->add_option("--mode", fit_mode, "exact | drop");
  fit_cmd->add_option("--spark-cap", fit_cap, "support cap (0 = estimate)");

  // path
  auto* path_cmd = app.add_subcommand("path", "regularization path to CSV");
  CommonDataArgs path_data;
  add_data_options(path_cmd, path_data);
  std::string path_penalty = "scad";
  std::optional<double> path_shape;
  int path_num = 50;
  double path_ratio = 1e-3;
  double path_c6 = 1.0;
  int path_cap = 0;
  std::string path_out = "path.csv";
  path_cmd->add_option("--penalty", path_penalty, "l1 | scad | mcp | sica | hard");
  path_cmd->add_option("--a", path_shape, "penalty shape parameter");
  path_cmd->add_option("--num-lambda", path_num, "grid size");
  path_cmd->add_option("--ratio", path_ratio, "lambda_min / lambda_max");
  path_cmd->add_option("--c6", path_c6, "threshold multiplier");
  path_cmd->add_option("--spark-cap", path_cap, "support cap (0 = estimate)");
  path_cmd->add_option("--out", path_out, "output CSV");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run an experiment from a config file");
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_workers;
  std::optional<std::string> sim_out;
  std::string sim_format = "csv,json,markdown";
  sim_cmd->add_option("--config", sim_config, "experiment JSON")->required();
  sim_cmd->add_option("--seed", sim_seed, "master seed override");
  sim_cmd->add_option("--workers", sim_workers, "worker count override");
  sim_cmd->add_option("--out", sim_out, "output directory override");
  sim_cmd->add_option("--format", sim_format, "comma list of csv,json,markdown");

  // tune
  auto* tune_cmd = app.add_subcommand("tune", "grid search for (lambda, c6)");
  CommonDataArgs tune_data;
  add_data_options(tune_cmd, tune_data);
  std::string tune_penalty = "scad";
  std::optional<double> tune_shape;
  std::string tune_valid_path;
  int tune_kfold = 0;
  int tune_num = 50;
  double tune_ratio = 1e-3;
  std::vector<double> tune_c6 = {0.5, 1.0, 2.0, 4.0};
  int tune_cap = 0;
  std::uint64_t tune_seed = 1;
  tune_cmd->add_option("--penalty", tune_penalty, "l1 | scad | mcp | sica | hard");
  tune_cmd->add_option("--a", tune_shape, "penalty shape parameter");
  tune_cmd->add_option("--valid", tune_valid_path, "validation CSV (else use --kfold)");
  tune_cmd->add_option("--kfold", tune_kfold, "number of CV folds");
  tune_cmd->add_option("--num-lambda", tune_num, "grid size");
  tune_cmd->add_option("--ratio", tune_ratio, "lambda_min / lambda_max");
  tune_cmd->add_option("--c6", tune_c6, "threshold multipliers");
  tune_cmd->add_option("--spark-cap", tune_cap, "support cap (0 = estimate)");
  tune_cmd->add_option("--seed", tune_seed, "fold shuffle seed");

  // spark
  auto* spark_cmd = app.add_subcommand("spark", "robust spark diagnostics");
  CommonDataArgs spark_data;
  add_data_options(spark_cmd, spark_data);
  double spark_c = 0.5;
  int spark_budget = 5000;
  bool spark_exact = false;
  std::uint64_t spark_seed = 1;
  std::vector<int> spark_support;
  spark_cmd->add_option("--c", spark_c, "singular value threshold");
  spark_cmd->add_option("--budget", spark_budget, "search budget");
  spark_cmd->add_flag("--exact", spark_exact, "exhaustive enumeration (p <= 20)");
  spark_cmd->add_option("--seed", spark_seed, "search seed");
  spark_cmd->add_option("--support", spark_support,
                        "0-based indices: also print gamma_star / gamma_n");

  // oracle-check
  auto* oc_cmd = app.add_subcommand("oracle-check",
                                    "ICA vs brute-force agreement on tiny instances");
  int oc_instances = 100;
  std::uint64_t oc_seed = 7;
  std::vector<std::string> oc_penalties = {"scad", "l1"};
  oc_cmd->add_option("--instances", oc_instances, "number of random instances");
  oc_cmd->add_option("--seed", oc_seed, "master seed");
  oc_cmd->add_option("--penalty", oc_penalties, "penalties to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit_cmd) {
      const Dataset data = load_csv(fit_data.data_path, fit_data.response,
                                    parse_family(fit_data.family));
      const Penalty pen = make_penalty(fit_penalty, fit_shape);
      const int n = static_cast<int>(data.n());
      const int p = static_cast<int>(data.p());
      RegObjective obj;
      obj.family = data.family;
      obj.penalty = pen;
      obj.lambda = fit_lambda.value_or(lambda_schedule(1.0, n, p));
      obj.tau = fit_tau.value_or(tau_schedule(fit_c6, n, p));
      obj.spark_cap = resolve_cap(fit_cap, data, 1);
      FitConfig cfg;
      cfg.mode = fit_mode == "drop" ? ThresholdMode::drop : ThresholdMode::exact;
      print_fit(fit_ica(data, obj, cfg));
      return 0;
    }

    if (*path_cmd) {
      const Dataset data = load_csv(path_data.data_path, path_data.response,
                                    parse_family(path_data.family));
      const Penalty pen = make_penalty(path_penalty, path_shape);
      const int cap = resolve_cap(path_cap, data, 1);
      const double tau = tau_schedule(path_c6, static_cast<int>(data.n()),
                                      static_cast<int>(data.p()));
      const auto grid = default_lambda_grid(data, pen, path_num, path_ratio);
      FitConfig cfg;
      const auto path = fit_path(data, pen, grid, [tau](double) { return tau; }, cap, cfg);
      std::ofstream out(path_out);
      if (!out) throw std::runtime_error("cannot write " + path_out);
      out << "lambda,coef_index,coef_value\n";
      char buf[64];
      for (size_t i = 0; i < path.size(); ++i)
        for (int j : path[i].support) {
          std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g", grid[i], j, path[i].beta[j]);
          out << buf << '\n';
        }
      std::printf("wrote %zu path fits to %s\n", path.size(), path_out.c_str());
      return 0;
    }

    if (*sim_cmd) {
      ExperimentSpec spec = ExperimentSpec::from_json_file(sim_config);
      if (sim_seed) spec.master_seed = *sim_seed;
      if (sim_workers) spec.workers = *sim_workers;
      if (sim_out) spec.output_dir = *sim_out;
      std::vector<TableFormat> formats;
      std::stringstream ss(sim_format);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok == "csv") formats.push_back(TableFormat::csv);
        else if (tok == "json") formats.push_back(TableFormat::json);
        else if (tok == "markdown" || tok == "md") formats.push_back(TableFormat::markdown);
        else throw std::invalid_argument("unknown format: " + tok);
      }
      const ResultStore store = run_experiment(spec);
      emit_tables(store, spec.output_dir, formats);
      std::printf("%s", aggregate_csv_text(store).c_str());
      std::printf("outputs written to %s\n", spec.output_dir.c_str());
      return 0;
    }

    if (*tune_cmd) {
      const Dataset data = load_csv(tune_data.data_path, tune_data.response,
                                    parse_family(tune_data.family));
      const Penalty pen = make_penalty(tune_penalty, tune_shape);
      TuningGrid grid;
      grid.lambda_values = default_lambda_grid(data, pen, tune_num, tune_ratio);
      grid.c6_values = tune_c6;
      std::optional<Dataset> valid;
      if (!tune_valid_path.empty()) {
        grid.method = TuningGrid::Method::validation_set;
        valid = load_csv(tune_valid_path, tune_data.response,
                         parse_family(tune_data.family));
      } else if (tune_kfold >= 2) {
        grid.method = TuningGrid::Method::kfold;
        grid.k = tune_kfold;
      } else {
        throw std::invalid_argument("tune needs --valid CSV or --kfold K");
      }
      const int cap = resolve_cap(tune_cap, data, 1);
      FitConfig cfg;
      Rng rng(tune_seed);
      const TuneResult res = select_tuning(data, valid, pen, grid, cap, cfg, rng);
      std::printf("selected lambda  %.8g\n", res.lambda);
      std::printf("selected c6      %.8g\n", res.c6);
      std::printf("tau              %.8g\n", res.tau);
      std::printf("score (PE)       %.8g\n", res.score);
      print_fit(res.fit);
      return 0;
    }

    if (*spark_cmd) {
      const Dataset data = load_csv(spark_data.data_path, spark_data.response,
                                    parse_family(spark_data.family));
      SparkEstimate est;
      if (spark_exact) {
        est = robust_spark_exact(data.X, spark_c);
      } else {
        Rng rng(spark_seed);
        est = robust_spark_search(data.X, spark_c, spark_budget, rng);
      }
      const char* kind = est.kind == SparkEstimate::Kind::exact ? "exact"
                         : est.kind == SparkEstimate::Kind::upper_bound
                             ? "upper_bound"
                             : "lower_bound_verified";
      std::printf("robust spark (c = %g): %d [%s]\n", est.c, est.value, kind);
      if (!est.witness.empty()) {
        std::printf("witness columns:");
        for (int j : est.witness) std::printf(" %d", j);
        std::printf("  (min singular value %.6g)\n",
                    submatrix_min_singular_value(data.X, est.witness));
      }
      if (!spark_support.empty()) {
        std::printf("gamma_star = %.8g\n", gamma_star_gaussian(data.X, spark_support));
        std::printf("gamma_n    = %.8g (greedy, s = %zu)\n",
                    gamma_n_gaussian(data.X, spark_support,
                                     static_cast<int>(spark_support.size())),
                    spark_support.size());
      }
      return 0;
    }

    if (*oc_cmd) {
      for (const auto& name : oc_penalties) {
        const Penalty pen = make_penalty(name, std::nullopt);
        const OracleCheckReport rep = run_oracle_check(pen, oc_instances, oc_seed);
        std::printf("%-5s agreement %d/%d (worst gap %.3g, worst below %.3g)\n",
                    pen.name().c_str(), rep.agreements, rep.instances, rep.worst_gap,
                    rep.worst_below);
      }
      return 0;
    }
  } catch (const CsvError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ResponseSupportError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SeparationError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const RankError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const DomainOverflowError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
