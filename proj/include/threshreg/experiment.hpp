#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "threshreg/data.hpp"
#include "threshreg/evaluation.hpp"
#include "threshreg/penalty.hpp"
#include "threshreg/solver.hpp"

namespace threshreg {

struct MethodSpec {
  std::string name;  // defaults to "<penalty>_t", or "<penalty>" untresholded
  Penalty penalty;
  bool thresholded = true;  // false: tau fixed to 0, c6 grid ignored
};

struct TuningSpec {
  TuningGrid::Method method = TuningGrid::Method::validation_set;
  int k = 5;
  int num_lambda = 50;
  double lambda_min_ratio = 1e-3;
  std::vector<double> c6_values = {0.5, 1.0, 2.0, 4.0};
};

struct ExperimentSpec {
  Setting setting = Setting::linear;
  int n = 100;
  int p = 200;
  double r = 0.25;
  int replications = 50;
  std::vector<MethodSpec> methods;
  TuningSpec tuning;
  std::uint64_t master_seed = 1;
  int test_size = 10000;
  std::string output_dir = "out";
  int spark_cap = 0;  // 0: min(n+1, search estimate)
  double sigma = -1.0;  // gaussian noise sd; <0 takes the benchmark default
  bool include_oracle = true;
  int workers = 0;  // 0: THRESHREG_WORKERS env or hardware_concurrency
  FitConfig solver;

  // custom_csv setting reuses the harness on an external dataset
  bool custom_csv = false;
  std::string csv_path;
  std::string response_column;
  std::string csv_family = "gaussian";

  static ExperimentSpec from_json_file(const std::string& path);
  static ExperimentSpec from_json_string(const std::string& text);
};

struct ReplicateRecord {
  std::string method;
  int replicate = 0;
  bool ok = true;
  std::string error;
  double lambda = 0.0;
  double c6 = 0.0;
  double tau = 0.0;
  MetricsReport metrics;
  int support_size = 0;
  int cycles = 0;
  bool converged = false;
  double eta_inf = 0.0;
  double time_ms = 0.0;
};

struct PathRow {
  std::string method;
  double lambda = 0.0;
  int coef_index = 0;
  double coef_value = 0.0;
};

struct AggregateRow {
  std::string method;
  int replications = 0;
  // measure -> (mean, standard error); trimmed (5%) under the poisson setting
  std::map<std::string, std::pair<double, double>> measures;
  double consistency_probability = 0.0;  // fraction with fp = fn = 0
  double sign_consistency_rate = 0.0;    // fraction with fs = 0
};

struct ResultStore {
  std::vector<ReplicateRecord> records;
  std::vector<PathRow> path_rows;
  Setting setting = Setting::linear;
  std::vector<std::string> method_order;
  double trim_fraction = 0.0;

  std::vector<AggregateRow> aggregate() const;
};

// Runs the replicates (concurrently up to the worker count), appending each
// record to <output_dir>/replicates.csv as it completes. Replicates already
// present in that file are not recomputed.
ResultStore run_experiment(const ExperimentSpec& spec);

enum class TableFormat { csv, json, markdown };

// Writes aggregate.{csv,json,md} (per format request), plus path.csv with the
// lambda-vs-coefficient trajectories captured from the first replicate.
void emit_tables(const ResultStore& store, const std::string& output_dir,
                 const std::vector<TableFormat>& formats);

// Re-reads a replicates.csv written by run_experiment.
std::vector<ReplicateRecord> read_replicates_csv(const std::string& path);

std::string aggregate_csv_text(const ResultStore& store);

struct OracleCheckReport {
  int instances = 0;
  int agreements = 0;        // |Q_ica - Q_bruteforce| <= 1e-6
  double worst_gap = 0.0;    // max of Q_ica - Q_bruteforce
  double worst_below = 0.0;  // max of Q_bruteforce - Q_ica (should stay <= 1e-9)
};

// Tiny random gaussian instances; compares fit_ica(exact) with the
// brute-force global minimizer.
OracleCheckReport run_oracle_check(const Penalty& pen, int instances,
                                   std::uint64_t seed);

}  // namespace threshreg
