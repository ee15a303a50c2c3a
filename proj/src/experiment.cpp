#include "threshreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "threshreg/errors.hpp"
#include "threshreg/diagnostics.hpp"
#include "threshreg/reference.hpp"

namespace threshreg {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string sanitize_text(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

Penalty parse_method_penalty(const json& m) {
  const std::string kind = m.at("penalty").get<std::string>();
  const PenaltyKind k = parse_penalty_kind(kind);
  switch (k) {
    case PenaltyKind::scad: return Penalty::scad(m.value("a", 3.7));
    case PenaltyKind::mcp: return Penalty::mcp(m.value("a", 3.0));
    case PenaltyKind::sica: return Penalty::sica(m.value("a", 1e-2));
    case PenaltyKind::l1: return Penalty::l1();
    case PenaltyKind::hard: return Penalty::hard();
    case PenaltyKind::l0: throw std::invalid_argument("l0 is not a path method");
  }
  return Penalty::l1();
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ExperimentSpec spec;
  const std::string setting = j.value("setting", std::string("linear"));
  if (setting == "custom_csv") {
    spec.custom_csv = true;
    spec.csv_path = j.at("csv_path").get<std::string>();
    spec.response_column = j.at("response_column").get<std::string>();
    spec.csv_family = j.value("family", std::string("gaussian"));
  } else {
    spec.setting = parse_setting(setting);
  }
  spec.n = j.value("n", spec.n);
  spec.p = j.value("p", spec.p);
  spec.r = j.value("r", spec.r);
  spec.replications = j.value("replications", spec.replications);
  spec.master_seed = j.value("master_seed", spec.master_seed);
  spec.test_size = j.value("test_size", spec.test_size);
  spec.output_dir = j.value("output_dir", spec.output_dir);
  spec.spark_cap = j.value("spark_cap", spec.spark_cap);
  spec.sigma = j.value("sigma", spec.sigma);
  spec.include_oracle = j.value("include_oracle", spec.include_oracle);
  spec.workers = j.value("workers", spec.workers);

  if (j.contains("methods")) {
    for (const auto& m : j.at("methods")) {
      MethodSpec ms;
      ms.penalty = parse_method_penalty(m);
      ms.thresholded = m.value("thresholded", true);
      ms.name = m.value("name", ms.penalty.name() + (ms.thresholded ? "_t" : ""));
      spec.methods.push_back(std::move(ms));
    }
  }
  if (spec.methods.empty()) throw std::invalid_argument("methods must be nonempty");
  if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");

  if (j.contains("tuning")) {
    const auto& t = j.at("tuning");
    const std::string method = t.value("method", std::string("validation_set"));
    if (method == "validation_set")
      spec.tuning.method = TuningGrid::Method::validation_set;
    else if (method == "kfold")
      spec.tuning.method = TuningGrid::Method::kfold;
    else
      throw std::invalid_argument("unknown tuning method: " + method);
    spec.tuning.k = t.value("k", spec.tuning.k);
    spec.tuning.num_lambda = t.value("num_lambda", spec.tuning.num_lambda);
    spec.tuning.lambda_min_ratio = t.value("lambda_min_ratio", spec.tuning.lambda_min_ratio);
    if (t.contains("c6_values"))
      spec.tuning.c6_values = t.at("c6_values").get<std::vector<double>>();
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    spec.solver.max_cycles = s.value("max_cycles", spec.solver.max_cycles);
    spec.solver.tol = s.value("tol", spec.solver.tol);
    spec.solver.damping_max_halvings =
        s.value("damping_max_halvings", spec.solver.damping_max_halvings);
    const std::string mode = s.value("mode", std::string("exact"));
    if (mode == "exact")
      spec.solver.mode = ThresholdMode::exact;
    else if (mode == "drop")
      spec.solver.mode = ThresholdMode::drop;
    else
      throw std::invalid_argument("unknown solver mode: " + mode);
  }
  return spec;
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

namespace {

struct ReplicateData {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// draw order is fixed (train, valid, test) so every tuning method sees the
// same realizations for a given replicate stream
ReplicateData make_replicate_data(const ExperimentSpec& spec, const TruthSpec& truth,
                                  const Dataset* csv_data, int rep) {
  Rng rng = Rng::stream(spec.master_seed, static_cast<std::uint64_t>(rep));
  ReplicateData d;
  if (!csv_data) {
    const Family family = setting_family(spec.setting);
    d.train = simulate_dataset(family, spec.n, spec.p, spec.r, truth, rng);
    d.valid = simulate_dataset(family, spec.n, spec.p, spec.r, truth, rng);
    d.test = simulate_dataset(family, spec.test_size, spec.p, spec.r, truth, rng);
  } else {
    // external data: disjoint shuffled split, half train / quarter valid / rest test
    const int n = static_cast<int>(csv_data->n());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const int n_train = std::max(2, n / 2);
    const int n_valid = std::max(1, n / 4);
    auto take = [&](int lo, int hi) {
      Dataset out;
      out.family = csv_data->family;
      out.rescaled = csv_data->rescaled;
      out.column_scales = csv_data->column_scales;
      out.X.resize(hi - lo, csv_data->p());
      out.y.resize(hi - lo);
      for (int i = lo; i < hi; ++i) {
        out.X.row(i - lo) = csv_data->X.row(order[i]);
        out.y[i - lo] = csv_data->y[order[i]];
      }
      return out;
    };
    d.train = take(0, n_train);
    d.valid = take(n_train, std::min(n, n_train + n_valid));
    d.test = take(std::min(n, n_train + n_valid), n);
    if (d.test.n() == 0) d.test = d.valid;
  }
  return d;
}

int resolve_spark_cap(const ExperimentSpec& spec, const Dataset& train) {
  if (spec.spark_cap > 0) return spec.spark_cap;
  Rng rng = Rng::stream(spec.master_seed, 0x5ca45eedULL);
  const SparkEstimate est = robust_spark_search(train.X, 0.5, 200, rng);
  return std::min(static_cast<int>(train.n()) + 1, est.value);
}

std::vector<ReplicateRecord> run_replicate(const ExperimentSpec& spec,
                                           const TruthSpec& truth,
                                           const Dataset* csv_data, int rep) {
  const ReplicateData data = make_replicate_data(spec, truth, csv_data, rep);
  const int cap = resolve_spark_cap(spec, data.train);
  std::vector<ReplicateRecord> out;

  for (const MethodSpec& method : spec.methods) {
    ReplicateRecord rec;
    rec.method = method.name;
    rec.replicate = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      TuningGrid grid;
      grid.lambda_values = default_lambda_grid(data.train, method.penalty,
                                               spec.tuning.num_lambda,
                                               spec.tuning.lambda_min_ratio);
      grid.c6_values = method.thresholded ? spec.tuning.c6_values
                                          : std::vector<double>{1.0};
      grid.use_threshold = method.thresholded;
      grid.method = spec.tuning.method;
      grid.k = spec.tuning.k;
      Rng fold_rng = Rng::stream(mix_seed(spec.master_seed, 0xF01DULL),
                                 static_cast<std::uint64_t>(rep));
      const TuneResult tuned =
          select_tuning(data.train, data.valid, method.penalty, grid, cap,
                        spec.solver, fold_rng);
      rec.lambda = tuned.lambda;
      rec.c6 = method.thresholded ? tuned.c6 : 0.0;
      rec.tau = tuned.tau;
      rec.metrics = compute_metrics(tuned.fit.beta, truth, data.train, data.test);
      rec.support_size = static_cast<int>(tuned.fit.support.size());
      rec.cycles = tuned.fit.cycles_used;
      rec.converged = tuned.fit.converged;
      rec.eta_inf = tuned.fit.eta_inf;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.time_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.push_back(std::move(rec));
  }

  if (spec.include_oracle && !spec.custom_csv) {
    ReplicateRecord rec;
    rec.method = "oracle";
    rec.replicate = rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Eigen::VectorXd beta =
          oracle_mle(data.train, data.train.family, truth.support);
      rec.metrics = compute_metrics(beta, truth, data.train, data.test);
      rec.support_size = truth.s;
      rec.converged = true;
      rec.eta_inf = eta_infinity(data.train.family, data.train.X, data.train.y, beta);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.time_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.push_back(std::move(rec));
  }
  return out;
}

const char* kReplicateHeader =
    "method,replicate,ok,error,lambda,c6,tau,pe,l1,l2,linf,fp,fn,fs,"
    "sign_consistent,sigma_hat,kl_per_n,support_size,cycles,converged,eta_inf,time_ms";

std::string replicate_row(const ReplicateRecord& r) {
  std::ostringstream os;
  os << sanitize_text(r.method) << ',' << r.replicate << ',' << (r.ok ? 1 : 0) << ','
     << sanitize_text(r.error) << ',' << g17(r.lambda) << ',' << g17(r.c6) << ','
     << g17(r.tau) << ',' << g17(r.metrics.pe) << ',' << g17(r.metrics.l1) << ','
     << g17(r.metrics.l2) << ',' << g17(r.metrics.linf) << ',' << r.metrics.fp << ','
     << r.metrics.fn << ',' << r.metrics.fs << ',' << (r.metrics.sign_consistent ? 1 : 0)
     << ',' << (r.metrics.sigma_hat ? g17(*r.metrics.sigma_hat) : std::string()) << ','
     << g17(r.metrics.kl_per_n) << ',' << r.support_size << ',' << r.cycles << ','
     << (r.converged ? 1 : 0) << ',' << g17(r.eta_inf) << ',' << g17(r.time_ms);
  return os.str();
}

int worker_count(const ExperimentSpec& spec) {
  if (spec.workers > 0) return spec.workers;
  if (const char* env = std::getenv("THRESHREG_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace

std::vector<ReplicateRecord> read_replicates_csv(const std::string& path) {
  std::vector<ReplicateRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 22) cells.push_back("");
    ReplicateRecord r;
    r.method = cells[0];
    r.replicate = std::stoi(cells[1]);
    r.ok = cells[2] == "1";
    r.error = cells[3];
    r.lambda = std::stod(cells[4]);
    r.c6 = std::stod(cells[5]);
    r.tau = std::stod(cells[6]);
    r.metrics.pe = std::stod(cells[7]);
    r.metrics.l1 = std::stod(cells[8]);
    r.metrics.l2 = std::stod(cells[9]);
    r.metrics.linf = std::stod(cells[10]);
    r.metrics.fp = std::stoi(cells[11]);
    r.metrics.fn = std::stoi(cells[12]);
    r.metrics.fs = std::stoi(cells[13]);
    r.metrics.sign_consistent = cells[14] == "1";
    if (!cells[15].empty()) r.metrics.sigma_hat = std::stod(cells[15]);
    r.metrics.kl_per_n = std::stod(cells[16]);
    r.support_size = std::stoi(cells[17]);
    r.cycles = std::stoi(cells[18]);
    r.converged = cells[19] == "1";
    r.eta_inf = std::stod(cells[20]);
    r.time_ms = std::stod(cells[21]);
    out.push_back(std::move(r));
  }
  return out;
}

ResultStore run_experiment(const ExperimentSpec& spec) {
  ResultStore store;
  store.setting = spec.setting;
  store.trim_fraction =
      (!spec.custom_csv && spec.setting == Setting::poisson_count) ? 0.05 : 0.0;
  for (const auto& m : spec.methods) store.method_order.push_back(m.name);
  if (spec.include_oracle && !spec.custom_csv) store.method_order.push_back("oracle");

  TruthSpec truth;
  Dataset csv_data;
  const Dataset* csv_ptr = nullptr;
  if (spec.custom_csv) {
    csv_data = load_csv(spec.csv_path, spec.response_column, parse_family(spec.csv_family));
    csv_ptr = &csv_data;
    truth = TruthSpec::from_beta(Eigen::VectorXd::Zero(csv_data.p()));
  } else {
    truth = paper_truth(spec.setting, spec.p);
    if (spec.sigma >= 0.0) truth.sigma = spec.sigma;
  }

  std::filesystem::create_directories(spec.output_dir);
  const std::string replicates_path = spec.output_dir + "/replicates.csv";

  // resume support: rows already on disk are kept, their replicates skipped
  std::map<std::pair<std::string, int>, ReplicateRecord> done;
  for (auto& r : read_replicates_csv(replicates_path))
    done[{r.method, r.replicate}] = std::move(r);

  std::set<int> complete;
  for (int rep = 0; rep < spec.replications; ++rep) {
    bool all = true;
    for (const auto& name : store.method_order)
      if (!done.count({name, rep})) {
        all = false;
        break;
      }
    if (all) complete.insert(rep);
  }

  const bool fresh_file = done.empty();
  std::ofstream out(replicates_path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + replicates_path + " for append");
  if (fresh_file) out << kReplicateHeader << '\n';

  std::mutex mu;
  std::atomic<int> next{0};
  std::exception_ptr failure;

  auto work = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= spec.replications) return;
      if (complete.count(rep)) continue;
      try {
        auto records = run_replicate(spec, truth, csv_ptr, rep);
        std::lock_guard<std::mutex> lock(mu);
        for (auto& r : records) {
          const auto key = std::make_pair(r.method, r.replicate);
          if (done.count(key)) continue;  // partial rerun: keep the disk row
          out << replicate_row(r) << '\n';
          done[key] = std::move(r);
        }
        out.flush();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::min(worker_count(spec), spec.replications);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& [key, rec] : done)
    if (key.second < spec.replications) store.records.push_back(rec);
  std::sort(store.records.begin(), store.records.end(),
            [](const ReplicateRecord& a, const ReplicateRecord& b) {
              return a.replicate != b.replicate ? a.replicate < b.replicate
                                                : a.method < b.method;
            });

  // lambda-vs-coefficient trajectories from replicate 0, at each method's
  // selected threshold, for external plotting
  if (!spec.custom_csv) {
    const ReplicateData d0 = make_replicate_data(spec, truth, nullptr, 0);
    const int cap = resolve_spark_cap(spec, d0.train);
    for (const MethodSpec& method : spec.methods) {
      const auto it = done.find({method.name, 0});
      if (it == done.end() || !it->second.ok) continue;
      const double tau = it->second.tau;
      try {
        const auto grid = default_lambda_grid(d0.train, method.penalty,
                                              spec.tuning.num_lambda,
                                              spec.tuning.lambda_min_ratio);
        const auto path = fit_path(d0.train, method.penalty, grid,
                                   [tau](double) { return tau; }, cap, spec.solver);
        for (size_t i = 0; i < path.size(); ++i)
          for (int j : path[i].support)
            store.path_rows.push_back({method.name, grid[i], j, path[i].beta[j]});
      } catch (const std::exception&) {
        // path capture is best effort; the experiment results stand
      }
    }
  }
  return store;
}

namespace {

struct Summary {
  double mean = 0.0;
  double se = 0.0;
};

Summary summarize(const std::vector<double>& values, double trim) {
  Summary s;
  if (values.empty()) return s;
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  const int drop = static_cast<int>(std::floor(trim * v.size()));
  if (static_cast<int>(v.size()) - 2 * drop <= 0) return s;
  v = std::vector<double>(v.begin() + drop, v.end() - drop);
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

const std::vector<std::string> kMeasureOrder = {"pe",     "l2", "l1",       "linf",
                                                "fp",     "fn", "fs",       "kl_per_n",
                                                "sigma_hat"};

}  // namespace

std::vector<AggregateRow> ResultStore::aggregate() const {
  std::vector<AggregateRow> rows;
  for (const std::string& name : method_order) {
    AggregateRow row;
    row.method = name;
    std::map<std::string, std::vector<double>> values;
    int ok_count = 0, consistent = 0, sign_ok = 0;
    for (const auto& rec : records) {
      if (rec.method != name || !rec.ok) continue;
      ++ok_count;
      values["pe"].push_back(rec.metrics.pe);
      values["l2"].push_back(rec.metrics.l2);
      values["l1"].push_back(rec.metrics.l1);
      values["linf"].push_back(rec.metrics.linf);
      values["fp"].push_back(rec.metrics.fp);
      values["fn"].push_back(rec.metrics.fn);
      values["fs"].push_back(rec.metrics.fs);
      values["kl_per_n"].push_back(rec.metrics.kl_per_n);
      if (rec.metrics.sigma_hat) values["sigma_hat"].push_back(*rec.metrics.sigma_hat);
      if (rec.metrics.fp == 0 && rec.metrics.fn == 0) ++consistent;
      if (rec.metrics.fs == 0) ++sign_ok;
    }
    row.replications = ok_count;
    if (ok_count > 0) {
      row.consistency_probability = static_cast<double>(consistent) / ok_count;
      row.sign_consistency_rate = static_cast<double>(sign_ok) / ok_count;
      for (const auto& key : kMeasureOrder) {
        const auto it = values.find(key);
        if (it == values.end() || it->second.empty()) continue;
        const Summary s = summarize(it->second, trim_fraction);
        row.measures[key] = {s.mean, s.se};
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string aggregate_csv_text(const ResultStore& store) {
  const auto rows = store.aggregate();
  std::ostringstream os;
  os << "method,replications,consistency_probability,sign_consistency_rate";
  for (const auto& key : kMeasureOrder) os << ',' << key << "_mean," << key << "_se";
  os << '\n';
  for (const auto& row : rows) {
    os << row.method << ',' << row.replications << ','
       << g12(row.consistency_probability) << ',' << g12(row.sign_consistency_rate);
    for (const auto& key : kMeasureOrder) {
      const auto it = row.measures.find(key);
      if (it == row.measures.end())
        os << ",,";
      else
        os << ',' << g12(it->second.first) << ',' << g12(it->second.second);
    }
    os << '\n';
  }
  return os.str();
}

void emit_tables(const ResultStore& store, const std::string& output_dir,
                 const std::vector<TableFormat>& formats) {
  if (store.records.empty()) throw std::invalid_argument("empty result store");
  std::filesystem::create_directories(output_dir);
  const auto rows = store.aggregate();

  for (TableFormat f : formats) {
    if (f == TableFormat::csv) {
      std::ofstream out(output_dir + "/aggregate.csv");
      if (!out) throw std::runtime_error("cannot write aggregate.csv");
      out << aggregate_csv_text(store);
    } else if (f == TableFormat::json) {
      json j;
      j["setting"] = setting_name(store.setting);
      j["trim_fraction"] = store.trim_fraction;
      json methods = json::array();
      for (const auto& row : rows) {
        json m;
        m["method"] = row.method;
        m["replications"] = row.replications;
        m["consistency_probability"] = row.consistency_probability;
        m["sign_consistency_rate"] = row.sign_consistency_rate;
        for (const auto& [key, val] : row.measures) {
          m[key + "_mean"] = val.first;
          m[key + "_se"] = val.second;
        }
        methods.push_back(std::move(m));
      }
      j["methods"] = std::move(methods);
      std::ofstream out(output_dir + "/aggregate.json");
      if (!out) throw std::runtime_error("cannot write aggregate.json");
      out << j.dump(2) << '\n';
    } else {
      // markdown mirrors the measures x methods layout of the benchmark tables
      std::ofstream out(output_dir + "/aggregate.md");
      if (!out) throw std::runtime_error("cannot write aggregate.md");
      out << "| Measure |";
      for (const auto& row : rows) out << ' ' << row.method << " |";
      out << "\n|---|";
      for (size_t i = 0; i < rows.size(); ++i) out << "---|";
      out << '\n';
      for (const auto& key : kMeasureOrder) {
        bool any = false;
        for (const auto& row : rows) any = any || row.measures.count(key);
        if (!any) continue;
        out << "| " << key << " |";
        for (const auto& row : rows) {
          const auto it = row.measures.find(key);
          if (it == row.measures.end())
            out << " --- |";
          else
            out << ' ' << g12(it->second.first) << " (" << g12(it->second.second)
                << ") |";
        }
        out << '\n';
      }
      out << "| consistency probability |";
      for (const auto& row : rows) out << ' ' << g12(row.consistency_probability) << " |";
      out << "\n| sign consistency rate |";
      for (const auto& row : rows) out << ' ' << g12(row.sign_consistency_rate) << " |";
      out << '\n';
    }
  }

  std::ofstream path_out(output_dir + "/path.csv");
  if (!path_out) throw std::runtime_error("cannot write path.csv");
  path_out << "method,lambda,coef_index,coef_value\n";
  for (const auto& row : store.path_rows)
    path_out << row.method << ',' << g17(row.lambda) << ',' << row.coef_index << ','
             << g17(row.coef_value) << '\n';
}

OracleCheckReport run_oracle_check(const Penalty& pen, int instances,
                                   std::uint64_t seed) {
  OracleCheckReport report;
  report.instances = instances;
  const int n = 30, p = 8;  // two-signal instances
  const double lambda = lambda_schedule(0.5, n, p);
  const double tau = tau_schedule(0.5, n, p);
  const int cap = 6;  // supports of size <= 2 are feasible

  for (int t = 0; t < instances; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(p);
    while (true) {
      const int i = static_cast<int>(rng.below(p));
      const int j = static_cast<int>(rng.below(p));
      if (i == j) continue;
      beta0[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.8 + 0.7 * rng.uniform());
      beta0[j] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.8 + 0.7 * rng.uniform());
      break;
    }
    const TruthSpec truth = TruthSpec::from_beta(beta0, 0.3);
    const Dataset data = simulate_dataset(Family::gaussian, n, p, 0.3, truth, rng);

    // warm the target fit through a short path ending exactly at lambda
    const double top = std::max(lambda_max(data, pen) * 1.001, lambda * 1.5);
    std::vector<double> grid(10);
    for (int i = 0; i < 10; ++i)
      grid[i] = top * std::pow(lambda / top, static_cast<double>(i) / 9.0);
    grid.back() = lambda;
    FitConfig cfg;
    const auto path = fit_path(data, pen, grid, [tau](double) { return tau; }, cap, cfg);
    const FitResult& ica = path.back();

    const RegObjective obj{Family::gaussian, pen, lambda, tau, cap};
    const BruteForceReport bf = brute_force_global(data, obj);

    const double gap = ica.objective - bf.best.objective;
    if (std::abs(gap) <= 1e-6) ++report.agreements;
    report.worst_gap = std::max(report.worst_gap, gap);
    report.worst_below = std::max(report.worst_below, -gap);
  }
  return report;
}

}  // namespace threshreg
