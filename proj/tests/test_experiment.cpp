#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "threshreg/experiment.hpp"

using namespace threshreg;

namespace {

std::string tiny_config(const std::string& outdir, int workers) {
  std::ostringstream os;
  os << R"({
    "setting": "linear",
    "n": 30, "p": 12, "r": 0.25, "sigma": 0.4,
    "replications": 4,
    "test_size": 300,
    "master_seed": 424242,
    "spark_cap": 11,
    "workers": )"
     << workers << R"(,
    "methods": [ {"penalty": "l1"}, {"penalty": "scad", "a": 3.7} ],
    "tuning": {
      "method": "validation_set",
      "num_lambda": 8,
      "lambda_min_ratio": 0.01,
      "c6_values": [0.5, 1.0]
    },
    "output_dir": ")"
     << outdir << R"("
  })";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void wipe(const std::string& dir) { std::filesystem::remove_all(dir); }

}  // namespace

TEST_CASE("experiment spec json round trip") {
  const ExperimentSpec spec = ExperimentSpec::from_json_string(tiny_config("/tmp/x", 1));
  CHECK(spec.setting == Setting::linear);
  CHECK(spec.n == 30);
  CHECK(spec.p == 12);
  CHECK(spec.replications == 4);
  CHECK(spec.methods.size() == 2);
  CHECK(spec.methods[0].name == "l1_t");
  CHECK(spec.methods[1].name == "scad_t");
  CHECK(spec.methods[1].penalty.a == 3.7);
  CHECK(spec.tuning.c6_values == std::vector<double>{0.5, 1.0});
  CHECK(spec.spark_cap == 11);

  CHECK_THROWS(ExperimentSpec::from_json_string("{\"methods\": []}"));
  CHECK_THROWS(ExperimentSpec::from_json_string("not json"));
}

TEST_CASE("tiny experiment runs, persists, and aggregates") {
  const std::string dir = "/tmp/threshreg_exp1";
  wipe(dir);
  const ExperimentSpec spec = ExperimentSpec::from_json_string(tiny_config(dir, 1));
  const ResultStore store = run_experiment(spec);

  // one row per (method, replicate) incl. the oracle
  CHECK(store.records.size() == 3 * 4);
  CHECK(store.method_order == std::vector<std::string>{"l1_t", "scad_t", "oracle"});

  const auto rows = store.aggregate();
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.replications == 4);
    CHECK(row.measures.count("pe"));
    CHECK(row.measures.count("sigma_hat"));  // gaussian setting
    CHECK(row.consistency_probability >= 0.0);
    CHECK(row.consistency_probability <= 1.0);
  }

  emit_tables(store, dir, {TableFormat::csv, TableFormat::json, TableFormat::markdown});
  CHECK(std::filesystem::exists(dir + "/aggregate.csv"));
  CHECK(std::filesystem::exists(dir + "/aggregate.json"));
  CHECK(std::filesystem::exists(dir + "/aggregate.md"));
  CHECK(std::filesystem::exists(dir + "/path.csv"));
  CHECK(std::filesystem::exists(dir + "/replicates.csv"));

  // json aggregate carries the consistency probability per method
  const std::string json_text = read_file(dir + "/aggregate.json");
  CHECK(json_text.find("consistency_probability") != std::string::npos);

  // path file has rows for at least one method
  const std::string path_text = read_file(dir + "/path.csv");
  CHECK(path_text.find("l1_t") != std::string::npos);
}

TEST_CASE("rerun with the same seed is byte identical and worker independent") {
  const std::string d1 = "/tmp/threshreg_det1";
  const std::string d2 = "/tmp/threshreg_det2";
  const std::string d3 = "/tmp/threshreg_det3";
  wipe(d1);
  wipe(d2);
  wipe(d3);

  const ResultStore s1 =
      run_experiment(ExperimentSpec::from_json_string(tiny_config(d1, 1)));
  const ResultStore s2 =
      run_experiment(ExperimentSpec::from_json_string(tiny_config(d2, 1)));
  const ResultStore s3 =
      run_experiment(ExperimentSpec::from_json_string(tiny_config(d3, 3)));

  const std::string a1 = aggregate_csv_text(s1);
  CHECK(a1 == aggregate_csv_text(s2));
  CHECK(a1 == aggregate_csv_text(s3));  // independent of worker count

  emit_tables(s1, d1, {TableFormat::csv});
  emit_tables(s3, d3, {TableFormat::csv});
  CHECK(read_file(d1 + "/aggregate.csv") == read_file(d3 + "/aggregate.csv"));
}

TEST_CASE("replicates csv round trips and resume skips finished work") {
  const std::string dir = "/tmp/threshreg_resume";
  wipe(dir);
  const ExperimentSpec spec = ExperimentSpec::from_json_string(tiny_config(dir, 1));
  const ResultStore first = run_experiment(spec);

  const auto rows = read_replicates_csv(dir + "/replicates.csv");
  CHECK(rows.size() == first.records.size());
  // parsed rows reproduce the aggregates exactly
  ResultStore reparsed;
  reparsed.setting = first.setting;
  reparsed.method_order = first.method_order;
  reparsed.trim_fraction = first.trim_fraction;
  reparsed.records = rows;
  std::sort(reparsed.records.begin(), reparsed.records.end(),
            [](const ReplicateRecord& a, const ReplicateRecord& b) {
              return a.replicate != b.replicate ? a.replicate < b.replicate
                                                : a.method < b.method;
            });
  CHECK(aggregate_csv_text(reparsed) == aggregate_csv_text(first));

  // truncate to the first replicate's rows and resume
  std::vector<std::string> lines;
  {
    std::ifstream in(dir + "/replicates.csv");
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  {
    std::ofstream out(dir + "/replicates.csv");
    for (size_t i = 0; i < lines.size(); ++i) {
      // keep the header and replicate-0 rows only
      if (i == 0 || lines[i].find(",0,1,,") != std::string::npos ||
          lines[i].rfind("l1_t,0,", 0) == 0 || lines[i].rfind("scad_t,0,", 0) == 0 ||
          lines[i].rfind("oracle,0,", 0) == 0)
        out << lines[i] << '\n';
    }
  }
  const size_t kept = read_replicates_csv(dir + "/replicates.csv").size();
  CHECK(kept == 3);

  const ResultStore resumed = run_experiment(spec);
  CHECK(resumed.records.size() == first.records.size());
  CHECK(aggregate_csv_text(resumed) == aggregate_csv_text(first));
  // no duplicate rows were appended
  CHECK(read_replicates_csv(dir + "/replicates.csv").size() == first.records.size());
}

TEST_CASE("poisson aggregates use trimmed means") {
  std::string cfg = R"({
    "setting": "poisson",
    "n": 40, "p": 8, "r": 0.2,
    "replications": 3,
    "test_size": 200,
    "master_seed": 99,
    "spark_cap": 11,
    "workers": 1,
    "methods": [ {"penalty": "sica", "a": 0.01} ],
    "tuning": {"num_lambda": 6, "lambda_min_ratio": 0.05, "c6_values": [1.0]},
    "output_dir": "/tmp/threshreg_poisson"
  })";
  wipe("/tmp/threshreg_poisson");
  const ExperimentSpec spec = ExperimentSpec::from_json_string(cfg);
  const ResultStore store = run_experiment(spec);
  CHECK(store.trim_fraction == 0.05);
  // with 3 values and 5% trim nothing is dropped, but the flag is set
  CHECK(!store.aggregate().empty());
}

TEST_CASE("oracle check harness reports agreement") {
  const OracleCheckReport rep = run_oracle_check(Penalty::l1(), 5, 123);
  CHECK(rep.instances == 5);
  CHECK(rep.agreements >= 0);
  CHECK(rep.agreements <= 5);
  CHECK(rep.worst_below <= 1e-9);
}
