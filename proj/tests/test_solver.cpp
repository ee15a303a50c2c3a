#include <doctest.h>

#include <cmath>

#include "threshreg/data.hpp"
#include "threshreg/diagnostics.hpp"
#include "threshreg/solver.hpp"

using namespace threshreg;

namespace {

Dataset gaussian_instance(int n, int p, double r, const TruthSpec& truth,
                          std::uint64_t seed) {
  Rng rng(seed);
  return simulate_dataset(Family::gaussian, n, p, r, truth, rng);
}

double soft(double z, double lambda) {
  const double m = std::abs(z) - lambda;
  return m > 0.0 ? (z > 0 ? m : -m) : 0.0;
}

// orthonormal design: n = p, X = sqrt(n) I, columns have norm sqrt(n)
Dataset orthonormal_instance(int n, const Eigen::VectorXd& y) {
  Dataset ds;
  ds.X = Eigen::MatrixXd::Identity(n, n) * std::sqrt(static_cast<double>(n));
  ds.y = y;
  ds.family = Family::gaussian;
  ds.column_scales = Eigen::VectorXd::Ones(n);
  ds.rescaled = true;
  return ds;
}

}  // namespace

TEST_CASE("quadratic_working_model gaussian and bernoulli") {
  Rng rng(2);
  const TruthSpec truth = paper_truth(Setting::linear, 10);
  const Dataset ds = gaussian_instance(25, 10, 0.2, truth, 3);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(10);
  beta[0] = 0.4;
  const WorkingModel g = quadratic_working_model(Family::gaussian, ds.X, ds.y, beta);
  CHECK((g.weights.array() == 1.0).all());
  CHECK((g.working_response - ds.y).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd yb(25);
  for (int i = 0; i < 25; ++i) yb[i] = rng.bernoulli(0.5);
  const WorkingModel b =
      quadratic_working_model(Family::bernoulli, ds.X, yb, Eigen::VectorXd::Zero(10));
  CHECK((b.weights.array() == 0.25).all());
  for (int i = 0; i < 25; ++i)
    CHECK(b.working_response[i] == doctest::Approx(4.0 * (yb[i] - 0.5)).epsilon(1e-12));
}

TEST_CASE("working model surrogate gradient equals the score") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Family fam = rep % 2 == 0 ? Family::bernoulli : Family::poisson;
    const int n = 12, p = 4;
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = 0.3 * rng.normal();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double theta = X.row(i).dot(beta);
      y[i] = fam == Family::bernoulli
                 ? rng.bernoulli(b_prime(fam, theta))
                 : static_cast<double>(rng.poisson(std::exp(theta)));
    }
    const WorkingModel wm = quadratic_working_model(fam, X, y, beta);
    // surrogate gradient at beta: -n^{-1} sum w_i x_i (u_i - x_i' beta)
    const Eigen::VectorXd theta = X * beta;
    const Eigen::VectorXd surr =
        -(X.transpose() *
          (wm.weights.array() * (wm.working_response - theta).array()).matrix()) /
        n;
    const Eigen::VectorXd s = score(fam, X, y, beta);
    CHECK((surr - s).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("orthonormal design reduces to soft thresholding") {
  const int n = 12;
  Rng rng(7);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal() * 1.5;
  const Dataset ds = orthonormal_instance(n, y);

  const double lambda = 0.35;
  RegObjective obj{Family::gaussian, Penalty::l1(), lambda, 0.0, 2 * n + 1};
  FitConfig cfg;
  const FitResult fit = fit_ica(ds, obj, cfg);
  CHECK(fit.converged);
  for (int j = 0; j < n; ++j) {
    const double z = ds.X.col(j).dot(y) / n;  // = y_j / sqrt(n) * ... scaled
    CHECK(fit.beta[j] == doctest::Approx(soft(z, lambda)).epsilon(1e-9));
  }
}

TEST_CASE("null model beyond lambda_max") {
  const TruthSpec truth = paper_truth(Setting::linear, 15);
  const Dataset ds = gaussian_instance(40, 15, 0.3, truth, 11);
  const double lmax = lambda_max(ds, Penalty::l1());
  RegObjective obj{Family::gaussian, Penalty::l1(), lmax * 1.01, 0.0, 15};
  FitConfig cfg;
  const FitResult fit = fit_ica(ds, obj, cfg);
  CHECK(fit.support.empty());
  CHECK(fit.converged);
}

TEST_CASE("feasibility invariants of fit results") {
  const TruthSpec truth = paper_truth(Setting::linear, 20);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const Dataset ds = gaussian_instance(50, 20, 0.4, truth, seed);
    for (auto mode : {ThresholdMode::exact, ThresholdMode::drop}) {
      RegObjective obj{Family::gaussian, Penalty::scad(3.7), 0.08, 0.25, 9};
      FitConfig cfg;
      cfg.mode = mode;
      const FitResult fit = fit_ica(ds, obj, cfg);
      CHECK(is_feasible(obj, fit.beta));
      CHECK(static_cast<double>(fit.support.size()) < 4.5);
      for (int j : fit.support) CHECK(std::abs(fit.beta[j]) >= 0.25);
      CHECK(fit.objective ==
            doctest::Approx(objective(obj, ds.X, ds.y, fit.beta)).epsilon(1e-10));
    }
  }
}

TEST_CASE("gaussian exact-mode objective never increases across cycles") {
  const TruthSpec truth = paper_truth(Setting::linear, 12);
  const Dataset ds = gaussian_instance(30, 12, 0.5, truth, 31);
  RegObjective obj{Family::gaussian, Penalty::mcp(3.0), 0.1, 0.2, 9};

  // drive the solver one cycle at a time via warm starts and watch Q_n
  FitConfig one;
  one.max_cycles = 1;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
  double prev = objective(obj, ds.X, ds.y, beta);
  for (int cycle = 0; cycle < 25; ++cycle) {
    one.warm_start = beta;
    const FitResult fit = fit_ica(ds, obj, one);
    const double q = objective(obj, ds.X, ds.y, fit.beta);
    CHECK(q <= prev + 1e-12);
    prev = q;
    beta = fit.beta;
  }
}

TEST_CASE("non-gaussian cycles are nonincreasing after damping") {
  Rng rng(41);
  const TruthSpec truth = paper_truth(Setting::logistic, 12);
  Dataset ds;
  {
    Rng gen(43);
    ds = simulate_dataset(Family::bernoulli, 60, 12, 0.25, truth, gen);
  }
  RegObjective obj{Family::bernoulli, Penalty::scad(3.7), 0.05, 0.2, 11};
  FitConfig one;
  one.max_cycles = 1;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
  double prev = objective(obj, ds.X, ds.y, beta);
  for (int cycle = 0; cycle < 40; ++cycle) {
    one.warm_start = beta;
    const FitResult fit = fit_ica(ds, obj, one);
    const double q = objective(obj, ds.X, ds.y, fit.beta);
    CHECK(q <= prev + 1e-10);
    prev = q;
    beta = fit.beta;
  }
}

TEST_CASE("idempotence at a fixed point") {
  const TruthSpec truth = paper_truth(Setting::linear, 15);
  const Dataset ds = gaussian_instance(40, 15, 0.25, truth, 51);
  for (auto mode : {ThresholdMode::exact, ThresholdMode::drop}) {
    RegObjective obj{Family::gaussian, Penalty::sica(1e-2), 0.02, 0.2, 11};
    FitConfig cfg;
    cfg.mode = mode;
    const FitResult first = fit_ica(ds, obj, cfg);
    REQUIRE(first.converged);
    FitConfig warm = cfg;
    warm.warm_start = first.beta;
    const FitResult second = fit_ica(ds, obj, warm);
    CHECK((second.beta - first.beta).cwiseAbs().maxCoeff() <= cfg.tol);
    CHECK(second.cycles_used <= 2);
  }
}

TEST_CASE("stationarity certificate on the support for converged linear fits") {
  // interior solutions: tau well below the achieved magnitudes
  const TruthSpec truth = paper_truth(Setting::linear, 18);
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    const Dataset ds = gaussian_instance(60, 18, 0.25, truth, seed);
    RegObjective obj{Family::gaussian, Penalty::scad(3.7), 0.05, 0.05, 17};
    FitConfig cfg;
    const FitResult fit = fit_ica(ds, obj, cfg);
    REQUIRE(fit.converged);
    REQUIRE(!fit.support.empty());
    const Eigen::VectorXd s = score(Family::gaussian, ds.X, ds.y, fit.beta);
    double max_score = 0.0, max_deriv = 0.0;
    for (int j : fit.support) {
      max_score = std::max(max_score, std::abs(s[j]));
      max_deriv = std::max(
          max_deriv, penalty_derivative(obj.penalty, obj.lambda, std::abs(fit.beta[j])));
    }
    CHECK(max_score <= max_deriv + 1e-6);
  }
}

TEST_CASE("l1 kkt bound off the support") {
  const TruthSpec truth = paper_truth(Setting::linear, 20);
  const Dataset ds = gaussian_instance(50, 20, 0.25, truth, 71);
  const double lambda = 0.12;
  RegObjective obj{Family::gaussian, Penalty::l1(), lambda, 0.0, 21};
  FitConfig cfg;
  const FitResult fit = fit_ica(ds, obj, cfg);
  REQUIRE(fit.converged);
  const Eigen::VectorXd s = score(Family::gaussian, ds.X, ds.y, fit.beta);
  for (int j = 0; j < 20; ++j)
    if (fit.beta[j] == 0.0) CHECK(std::abs(s[j]) <= lambda + 1e-6);
}

TEST_CASE("fit_path warm starts cut the cycle count") {
  // tau = 0 keeps the problem convex so warm and cold reach the same minimum
  const TruthSpec truth = paper_truth(Setting::linear, 40);
  int warm_wins = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset ds = gaussian_instance(80, 40, 0.5, truth, 200 + seed);
    const double top = lambda_max(ds, Penalty::l1()) * 1.001;
    // the first fit carries a partial model, so the second starts warm
    const std::vector<double> grid = {top * 0.2, top * 0.16};
    FitConfig cfg;
    cfg.tol = 1e-5;
    const auto path =
        fit_path(ds, Penalty::l1(), grid, [](double) { return 0.0; }, 81, cfg);
    RegObjective tail{Family::gaussian, Penalty::l1(), grid[1], 0.0, 81};
    const FitResult cold = fit_ica(ds, tail, cfg);
    ++total;
    if (path[1].cycles_used < cold.cycles_used) ++warm_wins;
    // both reach the same objective
    CHECK(path[1].objective <= cold.objective + 1e-8);
  }
  CHECK(warm_wins * 10 >= total * 9);  // warm start strictly faster in >= 90%
}

TEST_CASE("path on orthogonal designs has nested supports for l1") {
  const int n = 16;
  Rng rng(91);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 2.0 * rng.normal();
  const Dataset ds = orthonormal_instance(n, y);
  const auto grid = default_lambda_grid(ds, Penalty::l1(), 12, 1e-2);
  FitConfig cfg;
  const auto path = fit_path(ds, Penalty::l1(), grid, [](double) { return 0.0; },
                             2 * n + 1, cfg);
  CHECK(path.front().support.empty());
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    for (int j : path[i].support) {
      const auto& nxt = path[i + 1].support;
      CHECK(std::find(nxt.begin(), nxt.end(), j) != nxt.end());
    }
  }
}

TEST_CASE("path lambda grid validation") {
  const TruthSpec truth = paper_truth(Setting::linear, 10);
  const Dataset ds = gaussian_instance(20, 10, 0.1, truth, 95);
  FitConfig cfg;
  CHECK_THROWS(fit_path(ds, Penalty::l1(), {0.1, 0.2}, [](double) { return 0.0; }, 9, cfg));
  CHECK_THROWS(fit_path(ds, Penalty::l1(), {0.1, -0.2}, [](double) { return 0.0; }, 9, cfg));
}

TEST_CASE("solver rejects l0 and unscaled data") {
  const TruthSpec truth = paper_truth(Setting::linear, 10);
  Dataset ds = gaussian_instance(20, 10, 0.1, truth, 97);
  RegObjective obj{Family::gaussian, Penalty::l0(), 0.1, 0.0, 9};
  FitConfig cfg;
  CHECK_THROWS(fit_ica(ds, obj, cfg));
  obj.penalty = Penalty::l1();
  ds.rescaled = false;
  CHECK_THROWS(fit_ica(ds, obj, cfg));
}
