#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "threshreg/data.hpp"
#include "threshreg/rng.hpp"
#include "threshreg/solver.hpp"

namespace threshreg {

// tau = c6 * sqrt(log n) * sqrt(log p / n)
double tau_schedule(double c6, int n, int p);

// lambda = c0 * sqrt(log(max(n, p)) / n)
double lambda_schedule(double c0, int n, int p);

// |{j : sgn(beta_hat_j) != sgn(beta0_j)}| with sgn(0) = 0
int false_signs(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0);

// (fp, fn) = (|supp(beta_hat) \ supp(beta0)|, |supp(beta0) \ supp(beta_hat)|)
std::pair<int, int> selection_errors(const Eigen::VectorXd& beta_hat,
                                     const Eigen::VectorXd& beta0);

// ||beta_hat - beta0||_q for q in [1, 2]; q = infinity for the max norm
double lq_loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0, double q);

// mean over the test set of (y_i - m_i)^2, m_i the family mean at x_i' beta_hat
double prediction_error(Family family, const Eigen::VectorXd& beta_hat,
                        const Eigen::MatrixXd& test_X, const Eigen::VectorXd& test_y);

// sqrt(||y - X beta_hat||^2 / (n - ||beta_hat||_0)); gaussian only
double sigma_hat(const Dataset& data, const Eigen::VectorXd& beta_hat);

// sort, drop floor(fraction * len) from each tail, average the rest
double trimmed_mean(std::vector<double> values, double fraction);

struct MetricsReport {
  double pe = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  int fp = 0;
  int fn = 0;
  int fs = 0;
  bool sign_consistent = false;
  std::optional<double> sigma_hat;  // gaussian only
  double kl_per_n = 0.0;
};

MetricsReport compute_metrics(const Eigen::VectorXd& beta_hat, const TruthSpec& truth,
                              const Dataset& train, const Dataset& test);

struct TuningGrid {
  std::vector<double> lambda_values;  // strictly decreasing, positive
  std::vector<double> c6_values;      // tau multipliers
  enum class Method { validation_set, kfold } method = Method::validation_set;
  int k = 5;
  bool use_threshold = true;  // false: tau = 0 (untresholded fits)
};

struct TuneResult {
  double lambda = 0.0;
  double c6 = 0.0;
  double tau = 0.0;
  double score = 0.0;
  FitResult fit;
};

// Scores every (lambda, c6) pair by validation prediction error (or the mean
// over k folds) using warm-started paths; returns the minimizer with ties to
// larger lambda then larger c6, refit at the winner. rng drives only the
// k-fold shuffle. Throws if every grid fit failed.
TuneResult select_tuning(const Dataset& train, const std::optional<Dataset>& valid,
                         const Penalty& pen, const TuningGrid& grid, int spark_cap,
                         const FitConfig& cfg, Rng& rng);

}  // namespace threshreg
