#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "threshreg/data.hpp"
#include "threshreg/penalty.hpp"

namespace threshreg {

struct FitConfig {
  int max_cycles = 500;
  double tol = 1e-7;  // max coordinate change per cycle
  ThresholdMode mode = ThresholdMode::exact;
  int damping_max_halvings = 20;
  std::optional<Eigen::VectorXd> warm_start;  // zeros when empty
};

struct FitResult {
  Eigen::VectorXd beta;
  std::vector<int> support;
  double objective = 0.0;
  int cycles_used = 0;
  bool converged = false;
  double eta_inf = 0.0;  // max |covariate-residual correlation| at the solution
  ThresholdMode mode = ThresholdMode::exact;
  double lambda = 0.0;
  double tau = 0.0;
  int cap_rejections = 0;  // coordinate updates refused by the support-size cap
  int weight_floor_hits = 0;
};

// Local quadratic model of the negative log-likelihood at beta:
// weights w_i = b''(theta_i) (floored at 1e-10), working response
// u_i = theta_i + (y_i - b'(theta_i)) / w_i.
struct WorkingModel {
  Eigen::VectorXd weights;
  Eigen::VectorXd working_response;
  bool floored = false;
};

WorkingModel quadratic_working_model(Family family, const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& beta);

// Cyclic coordinate optimization of Q_n over the thresholded space. Each
// coordinate solves the univariate penalized quadratic under the tau rule;
// updates that would breach ||beta||_0 < spark_cap/2 are rejected. For
// non-Gaussian families a cycle that raises Q_n is damped by halving the
// step back toward the previous iterate.
FitResult fit_ica(const Dataset& data, const RegObjective& obj, const FitConfig& cfg);

// Smallest lambda for which the all-zero vector is a fixed point of the
// coordinate updates (for l1 this equals || score(0) ||_inf; for bounded
// penalties it is found by bisection on the per-coordinate entry condition).
double lambda_max(const Dataset& data, const Penalty& pen);

// Log-spaced grid of num points from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda_grid(const Dataset& data, const Penalty& pen,
                                        int num = 50, double min_ratio = 1e-3);

// Sequential fits from the largest lambda down, warm starting each fit at the
// previous solution; tau_rule maps lambda to the threshold for that fit.
// A failed grid point is recorded with converged=false and the path continues.
std::vector<FitResult> fit_path(const Dataset& data, const Penalty& pen,
                                const std::vector<double>& lambda_grid,
                                const std::function<double(double)>& tau_rule,
                                int spark_cap, const FitConfig& cfg);

}  // namespace threshreg
