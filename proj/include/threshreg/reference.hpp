#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "threshreg/data.hpp"
#include "threshreg/penalty.hpp"
#include "threshreg/solver.hpp"

namespace threshreg {

struct BruteForceReport {
  FitResult best;
  long supports_examined = 0;
  // (support, objective) pairs, populated on request
  std::optional<std::vector<std::pair<std::vector<int>, double>>> per_support_minima;
  // supports whose multi-start minima disagreed by more than 1e-6
  std::vector<std::vector<int>> unstable_supports;
};

// Minimizes Q_n over vectors carried exactly by `support` with every
// supported |beta_j| >= tau. Multi-start damped Newton (likelihood Hessian
// metric) with per-coordinate polish; infeasible coordinates are projected
// to the nearer of {-tau, +tau}. Returns +inf objective when every start
// diverges. Detects logistic separation via unbounded iterates.
std::pair<Eigen::VectorXd, double> support_constrained_fit(
    const Dataset& data, const RegObjective& obj, const std::vector<int>& support);

// Exact global minimizer over B_tau by enumerating every support of size
// < spark_cap/2. Guards: p <= 14 and spark_cap/2 <= 5. Ties within 1e-12
// go to the lexicographically smallest support.
BruteForceReport brute_force_global(const Dataset& data, const RegObjective& obj,
                                    bool keep_per_support = false);

// Unpenalized MLE restricted to the true support (damped Newton); the
// benchmark estimator. Off-support coefficients are exactly zero.
Eigen::VectorXd oracle_mle(const Dataset& data, Family family,
                           const std::vector<int>& true_support);

}  // namespace threshreg
