#pragma once

#include <Eigen/Dense>
#include <vector>

#include "threshreg/glm.hpp"
#include "threshreg/rng.hpp"

namespace threshreg {

// Estimate of the robust spark kappa_c of a design: the smallest number of
// columns of n^{-1/2} X forming a submatrix with a singular value below c.
//   exact:                ly from exhaustive enumeration; a witness is attached
//                         unless the sentinel p+1 (no violating subset) fired.
//   upper_bound:          a violating subset of this size was found (witness)
//                         or the search exhausted its budget (no witness,
//                         value n+1).
//   lower_bound_verified: all subsets of size <= value-1 were checked and
//                         none violates; kappa_c >= value.
struct SparkEstimate {
  double c = 0.0;
  enum class Kind { exact, upper_bound, lower_bound_verified } kind = Kind::upper_bound;
  int value = 0;
  std::vector<int> witness;
};

// Smallest singular value of the n x |cols| submatrix of n^{-1/2} X.
double submatrix_min_singular_value(const Eigen::MatrixXd& X,
                                    const std::vector<int>& cols);

// Exhaustive over all column subsets in increasing size, up to min(p, n+1).
// Sentinel p+1 when nothing violates. Guard: p <= 20.
SparkEstimate robust_spark_exact(const Eigen::MatrixXd& X, double c);

// Verifies kappa_c >= max_size+1 by checking every subset of size <= max_size.
SparkEstimate robust_spark_lower_bound(const Eigen::MatrixXd& X, double c, int max_size);

// Randomized + greedy search for small violating submatrices: a scan of the
// most correlated column pairs, random subsets of increasing size, and greedy
// column elimination keeping the smallest singular value minimal. budget
// counts singular-value evaluations.
SparkEstimate robust_spark_search(const Eigen::MatrixXd& X, double c, int budget,
                                  Rng& rng);

// || (n^{-1} X_S' X_S)^{-1} ||_inf over the given support (Gaussian case).
double gamma_star_gaussian(const Eigen::MatrixXd& X, const std::vector<int>& support);

enum class GammaMode { exact, greedy };

// sup over noise subsets alpha (|alpha| <= s) of || n^{-1} X_S' X_alpha ||_inf.
// The sup of the max row sum is attained by taking, per row, the s largest
// absolute cross products, so greedy equals exact and is the default.
// Exact mode enumerates (guards: p - |support| <= 20, s <= 4).
double gamma_n_gaussian(const Eigen::MatrixXd& X, const std::vector<int>& support,
                        int s, GammaMode mode = GammaMode::greedy);

// eta_n = || n^{-1} X' (y - mu(X beta_hat)) ||_inf = || score ||_inf.
double eta_infinity(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta_hat);

// Finite-sample proxy of the computable-solution conditions:
// (eta + lambda) < tau/3 and beta0_min > 3 sqrt(s) (eta + lambda).
// A heuristic flag, not a proof.
bool tau_threshold_check(double eta, double lambda, double tau, double beta0_min,
                         int s);

}  // namespace threshreg
