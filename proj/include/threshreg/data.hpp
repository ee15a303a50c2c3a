#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "threshreg/glm.hpp"
#include "threshreg/rng.hpp"

namespace threshreg {

// Design/response pair. When rescaled is true every column of X has
// L2-norm sqrt(n); column_scales holds the factors that were applied.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Family family = Family::gaussian;
  Eigen::VectorXd column_scales;
  bool rescaled = false;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

// True coefficient vector with its support; sigma is the Gaussian noise sd
// (ignored for bernoulli/poisson).
struct TruthSpec {
  Eigen::VectorXd beta0;
  std::vector<int> support;
  int s = 0;
  double sigma = 0.0;

  static TruthSpec from_beta(const Eigen::VectorXd& beta0, double sigma = 0.0);
};

enum class Setting { linear, logistic, poisson_count };

std::string setting_name(Setting s);
Setting parse_setting(const std::string& name);
Family setting_family(Setting s);

// Rows are i.i.d. N(0, Sigma) with Sigma_jk = r^{|j-k|}, built by the AR(1)
// recursion x_1 = z_1, x_j = r x_{j-1} + sqrt(1-r^2) z_j. O(np), no Cholesky.
Eigen::MatrixXd generate_ar1_design(int n, int p, double r, Rng& rng);

// Scales column j by sqrt(n)/||col_j|| so every column has norm sqrt(n).
// Columns already within 1e-13 relative of sqrt(n) are left untouched
// (scale 1), which makes the operation idempotent bit-for-bit.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> rescale_columns(const Eigen::MatrixXd& X);

// gaussian: y = X beta0 + N(0, sigma^2 I); bernoulli: Bern(logistic(theta));
// poisson: Pois(exp(theta)), guarded by max theta <= 30.
Eigen::VectorXd simulate_response(Family family, const Eigen::MatrixXd& X,
                                  const TruthSpec& truth, Rng& rng);

// The benchmark coefficient vectors, zero padded to length p.
//   linear:  (1, -0.5, 0.7, -1.2, -0.9, 0.5, 0.55, 0, ...), sigma = 0.4
//   logistic:(2, 0, -2.3, 0, 2.8, 0, -2.2, 0, 2.5, 0, ...)
//   poisson: (1, -0.9, 0.8, -1.1, 0.6, 0, ...)
TruthSpec paper_truth(Setting setting, int p);

// AR(1) design, rescaled, with the response simulated from the rescaled
// design (beta0 lives on the rescaled scale).
Dataset simulate_dataset(Family family, int n, int p, double r,
                         const TruthSpec& truth, Rng& rng);

// Comma separated, UTF-8, mandatory header row, '.' decimals, no missing
// values. The named response column is extracted; remaining columns become
// the design and are rescaled.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 Family family);

}  // namespace threshreg
