#pragma once

#include <Eigen/Dense>
#include <string>

#include "threshreg/errors.hpp"

namespace threshreg {

enum class Family { gaussian, bernoulli, poisson };

std::string family_name(Family family);
Family parse_family(const std::string& name);

// theta_i = x_i' beta
using LinearPredictor = Eigen::VectorXd;

// Cumulant b and its derivatives for the canonical link.
//   gaussian:  b(t) = t^2/2,        b' = t,            b'' = 1
//   bernoulli: b(t) = log(1+e^t),   b' = logistic(t),  b'' = mu(1-mu)
//   poisson:   b(t) = e^t,          b' = e^t,          b'' = e^t
// Poisson throws DomainOverflowError for |t| > 700.
double b_value(Family family, double theta);
double b_prime(Family family, double theta);
double b_double_prime(Family family, double theta);

// Throws ResponseSupportError unless y is in the family support
// (bernoulli: {0,1}; poisson: nonnegative integers).
void check_response(Family family, const Eigen::VectorXd& y);

// L(beta) = -n^{-1} { y'X beta - 1'b(X beta) }, dispersion term dropped.
double neg_log_likelihood(Family family, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

// grad L(beta) = -n^{-1} X'(y - b'(X beta))
Eigen::VectorXd score(Family family, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

// D(beta_hat) = -(EY)'X(beta_hat - beta0) + 1'[b(X beta_hat) - b(X beta0)]
// with EY = b'(X beta0). Nonnegative; zero iff X beta_hat = X beta0.
double kl_divergence(Family family, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0);

// mu_i = b'(theta_i) and w_i = b''(theta_i), elementwise
Eigen::VectorXd mean_vector(Family family, const Eigen::VectorXd& theta);
Eigen::VectorXd variance_vector(Family family, const Eigen::VectorXd& theta);

}  // namespace threshreg
