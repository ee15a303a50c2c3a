#include "threshreg/glm.hpp"

#include <cmath>

namespace threshreg {

namespace {

constexpr double kPoissonThetaLimit = 700.0;

void check_dims(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const Eigen::VectorXd& beta) {
  if (X.rows() != y.size())
    throw DimensionError("design has " + std::to_string(X.rows()) +
                         " rows but response has " + std::to_string(y.size()));
  if (X.cols() != beta.size())
    throw DimensionError("design has " + std::to_string(X.cols()) +
                         " columns but coefficient vector has " +
                         std::to_string(beta.size()));
}

void check_poisson_theta(double theta) {
  if (std::abs(theta) > kPoissonThetaLimit)
    throw DomainOverflowError("poisson linear predictor " + std::to_string(theta) +
                              " exceeds exp() range");
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::bernoulli: return "bernoulli";
    case Family::poisson: return "poisson";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "gaussian" || name == "linear") return Family::gaussian;
  if (name == "bernoulli" || name == "binomial" || name == "logistic")
    return Family::bernoulli;
  if (name == "poisson") return Family::poisson;
  throw std::invalid_argument("unknown family: " + name);
}

double b_value(Family family, double theta) {
  switch (family) {
    case Family::gaussian:
      return 0.5 * theta * theta;
    case Family::bernoulli:
      // two branches keep exp() bounded for both tails
      return theta <= 0.0 ? std::log1p(std::exp(theta))
                          : theta + std::log1p(std::exp(-theta));
    case Family::poisson:
      check_poisson_theta(theta);
      return std::exp(theta);
  }
  return 0.0;
}

double b_prime(Family family, double theta) {
  switch (family) {
    case Family::gaussian:
      return theta;
    case Family::bernoulli: {
      if (theta <= 0.0) {
        const double e = std::exp(theta);
        return e / (1.0 + e);
      }
      return 1.0 / (1.0 + std::exp(-theta));
    }
    case Family::poisson:
      check_poisson_theta(theta);
      return std::exp(theta);
  }
  return 0.0;
}

double b_double_prime(Family family, double theta) {
  switch (family) {
    case Family::gaussian:
      return 1.0;
    case Family::bernoulli: {
      const double mu = b_prime(Family::bernoulli, theta);
      return mu * (1.0 - mu);
    }
    case Family::poisson:
      check_poisson_theta(theta);
      return std::exp(theta);
  }
  return 0.0;
}

void check_response(Family family, const Eigen::VectorXd& y) {
  switch (family) {
    case Family::gaussian:
      return;
    case Family::bernoulli:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
          throw ResponseSupportError("bernoulli response must be 0 or 1, got " +
                                     std::to_string(y[i]) + " at index " +
                                     std::to_string(i));
      return;
    case Family::poisson:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] < 0.0 || y[i] != std::floor(y[i]))
          throw ResponseSupportError(
              "poisson response must be a nonnegative integer, got " +
              std::to_string(y[i]) + " at index " + std::to_string(i));
      return;
  }
}

double neg_log_likelihood(Family family, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  check_dims(X, y, beta);
  check_response(family, y);
  const Eigen::VectorXd theta = X * beta;
  double sum_b = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) sum_b += b_value(family, theta[i]);
  const double n = static_cast<double>(X.rows());
  return -(y.dot(theta) - sum_b) / n;
}

Eigen::VectorXd score(Family family, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  check_dims(X, y, beta);
  check_response(family, y);
  const Eigen::VectorXd theta = X * beta;
  const Eigen::VectorXd mu = mean_vector(family, theta);
  const double n = static_cast<double>(X.rows());
  return -(X.transpose() * (y - mu)) / n;
}

double kl_divergence(Family family, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
  if (X.cols() != beta_hat.size() || X.cols() != beta0.size())
    throw DimensionError("coefficient length does not match design columns");
  if (!beta_hat.allFinite() || !beta0.allFinite())
    throw std::invalid_argument("kl_divergence requires finite coefficients");
  const Eigen::VectorXd theta_hat = X * beta_hat;
  const Eigen::VectorXd theta0 = X * beta0;
  const Eigen::VectorXd ey = mean_vector(family, theta0);
  double sum_b_diff = 0.0;
  for (Eigen::Index i = 0; i < theta_hat.size(); ++i)
    sum_b_diff += b_value(family, theta_hat[i]) - b_value(family, theta0[i]);
  const double d = -ey.dot(theta_hat - theta0) + sum_b_diff;
  // convexity of b makes d >= 0; clip roundoff noise
  return d < 0.0 && d > -1e-10 ? 0.0 : d;
}

Eigen::VectorXd mean_vector(Family family, const Eigen::VectorXd& theta) {
  Eigen::VectorXd mu(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) mu[i] = b_prime(family, theta[i]);
  return mu;
}

Eigen::VectorXd variance_vector(Family family, const Eigen::VectorXd& theta) {
  Eigen::VectorXd w(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    w[i] = b_double_prime(family, theta[i]);
  return w;
}

}  // namespace threshreg
