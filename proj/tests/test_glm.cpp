#include <doctest.h>

#include <cmath>

#include "threshreg/glm.hpp"
#include "threshreg/rng.hpp"

using namespace threshreg;

namespace {

// central finite difference oracle
double fd(double (*f)(Family, double), Family fam, double t, double h) {
  return (f(fam, t + h) - f(fam, t - h)) / (2.0 * h);
}

Eigen::MatrixXd random_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

}  // namespace

TEST_CASE("b_value closed forms") {
  CHECK(b_value(Family::gaussian, 0.0) == 0.0);
  CHECK(b_value(Family::bernoulli, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(b_value(Family::poisson, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  // overflow-safe bernoulli branches
  CHECK(b_value(Family::bernoulli, 800.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(b_value(Family::bernoulli, -800.0)));
  CHECK_THROWS_AS(b_value(Family::poisson, 701.0), DomainOverflowError);
}

TEST_CASE("b_prime closed forms") {
  CHECK(b_prime(Family::gaussian, 2.5) == 2.5);
  CHECK(b_prime(Family::bernoulli, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(b_prime(Family::poisson, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double t : {-30.0, -1.0, 0.3, 30.0}) {
    const double mu = b_prime(Family::bernoulli, t);
    CHECK(mu > 0.0);
    CHECK(mu < 1.0);
  }
}

TEST_CASE("b_double_prime closed forms") {
  CHECK(b_double_prime(Family::gaussian, -17.3) == 1.0);
  CHECK(b_double_prime(Family::bernoulli, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(b_double_prime(Family::poisson, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("derivatives match finite differences on a theta grid") {
  for (Family fam : {Family::gaussian, Family::bernoulli, Family::poisson}) {
    for (double t = -5.0; t <= 5.0; t += 0.25) {
      CHECK(b_prime(fam, t) == doctest::Approx(fd(b_value, fam, t, 1e-5)).epsilon(1e-6));
      CHECK(b_double_prime(fam, t) ==
            doctest::Approx(fd(b_prime, fam, t, 1e-4)).epsilon(1e-5));
      CHECK(b_double_prime(fam, t) > 0.0);
    }
    if (fam == Family::gaussian)
      for (double t = -5.0; t <= 5.0; t += 0.25) CHECK(b_double_prime(fam, t) == 1.0);
  }
}

TEST_CASE("neg_log_likelihood values") {
  Rng rng(11);
  const Eigen::MatrixXd X = random_matrix(4, 3, rng);
  CHECK(neg_log_likelihood(Family::gaussian, X, Eigen::VectorXd::Zero(4),
                           Eigen::VectorXd::Zero(3)) == 0.0);

  Eigen::MatrixXd X1(1, 1);
  X1 << 1.0;
  Eigen::VectorXd y1(1), b1(1);
  y1 << 1.0;
  b1 << 0.0;
  CHECK(neg_log_likelihood(Family::bernoulli, X1, y1, b1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // gaussian identity: L(beta) = ||y - X beta||^2/(2n) - ||y||^2/(2n)
  Eigen::VectorXd y(4), beta(3);
  for (int i = 0; i < 4; ++i) y[i] = rng.normal();
  for (int j = 0; j < 3; ++j) beta[j] = rng.normal();
  const double direct = neg_log_likelihood(Family::gaussian, X, y, beta);
  const double oracle =
      (y - X * beta).squaredNorm() / 8.0 - y.squaredNorm() / 8.0;
  CHECK(direct == doctest::Approx(oracle).epsilon(1e-10));

  CHECK_THROWS_AS(
      neg_log_likelihood(Family::gaussian, X, Eigen::VectorXd::Zero(3),
                         Eigen::VectorXd::Zero(3)),
      DimensionError);
  Eigen::VectorXd bad(4);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(neg_log_likelihood(Family::bernoulli, X, bad, Eigen::VectorXd::Zero(3)),
                  ResponseSupportError);
  Eigen::VectorXd frac(4);
  frac << 0, 1, 2.5, 0;
  CHECK_THROWS_AS(neg_log_likelihood(Family::poisson, X, frac, Eigen::VectorXd::Zero(3)),
                  ResponseSupportError);
}

TEST_CASE("score on a hand instance") {
  // gaussian with beta = 0 and y = X beta0: score = -X'X beta0 / n
  Eigen::MatrixXd X(2, 2);
  X << 1.0, 2.0, 3.0, -1.0;
  Eigen::VectorXd beta0(2);
  beta0 << 0.5, -1.0;
  const Eigen::VectorXd y = X * beta0;
  const Eigen::VectorXd s = score(Family::gaussian, X, y, Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd oracle = -(X.transpose() * X * beta0) / 2.0;
  CHECK((s - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("score matches finite differences on random instances") {
  Rng rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const Family fam = rep % 3 == 0   ? Family::gaussian
                       : rep % 3 == 1 ? Family::bernoulli
                                      : Family::poisson;
    const int n = 5 + static_cast<int>(rng.below(16));
    const int p = 1 + static_cast<int>(rng.below(5));
    const Eigen::MatrixXd X = random_matrix(n, p, rng);
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = 0.3 * rng.normal();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double theta = X.row(i).dot(beta);
      if (fam == Family::gaussian)
        y[i] = theta + rng.normal();
      else if (fam == Family::bernoulli)
        y[i] = rng.bernoulli(b_prime(fam, theta));
      else
        y[i] = static_cast<double>(rng.poisson(std::exp(theta)));
    }
    const Eigen::VectorXd g = score(fam, X, y, beta);
    const double h = 1e-6;
    for (int j = 0; j < p; ++j) {
      Eigen::VectorXd up = beta, dn = beta;
      up[j] += h;
      dn[j] -= h;
      const double fdg = (neg_log_likelihood(fam, X, y, up) -
                          neg_log_likelihood(fam, X, y, dn)) /
                         (2.0 * h);
      const double scale = std::max(1.0, std::abs(fdg));
      CHECK(std::abs(g[j] - fdg) / scale < 1e-5);
    }
  }
}

TEST_CASE("score vanishes at the unpenalized gaussian MLE on a support") {
  Rng rng(3);
  const Eigen::MatrixXd X = random_matrix(20, 3, rng);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = rng.normal();
  const Eigen::VectorXd mle = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd s = score(Family::gaussian, X, y, mle);
  CHECK(s.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("kl divergence properties") {
  Rng rng(5);
  const Eigen::MatrixXd X = random_matrix(3, 2, rng);
  Eigen::VectorXd beta0(2);
  beta0 << 0.7, -0.2;

  CHECK(kl_divergence(Family::gaussian, X, beta0, beta0) == 0.0);

  // gaussian: D = 0.5 ||X (bh - b0)||^2
  Eigen::VectorXd bh(2);
  bh << 0.1, 0.4;
  const double d = kl_divergence(Family::gaussian, X, bh, beta0);
  CHECK(d == doctest::Approx(0.5 * (X * (bh - beta0)).squaredNorm()).epsilon(1e-10));

  for (int rep = 0; rep < 100; ++rep) {
    const Family fam = rep % 3 == 0   ? Family::gaussian
                       : rep % 3 == 1 ? Family::bernoulli
                                      : Family::poisson;
    const int n = 6 + static_cast<int>(rng.below(10));
    const int p = 1 + static_cast<int>(rng.below(3));
    const Eigen::MatrixXd Z = random_matrix(n, p, rng);  // n > p: full column rank a.s.
    Eigen::VectorXd a(p), b(p);
    for (int j = 0; j < p; ++j) {
      a[j] = 0.4 * rng.normal();
      b[j] = 0.4 * rng.normal();
    }
    const double div = kl_divergence(fam, Z, a, b);
    CHECK(div >= 0.0);
    if ((Z * (a - b)).cwiseAbs().maxCoeff() > 1e-8) CHECK(div > 0.0);
    CHECK(kl_divergence(fam, Z, b, b) == 0.0);
  }
}
