#include "threshreg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "threshreg/diagnostics.hpp"
#include "threshreg/errors.hpp"
#include "threshreg/rng.hpp"

namespace threshreg {

namespace {

constexpr double kDivergenceLimit = 1e4;
constexpr double kPoissonPredictorCap = 300.0;

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
  return sub;
}

double penalty_sum(const Penalty& pen, double lambda, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j)
    if (b[j] != 0.0) s += penalty_value(pen, lambda, std::abs(b[j]));
  return s;
}

// penalty gradient component; l0 is flat away from zero
double penalty_grad(const Penalty& pen, double lambda, double bj) {
  if (pen.kind == PenaltyKind::l0 || bj == 0.0) return 0.0;
  return penalty_derivative(pen, lambda, std::abs(bj)) * (bj > 0.0 ? 1.0 : -1.0);
}

bool theta_in_domain(Family family, const Eigen::VectorXd& theta) {
  return family != Family::poisson ||
         theta.cwiseAbs().maxCoeff() <= kPoissonPredictorCap;
}

// keeps every coordinate at magnitude >= tau (nearer of -tau/+tau; exact
// zeros go to +tau)
void project_support(Eigen::VectorXd& b, double tau) {
  if (tau <= 0.0) return;
  for (Eigen::Index j = 0; j < b.size(); ++j)
    if (std::abs(b[j]) < tau) b[j] = b[j] < 0.0 ? -tau : tau;
}

struct NewtonOutcome {
  Eigen::VectorXd b;
  double value = std::numeric_limits<double>::infinity();
  bool ok = false;
  bool unbounded = false;
  // final Newton step was negligible; false when the line search stalled
  // with a unit-size step left (an unbounded direction for smooth problems)
  bool stationary = true;
};

// Damped Newton on L(b) + sum p(|b_j|) over the set {|b_j| >= tau}^k, using
// the likelihood Hessian as the metric (the penalty part can be concave).
NewtonOutcome penalized_newton(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& y,
                               Family family, const Penalty& pen, double lambda,
                               double tau, Eigen::VectorXd b) {
  const double n = static_cast<double>(Xs.rows());
  const int k = static_cast<int>(Xs.cols());
  NewtonOutcome out;

  project_support(b, tau);
  Eigen::VectorXd theta = Xs * b;
  if (!theta_in_domain(family, theta)) return out;

  auto value_at = [&](const Eigen::VectorXd& bb, const Eigen::VectorXd& th) {
    double sum_b = 0.0;
    for (Eigen::Index i = 0; i < th.size(); ++i) sum_b += b_value(family, th[i]);
    return -(y.dot(th) - sum_b) / n + penalty_sum(pen, lambda, bb);
  };

  double val = value_at(b, theta);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd mu = mean_vector(family, theta);
    const Eigen::VectorXd w = variance_vector(family, theta);
    Eigen::VectorXd grad = -(Xs.transpose() * (y - mu)) / n;
    for (int j = 0; j < k; ++j) grad[j] += penalty_grad(pen, lambda, b[j]);
    Eigen::MatrixXd hess = Xs.transpose() * w.asDiagonal() * Xs / n;
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);
    if (!step.allFinite()) break;

    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXd trial = b + step * std::pow(0.5, h);
      project_support(trial, tau);
      const Eigen::VectorXd trial_theta = Xs * trial;
      if (!theta_in_domain(family, trial_theta)) continue;
      const double trial_val = value_at(trial, trial_theta);
      if (trial_val < val - 1e-14) {
        const double move = (trial - b).cwiseAbs().maxCoeff();
        b = trial;
        theta = trial_theta;
        val = trial_val;
        accepted = true;
        if (move < 1e-11) iter = 200;  // converged
        break;
      }
    }
    if (!accepted) break;
    if (b.cwiseAbs().maxCoeff() > kDivergenceLimit) {
      out.unbounded = true;
      return out;
    }
  }

  // per-coordinate polish on the constrained set; accept only on decrease
  for (int cycle = 0; cycle < 50; ++cycle) {
    bool moved = false;
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd mu = mean_vector(family, theta);
      const Eigen::VectorXd w = variance_vector(family, theta);
      double wbar = 0.0, dot = 0.0;
      for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
        wbar += w[i] * Xs(i, j) * Xs(i, j);
        dot += Xs(i, j) * (y[i] - mu[i]);
      }
      wbar /= n;
      if (wbar < 1e-12) continue;
      const double z = b[j] + dot / (n * wbar);
      const double cand =
          detail::scalar_threshold_constrained(pen, lambda, tau, z, wbar, false);
      if (cand == b[j]) continue;
      Eigen::VectorXd trial = b;
      trial[j] = cand;
      const Eigen::VectorXd trial_theta = theta + Xs.col(j) * (cand - b[j]);
      if (!theta_in_domain(family, trial_theta)) continue;
      const double trial_val = value_at(trial, trial_theta);
      if (trial_val < val - 1e-14) {
        b = std::move(trial);
        theta = trial_theta;
        val = trial_val;
        moved = true;
      }
    }
    if (!moved) break;
  }

  {
    const Eigen::VectorXd mu = mean_vector(family, theta);
    const Eigen::VectorXd w = variance_vector(family, theta);
    Eigen::VectorXd grad = -(Xs.transpose() * (y - mu)) / n;
    for (int j = 0; j < k; ++j) grad[j] += penalty_grad(pen, lambda, b[j]);
    Eigen::MatrixXd hess = Xs.transpose() * w.asDiagonal() * Xs / n;
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd residual_step = hess.ldlt().solve(-grad);
    out.stationary = residual_step.allFinite() &&
                     residual_step.cwiseAbs().maxCoeff() < 1e-4;
  }
  out.b = b;
  out.value = val;
  out.ok = true;
  return out;
}

// unpenalized MLE on a support; nullopt when Newton fails
std::optional<Eigen::VectorXd> restricted_mle(const Eigen::MatrixXd& Xs,
                                              const Eigen::VectorXd& y, Family family,
                                              bool* unbounded = nullptr) {
  const NewtonOutcome out =
      penalized_newton(Xs, y, family, Penalty::l1(), 0.0, 0.0,
                       Eigen::VectorXd::Zero(Xs.cols()));
  // smooth unpenalized likelihood: stopping short of stationarity means the
  // iterates were escaping along an unbounded direction
  const bool diverged = out.unbounded || (out.ok && !out.stationary);
  if (unbounded) *unbounded = diverged;
  if (!out.ok || diverged) return std::nullopt;
  return out.b;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::pair<Eigen::VectorXd, double> support_constrained_fit(
    const Dataset& data, const RegObjective& obj, const std::vector<int>& support) {
  validate_objective(obj);
  const int p = static_cast<int>(data.p());
  for (int j : support)
    if (j < 0 || j >= p) throw std::invalid_argument("support index out of range");
  if (static_cast<double>(support.size()) >= 0.5 * obj.spark_cap)
    throw GuardError("support size must be below spark_cap/2");

  Eigen::VectorXd full = Eigen::VectorXd::Zero(p);
  if (support.empty())
    return {full, objective(obj, data.X, data.y, full)};

  const Eigen::MatrixXd Xs = submatrix(data.X, support);
  const int k = static_cast<int>(support.size());

  std::vector<Eigen::VectorXd> starts;
  bool mle_unbounded = false;
  const auto mle = restricted_mle(Xs, data.y, data.family, &mle_unbounded);
  if (mle) starts.push_back(*mle);
  starts.push_back(Eigen::VectorXd::Constant(k, std::max(obj.tau, 0.0)));

  const double spread =
      2.0 * std::max(mle ? mle->cwiseAbs().maxCoeff() : 1.0, obj.tau > 0 ? obj.tau : 1.0);
  Rng rng(mix_seed(0x5eedULL,
                   std::accumulate(support.begin(), support.end(), 0x9e37ULL,
                                   [](std::uint64_t h, int j) { return mix_seed(h, j); })));
  for (int t = 0; t < 8; ++t) {
    Eigen::VectorXd s(k);
    for (int j = 0; j < k; ++j) s[j] = spread * rng.normal();
    starts.push_back(std::move(s));
  }

  NewtonOutcome best;
  double worst_ok = -std::numeric_limits<double>::infinity();
  int failures = 0, unbounded_count = mle_unbounded ? 1 : 0;
  for (auto& start : starts) {
    NewtonOutcome out = penalized_newton(Xs, data.y, data.family, obj.penalty,
                                         obj.lambda, obj.tau, start);
    if (!out.ok) {
      ++failures;
      if (out.unbounded) ++unbounded_count;
      continue;
    }
    worst_ok = std::max(worst_ok, out.value);
    if (out.value < best.value) best = std::move(out);
  }

  if (!best.ok) {
    if (data.family == Family::bernoulli && unbounded_count > 0)
      throw SeparationError("logistic likelihood unbounded on the support");
    return {full, std::numeric_limits<double>::infinity()};
  }

  for (int j = 0; j < k; ++j) full[support[j]] = best.b[j];
  return {full, objective(obj, data.X, data.y, full)};
}

BruteForceReport brute_force_global(const Dataset& data, const RegObjective& obj,
                                    bool keep_per_support) {
  validate_objective(obj);
  const int p = static_cast<int>(data.p());
  if (p > 14) throw GuardError("brute_force_global limited to p <= 14");
  if (obj.spark_cap > 10) throw GuardError("brute_force_global limited to spark_cap/2 <= 5");

  const int max_k = (obj.spark_cap - 1) / 2;  // largest size strictly below cap/2
  BruteForceReport report;
  if (keep_per_support) report.per_support_minima.emplace();

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  Eigen::VectorXd best_beta = Eigen::VectorXd::Zero(p);

  std::vector<int> idx;
  auto visit = [&](const std::vector<int>& support) {
    ++report.supports_examined;
    auto [beta, value] = support_constrained_fit(data, obj, support);
    if (keep_per_support) report.per_support_minima->push_back({support, value});
    if (value < best_obj - 1e-12 ||
        (std::abs(value - best_obj) <= 1e-12 && lex_less(support, best_support))) {
      best_obj = value;
      best_support = support;
      best_beta = beta;
    }
  };

  visit({});
  for (int k = 1; k <= std::min(max_k, p); ++k) {
    idx.assign(k, 0);
    std::iota(idx.begin(), idx.end(), 0);
    bool more = true;
    while (more) {
      visit(idx);
      more = [&] {
        for (int i = k - 1; i >= 0; --i)
          if (idx[i] < p - k + i) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
          }
        return false;
      }();
    }
  }

  report.best.beta = best_beta;
  for (int j = 0; j < p; ++j)
    if (best_beta[j] != 0.0) report.best.support.push_back(j);
  report.best.objective = best_obj;
  report.best.converged = std::isfinite(best_obj);
  report.best.mode = ThresholdMode::exact;
  report.best.lambda = obj.lambda;
  report.best.tau = obj.tau;
  if (report.best.converged)
    report.best.eta_inf = eta_infinity(data.family, data.X, data.y, best_beta);
  return report;
}

Eigen::VectorXd oracle_mle(const Dataset& data, Family family,
                           const std::vector<int>& true_support) {
  const int p = static_cast<int>(data.p());
  for (int j : true_support)
    if (j < 0 || j >= p) throw std::invalid_argument("support index out of range");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(p);
  if (true_support.empty()) return full;

  const Eigen::MatrixXd Xs = submatrix(data.X, true_support);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  if (qr.rank() < static_cast<Eigen::Index>(true_support.size()))
    throw RankError("design restricted to the support is rank deficient");

  bool unbounded = false;
  const auto mle = restricted_mle(Xs, data.y, family, &unbounded);
  if (!mle) {
    if (family == Family::bernoulli && unbounded)
      throw SeparationError("perfect separation: logistic MLE diverges");
    throw std::runtime_error("Newton failed to converge for the oracle MLE");
  }
  if (family == Family::bernoulli && mle->cwiseAbs().maxCoeff() > kDivergenceLimit)
    throw SeparationError("perfect separation: logistic MLE diverges");

  for (size_t j = 0; j < true_support.size(); ++j)
    full[true_support[j]] = (*mle)[static_cast<Eigen::Index>(j)];
  return full;
}

}  // namespace threshreg
