#include "threshreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "threshreg/diagnostics.hpp"
#include "threshreg/errors.hpp"

namespace threshreg {

namespace {

constexpr double kWeightFloor = 1e-10;

// Reject coordinate updates that push linear predictors past the point where
// the likelihood is flat at double precision (bernoulli margins ~ e^-30) or
// exp() becomes dangerous (poisson).
double predictor_cap(Family family) {
  switch (family) {
    case Family::bernoulli: return 30.0;
    case Family::poisson: return 300.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

int count_nonzeros(const Eigen::VectorXd& beta) {
  int nnz = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) ++nnz;
  return nnz;
}

void enforce_support_cap(Eigen::VectorXd& beta, int spark_cap) {
  int nnz = count_nonzeros(beta);
  while (nnz >= 0.5 * spark_cap) {
    Eigen::Index smallest = -1;
    double mag = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      if (beta[j] != 0.0 && std::abs(beta[j]) < mag) {
        mag = std::abs(beta[j]);
        smallest = j;
      }
    beta[smallest] = 0.0;
    --nnz;
  }
}

// Zero small entries and, if still over the cap, the smallest-magnitude ones,
// so any warm start becomes feasible for the current (tau, cap).
void sanitize(Eigen::VectorXd& beta, double tau, int spark_cap) {
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0 && std::abs(beta[j]) < tau) beta[j] = 0.0;
  enforce_support_cap(beta, spark_cap);
}

// Round mid-range magnitudes produced by damping to the nearer of {0, +-tau};
// damped iterates can also merge two feasible supports, so re-apply the cap.
void project_to_thresholded(Eigen::VectorXd& beta, double tau, int spark_cap) {
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double m = std::abs(beta[j]);
    if (m == 0.0 || m >= tau) continue;
    beta[j] = m < 0.5 * tau ? 0.0 : (beta[j] < 0.0 ? -tau : tau);
  }
  enforce_support_cap(beta, spark_cap);
}

}  // namespace

WorkingModel quadratic_working_model(Family family, const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& beta) {
  const Eigen::VectorXd theta = X * beta;
  WorkingModel wm;
  wm.weights.resize(theta.size());
  wm.working_response.resize(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double w = b_double_prime(family, theta[i]);
    if (w < kWeightFloor) {
      w = kWeightFloor;
      wm.floored = true;
    }
    wm.weights[i] = w;
    wm.working_response[i] = theta[i] + (y[i] - b_prime(family, theta[i])) / w;
  }
  return wm;
}

FitResult fit_ica(const Dataset& data, const RegObjective& obj, const FitConfig& cfg) {
  validate_objective(obj);
  if (obj.penalty.kind == PenaltyKind::l0)
    throw std::invalid_argument("fit_ica does not accept the l0 penalty");
  if (!data.rescaled)
    throw std::invalid_argument("fit_ica requires a column-rescaled dataset");
  if (cfg.max_cycles < 1 || !(cfg.tol > 0.0))
    throw std::invalid_argument("invalid fit configuration");
  check_response(obj.family, data.y);

  const Eigen::MatrixXd& X = data.X;
  const Eigen::VectorXd& y = data.y;
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const double nd = static_cast<double>(n);
  const bool gaussian = obj.family == Family::gaussian;

  FitResult res;
  res.mode = cfg.mode;
  res.lambda = obj.lambda;
  res.tau = obj.tau;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != p)
      throw DimensionError("warm start length does not match design columns");
    beta = *cfg.warm_start;
    sanitize(beta, obj.tau, obj.spark_cap);
  }

  Eigen::VectorXd theta = X * beta;
  // gaussian: residual r = y - theta carries the whole state
  Eigen::VectorXd residual = gaussian ? (y - theta).eval() : Eigen::VectorXd();
  Eigen::VectorXd mu, w;
  bool model_dirty = true;

  Eigen::VectorXd col_sq_norm(p);
  for (int j = 0; j < p; ++j) col_sq_norm[j] = X.col(j).squaredNorm();

  int nnz = count_nonzeros(beta);
  double q_prev = gaussian ? 0.0 : objective(obj, X, y, beta);
  int stalled_cycles = 0;

  auto refresh_model = [&]() {
    mu = mean_vector(obj.family, theta);
    w = variance_vector(obj.family, theta);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w[i] < kWeightFloor) {
        w[i] = kWeightFloor;
        ++res.weight_floor_hits;
      }
    model_dirty = false;
  };

  for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
    const Eigen::VectorXd beta_start = beta;
    const Eigen::VectorXd theta_start = theta;

    for (int j = 0; j < p; ++j) {
      double z, wbar;
      if (gaussian) {
        wbar = col_sq_norm[j] / nd;
        z = beta[j] + X.col(j).dot(residual) / (nd * wbar);
      } else {
        if (model_dirty) refresh_model();
        wbar = 0.0;
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
          const double xij = X(i, j);
          wbar += w[i] * xij * xij;
          dot += xij * (y[i] - mu[i]);
        }
        wbar /= nd;
        if (wbar < kWeightFloor) {
          ++res.weight_floor_hits;
          continue;  // column carries no curvature, leave the coordinate
        }
        z = beta[j] + dot / (nd * wbar);
      }

      const double cand = scalar_threshold(obj.penalty, obj.lambda, obj.tau, z, wbar,
                                           cfg.mode);
      if (cand == beta[j]) continue;
      if (cand != 0.0 && beta[j] == 0.0 && nnz + 1 >= 0.5 * obj.spark_cap) {
        ++res.cap_rejections;
        continue;
      }
      if (!gaussian) {
        // clamp trial steps before the likelihood sees them
        double max_theta = 0.0;
        for (int i = 0; i < n; ++i)
          max_theta = std::max(max_theta,
                               std::abs(theta[i] + X(i, j) * (cand - beta[j])));
        if (max_theta > predictor_cap(obj.family)) {
          ++res.cap_rejections;
          continue;
        }
      }

      const double delta = cand - beta[j];
      if (cand != 0.0 && beta[j] == 0.0) ++nnz;
      if (cand == 0.0 && beta[j] != 0.0) --nnz;
      beta[j] = cand;
      theta += X.col(j) * delta;
      if (gaussian)
        residual -= X.col(j) * delta;
      else
        model_dirty = true;
    }

    res.cycles_used = cycle + 1;

    if (!gaussian) {
      // surrogate steps can overshoot; restore descent by damping the cycle
      double q_new = objective(obj, X, y, beta);
      if (q_new > q_prev) {
        bool accepted = false;
        Eigen::VectorXd direction = beta - beta_start;
        for (int h = 1; h <= cfg.damping_max_halvings; ++h) {
          Eigen::VectorXd trial = beta_start + direction * std::pow(0.5, h);
          project_to_thresholded(trial, obj.tau, obj.spark_cap);
          const double q_trial = objective(obj, X, y, trial);
          if (q_trial <= q_prev) {
            beta = std::move(trial);
            q_new = q_trial;
            accepted = true;
            break;
          }
        }
        if (!accepted) {
          beta = beta_start;
          q_new = q_prev;
        }
        theta = X * beta;
        nnz = count_nonzeros(beta);
        model_dirty = true;
      }
      // coordinates can keep trading places on a limit cycle while Q_n has
      // stopped moving; give up once the objective stalls
      if (q_prev - q_new <= 1e-13 * std::max(1.0, std::abs(q_new)))
        ++stalled_cycles;
      else
        stalled_cycles = 0;
      q_prev = q_new;
    }

    const double max_change = (beta - beta_start).cwiseAbs().maxCoeff();
    if (max_change < cfg.tol) {
      res.converged = true;
      break;
    }
    if (stalled_cycles >= 3) break;  // converged stays false
  }

  res.beta = beta;
  for (int j = 0; j < p; ++j)
    if (beta[j] != 0.0) res.support.push_back(j);
  res.objective = objective(obj, X, y, beta);
  res.eta_inf = eta_infinity(obj.family, X, y, beta);
  return res;
}

double lambda_max(const Dataset& data, const Penalty& pen) {
  // smallest lambda at which every coordinate update from beta = 0 returns 0.
  // For l1 this is ||score(0)||_inf; for penalties with a bounded value
  // (scad/mcp/sica/hard in their saturation range) the entry condition is a
  // value comparison, so solve it by bisection on the scalar rule.
  const int n = static_cast<int>(data.n());
  const Eigen::VectorXd s0 =
      score(data.family, data.X, data.y, Eigen::VectorXd::Zero(data.p()));
  const Eigen::VectorXd w0 =
      variance_vector(data.family, Eigen::VectorXd::Zero(n));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double wbar = w0.dot(data.X.col(j).cwiseAbs2()) / n;
    if (wbar <= 0.0) continue;
    const double z = -s0[j] / wbar;
    if (z == 0.0) continue;
    double hi = std::max(std::abs(s0[j]) / prime_at_zero_factor(pen), 1e-12);
    while (scalar_threshold(pen, hi, 0.0, z, wbar, ThresholdMode::drop) != 0.0)
      hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (scalar_threshold(pen, mid, 0.0, z, wbar, ThresholdMode::drop) == 0.0)
        hi = mid;
      else
        lo = mid;
    }
    worst = std::max(worst, hi);
  }
  return worst;
}

std::vector<double> default_lambda_grid(const Dataset& data, const Penalty& pen,
                                        int num, double min_ratio) {
  if (num < 1 || !(min_ratio > 0.0) || min_ratio > 1.0)
    throw std::invalid_argument("invalid lambda grid parameters");
  const double top = lambda_max(data, pen) * 1.001;
  std::vector<double> grid(num);
  if (num == 1) {
    grid[0] = top;
    return grid;
  }
  for (int i = 0; i < num; ++i)
    grid[i] = top * std::pow(min_ratio, static_cast<double>(i) / (num - 1));
  return grid;
}

std::vector<FitResult> fit_path(const Dataset& data, const Penalty& pen,
                                const std::vector<double>& lambda_grid,
                                const std::function<double(double)>& tau_rule,
                                int spark_cap, const FitConfig& cfg) {
  for (size_t i = 0; i + 1 < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > lambda_grid[i + 1]) || !(lambda_grid[i + 1] > 0.0))
      throw std::invalid_argument("lambda grid must be strictly decreasing and positive");
  if (!lambda_grid.empty() && !(lambda_grid.back() > 0.0))
    throw std::invalid_argument("lambda grid must be positive");

  std::vector<FitResult> path;
  path.reserve(lambda_grid.size());
  FitConfig step_cfg = cfg;
  for (double lambda : lambda_grid) {
    RegObjective obj{data.family, pen, lambda, tau_rule(lambda), spark_cap};
    FitResult fit;
    try {
      fit = fit_ica(data, obj, step_cfg);
    } catch (const DomainOverflowError&) {
      fit.beta = step_cfg.warm_start ? *step_cfg.warm_start
                                     : Eigen::VectorXd::Zero(data.p());
      fit.converged = false;
      fit.lambda = lambda;
      fit.tau = obj.tau;
      for (Eigen::Index j = 0; j < fit.beta.size(); ++j)
        if (fit.beta[j] != 0.0) fit.support.push_back(static_cast<int>(j));
      path.push_back(fit);
      continue;  // keep the previous warm start for the next grid point
    }
    step_cfg.warm_start = fit.beta;
    path.push_back(std::move(fit));
  }
  return path;
}

}  // namespace threshreg
