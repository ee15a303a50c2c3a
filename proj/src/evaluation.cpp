#include "threshreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "threshreg/errors.hpp"

namespace threshreg {

double tau_schedule(double c6, int n, int p) {
  if (n < 2 || p < 2 || !(c6 > 0.0))
    throw std::invalid_argument("tau_schedule requires n, p >= 2 and c6 > 0");
  const double nd = static_cast<double>(n);
  return c6 * std::sqrt(std::log(nd)) * std::sqrt(std::log(static_cast<double>(p)) / nd);
}

double lambda_schedule(double c0, int n, int p) {
  if (!(c0 > 0.0)) throw std::invalid_argument("lambda_schedule requires c0 > 0");
  const double nd = static_cast<double>(n);
  return c0 * std::sqrt(std::log(static_cast<double>(std::max(n, p))) / nd);
}

namespace {
int sgn(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw DimensionError("coefficient vectors have different lengths");
}
}  // namespace

int false_signs(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
  check_lengths(beta_hat, beta0);
  int fs = 0;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j)
    if (sgn(beta_hat[j]) != sgn(beta0[j])) ++fs;
  return fs;
}

std::pair<int, int> selection_errors(const Eigen::VectorXd& beta_hat,
                                     const Eigen::VectorXd& beta0) {
  check_lengths(beta_hat, beta0);
  int fp = 0, fn = 0;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    if (beta_hat[j] != 0.0 && beta0[j] == 0.0) ++fp;
    if (beta_hat[j] == 0.0 && beta0[j] != 0.0) ++fn;
  }
  return {fp, fn};
}

double lq_loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0,
               double q) {
  check_lengths(beta_hat, beta0);
  const Eigen::VectorXd d = beta_hat - beta0;
  if (std::isinf(q)) return d.cwiseAbs().maxCoeff();
  if (!(q >= 1.0 && q <= 2.0))
    throw std::invalid_argument("lq_loss requires q in [1, 2] or infinity");
  double s = 0.0;
  for (Eigen::Index j = 0; j < d.size(); ++j) s += std::pow(std::abs(d[j]), q);
  return std::pow(s, 1.0 / q);
}

double prediction_error(Family family, const Eigen::VectorXd& beta_hat,
                        const Eigen::MatrixXd& test_X, const Eigen::VectorXd& test_y) {
  if (test_X.rows() != test_y.size())
    throw DimensionError("test design and response sizes differ");
  const Eigen::VectorXd theta = test_X * beta_hat;
  double s = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double r = test_y[i] - b_prime(family, theta[i]);
    s += r * r;
  }
  return s / static_cast<double>(theta.size());
}

double sigma_hat(const Dataset& data, const Eigen::VectorXd& beta_hat) {
  if (data.family != Family::gaussian)
    throw std::invalid_argument("sigma_hat is defined for the gaussian family");
  int nnz = 0;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j)
    if (beta_hat[j] != 0.0) ++nnz;
  const double df = static_cast<double>(data.n()) - nnz;
  if (!(df > 0.0)) throw std::invalid_argument("no residual degrees of freedom");
  return std::sqrt((data.y - data.X * beta_hat).squaredNorm() / df);
}

double trimmed_mean(std::vector<double> values, double fraction) {
  if (!(fraction >= 0.0 && fraction < 0.5))
    throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
  const int drop = static_cast<int>(std::floor(fraction * values.size()));
  if (static_cast<int>(values.size()) - 2 * drop <= 0)
    throw std::invalid_argument("nothing left after trimming");
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin() + drop, values.end() - drop, 0.0) /
         (static_cast<double>(values.size()) - 2 * drop);
}

MetricsReport compute_metrics(const Eigen::VectorXd& beta_hat, const TruthSpec& truth,
                              const Dataset& train, const Dataset& test) {
  MetricsReport m;
  m.pe = prediction_error(train.family, beta_hat, test.X, test.y);
  m.l1 = lq_loss(beta_hat, truth.beta0, 1.0);
  m.l2 = lq_loss(beta_hat, truth.beta0, 2.0);
  m.linf = lq_loss(beta_hat, truth.beta0, std::numeric_limits<double>::infinity());
  std::tie(m.fp, m.fn) = selection_errors(beta_hat, truth.beta0);
  m.fs = false_signs(beta_hat, truth.beta0);
  m.sign_consistent = m.fs == 0;
  if (train.family == Family::gaussian) {
    int nnz = 0;
    for (Eigen::Index j = 0; j < beta_hat.size(); ++j)
      if (beta_hat[j] != 0.0) ++nnz;
    if (nnz < train.n()) m.sigma_hat = sigma_hat(train, beta_hat);
  }
  m.kl_per_n = kl_divergence(train.family, train.X, beta_hat, truth.beta0) /
               static_cast<double>(train.n());
  return m;
}

namespace {

struct GridPoint {
  double score = std::numeric_limits<double>::infinity();
  double lambda = 0.0;
  double c6 = 0.0;
  double tau = 0.0;
  FitResult fit;
  bool have_fit = false;
};

// tie rule: smaller score, then larger lambda, then larger c6
bool better(const GridPoint& a, const GridPoint& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.lambda != b.lambda) return a.lambda > b.lambda;
  return a.c6 > b.c6;
}

Dataset subset_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.family = ds.family;
  out.rescaled = ds.rescaled;
  out.column_scales = ds.column_scales;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.p());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = ds.y[rows[i]];
  }
  return out;
}

}  // namespace

TuneResult select_tuning(const Dataset& train, const std::optional<Dataset>& valid,
                         const Penalty& pen, const TuningGrid& grid, int spark_cap,
                         const FitConfig& cfg, Rng& rng) {
  if (grid.lambda_values.empty() || grid.c6_values.empty())
    throw std::invalid_argument("tuning grids must be nonempty");
  if (grid.method == TuningGrid::Method::validation_set && !valid)
    throw std::invalid_argument("validation_set tuning needs a validation dataset");
  if (grid.method == TuningGrid::Method::kfold && grid.k < 2)
    throw std::invalid_argument("kfold tuning needs k >= 2");

  const int n = static_cast<int>(train.n());
  const int p = static_cast<int>(train.p());

  // fold assignment: contiguous blocks after a seeded shuffle
  std::vector<std::vector<int>> folds;
  if (grid.method == TuningGrid::Method::kfold) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    folds.resize(grid.k);
    for (int i = 0; i < n; ++i)
      folds[static_cast<size_t>(i) * grid.k / n].push_back(order[i]);
  }

  GridPoint best;
  bool any_ok = false;

  for (double c6 : grid.c6_values) {
    const double tau = grid.use_threshold ? tau_schedule(c6, n, p) : 0.0;
    const auto tau_rule = [tau](double) { return tau; };

    if (grid.method == TuningGrid::Method::validation_set) {
      std::vector<FitResult> path;
      try {
        path = fit_path(train, pen, grid.lambda_values, tau_rule, spark_cap, cfg);
      } catch (const std::exception&) {
        continue;
      }
      for (size_t i = 0; i < path.size(); ++i) {
        GridPoint pt;
        pt.lambda = grid.lambda_values[i];
        pt.c6 = c6;
        pt.tau = tau;
        try {
          pt.score = prediction_error(train.family, path[i].beta, valid->X, valid->y);
        } catch (const std::exception&) {
          continue;
        }
        pt.fit = path[i];
        pt.have_fit = true;
        any_ok = true;
        if (better(pt, best)) best = std::move(pt);
      }
    } else {
      std::vector<double> fold_scores(grid.lambda_values.size(), 0.0);
      std::vector<int> fold_counts(grid.lambda_values.size(), 0);
      for (int f = 0; f < grid.k; ++f) {
        std::vector<int> train_rows;
        for (int g = 0; g < grid.k; ++g)
          if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        const Dataset sub_train = subset_rows(train, train_rows);
        const Dataset sub_valid = subset_rows(train, folds[f]);
        std::vector<FitResult> path;
        try {
          path = fit_path(sub_train, pen, grid.lambda_values, tau_rule, spark_cap, cfg);
        } catch (const std::exception&) {
          continue;
        }
        for (size_t i = 0; i < path.size(); ++i) {
          try {
            fold_scores[i] +=
                prediction_error(train.family, path[i].beta, sub_valid.X, sub_valid.y);
            ++fold_counts[i];
          } catch (const std::exception&) {
          }
        }
      }
      for (size_t i = 0; i < grid.lambda_values.size(); ++i) {
        if (fold_counts[i] != grid.k) continue;
        GridPoint pt;
        pt.lambda = grid.lambda_values[i];
        pt.c6 = c6;
        pt.tau = tau;
        pt.score = fold_scores[i] / grid.k;
        any_ok = true;
        if (better(pt, best)) best = std::move(pt);
      }
    }
  }

  if (!any_ok) throw std::runtime_error("all tuning grid fits failed");

  TuneResult result;
  result.lambda = best.lambda;
  result.c6 = best.c6;
  result.tau = best.tau;
  result.score = best.score;
  if (best.have_fit) {
    result.fit = best.fit;
  } else {
    // kfold winner: refit on the full data, warm started down the path
    std::vector<double> head;
    for (double l : grid.lambda_values) {
      head.push_back(l);
      if (l == best.lambda) break;
    }
    const double tau = best.tau;
    auto path = fit_path(train, pen, head, [tau](double) { return tau; }, spark_cap, cfg);
    result.fit = path.back();
  }
  return result;
}

}  // namespace threshreg
