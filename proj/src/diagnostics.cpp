#include "threshreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "threshreg/errors.hpp"

namespace threshreg {

namespace {

// next k-subset of {0..p-1} in lexicographic order; false when exhausted
bool next_subset(std::vector<int>& idx, int p) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < p - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  const int k = static_cast<int>(cols.size());
  Eigen::MatrixXd sub(X.rows(), k);
  for (int j = 0; j < k; ++j) sub.col(j) = X.col(cols[j]);
  return sub.transpose() * sub / static_cast<double>(X.rows());
}

}  // namespace

double submatrix_min_singular_value(const Eigen::MatrixXd& X,
                                    const std::vector<int>& cols) {
  if (cols.empty()) throw std::invalid_argument("empty column subset");
  if (static_cast<Eigen::Index>(cols.size()) > X.rows()) return 0.0;  // rank deficient
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_of(X, cols));
  return std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
}

SparkEstimate robust_spark_exact(const Eigen::MatrixXd& X, double c) {
  const int p = static_cast<int>(X.cols());
  const int n = static_cast<int>(X.rows());
  if (p > 20) throw GuardError("robust_spark_exact limited to p <= 20");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  SparkEstimate est;
  est.c = c;
  est.kind = SparkEstimate::Kind::exact;
  const int max_size = std::min(p, n + 1);
  for (int k = 1; k <= max_size; ++k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    do {
      if (submatrix_min_singular_value(X, idx) < c) {
        est.value = k;
        est.witness = idx;
        return est;
      }
    } while (next_subset(idx, p));
  }
  est.value = p + 1;  // sentinel: no violating submatrix exists
  return est;
}

SparkEstimate robust_spark_lower_bound(const Eigen::MatrixXd& X, double c,
                                       int max_size) {
  const int p = static_cast<int>(X.cols());
  if (p > 20) throw GuardError("robust_spark_lower_bound limited to p <= 20");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  SparkEstimate est;
  est.c = c;
  for (int k = 1; k <= std::min(max_size, p); ++k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    do {
      if (submatrix_min_singular_value(X, idx) < c) {
        est.kind = SparkEstimate::Kind::upper_bound;
        est.value = k;
        est.witness = idx;
        return est;
      }
    } while (next_subset(idx, p));
  }
  est.kind = SparkEstimate::Kind::lower_bound_verified;
  est.value = max_size + 1;
  return est;
}

SparkEstimate robust_spark_search(const Eigen::MatrixXd& X, double c, int budget,
                                  Rng& rng) {
  const int p = static_cast<int>(X.cols());
  const int n = static_cast<int>(X.rows());
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");

  SparkEstimate best;
  best.c = c;
  best.kind = SparkEstimate::Kind::upper_bound;
  best.value = n + 1;  // kappa_c <= n+1 always
  if (p >= n + 1) {
    // any n+1 columns are rank deficient, so n+1 is witnessed, not heuristic
    best.witness.resize(n + 1);
    std::iota(best.witness.begin(), best.witness.end(), 0);
  }

  int evals = 0;
  auto check = [&](const std::vector<int>& cols) -> bool {
    if (static_cast<int>(cols.size()) >= best.value) return false;
    ++evals;
    if (submatrix_min_singular_value(X, cols) < c) {
      best.value = static_cast<int>(cols.size());
      best.witness = cols;
      return true;
    }
    return false;
  };

  // most correlated pairs first: duplicates/near-duplicates show up here
  {
    std::vector<std::pair<double, std::pair<int, int>>> pairs;
    const Eigen::MatrixXd gram = X.transpose() * X;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) {
        const double denom = std::sqrt(gram(i, i) * gram(j, j));
        if (denom > 0.0)
          pairs.push_back({std::abs(gram(i, j)) / denom, {i, j}});
      }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    const int scan = std::min<int>(static_cast<int>(pairs.size()), std::min(budget / 2, 3 * p));
    for (int t = 0; t < scan && evals < budget; ++t) {
      std::vector<int> cols = {pairs[t].second.first, pairs[t].second.second};
      if (check(cols) && best.value == 2) return best;  // cannot do better than 2
    }
  }

  // greedy elimination from a full-rank-deficient start: drop the column
  // whose removal keeps the smallest singular value minimal
  while (evals < budget) {
    std::vector<int> cols(p);
    std::iota(cols.begin(), cols.end(), 0);
    if (p > n + 1) {
      for (int j = p - 1; j > 0; --j) std::swap(cols[j], cols[rng.below(j + 1)]);
      cols.resize(n + 1);
      std::sort(cols.begin(), cols.end());
    }
    bool improved_any = false;
    while (static_cast<int>(cols.size()) > 2 && evals < budget) {
      double best_sigma = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (size_t d = 0; d < cols.size() && evals < budget; ++d) {
        std::vector<int> trial = cols;
        trial.erase(trial.begin() + static_cast<long>(d));
        ++evals;
        const double sigma = submatrix_min_singular_value(X, trial);
        if (sigma < best_sigma) {
          best_sigma = sigma;
          drop = static_cast<int>(d);
        }
      }
      if (drop < 0) break;
      cols.erase(cols.begin() + drop);
      if (best_sigma < c && static_cast<int>(cols.size()) < best.value) {
        best.value = static_cast<int>(cols.size());
        best.witness = cols;
        improved_any = true;
      }
      if (best_sigma >= c) break;  // violation lost; smaller sets unlikely
    }
    if (!improved_any) break;  // restart would repeat the same path when p <= n+1
    if (p <= n + 1) break;
  }

  // random subsets of increasing size
  for (int k = 2; k <= std::min(n + 1, p) && evals < budget; ++k) {
    if (k >= best.value) break;
    const int tries = std::max(1, (budget - evals) / std::max(1, std::min(n + 1, p) - k + 1));
    for (int t = 0; t < tries && evals < budget; ++t) {
      std::set<int> pick;
      while (static_cast<int>(pick.size()) < k)
        pick.insert(static_cast<int>(rng.below(p)));
      std::vector<int> cols(pick.begin(), pick.end());
      check(cols);
    }
  }
  return best;
}

double gamma_star_gaussian(const Eigen::MatrixXd& X, const std::vector<int>& support) {
  if (support.empty()) throw std::invalid_argument("empty support");
  const Eigen::MatrixXd gram = gram_of(X, support);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) throw RankError("singular support Gram matrix");
  const Eigen::MatrixXd inv = lu.inverse();
  return inv.cwiseAbs().rowwise().sum().maxCoeff();
}

double gamma_n_gaussian(const Eigen::MatrixXd& X, const std::vector<int>& support,
                        int s, GammaMode mode) {
  const int p = static_cast<int>(X.cols());
  if (s < 1) throw std::invalid_argument("s must be >= 1");
  std::vector<char> in_support(p, 0);
  for (int j : support) in_support[j] = 1;
  std::vector<int> noise;
  for (int j = 0; j < p; ++j)
    if (!in_support[j]) noise.push_back(j);
  if (noise.empty()) return 0.0;

  const double n = static_cast<double>(X.rows());
  // cross(i, k) = |n^{-1} x_{support[i]}' x_{noise[k]}|
  Eigen::MatrixXd cross(support.size(), noise.size());
  for (size_t i = 0; i < support.size(); ++i)
    for (size_t k = 0; k < noise.size(); ++k)
      cross(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::abs(X.col(support[i]).dot(X.col(noise[k]))) / n;

  if (mode == GammaMode::greedy) {
    double best = 0.0;
    std::vector<double> row(noise.size());
    for (size_t i = 0; i < support.size(); ++i) {
      for (size_t k = 0; k < noise.size(); ++k) row[k] = cross(i, k);
      const size_t take = std::min<size_t>(s, row.size());
      std::partial_sort(row.begin(), row.begin() + static_cast<long>(take), row.end(),
                        std::greater<double>());
      best = std::max(best, std::accumulate(row.begin(), row.begin() + static_cast<long>(take), 0.0));
    }
    return best;
  }

  if (static_cast<int>(noise.size()) > 20 || s > 4)
    throw GuardError("gamma_n exact mode limited to p - s <= 20 and s <= 4");
  double best = 0.0;
  for (int k = 1; k <= std::min<int>(s, static_cast<int>(noise.size())); ++k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    do {
      for (size_t i = 0; i < support.size(); ++i) {
        double sum = 0.0;
        for (int t : idx) sum += cross(static_cast<Eigen::Index>(i), t);
        best = std::max(best, sum);
      }
    } while (next_subset(idx, static_cast<int>(noise.size())));
  }
  return best;
}

double eta_infinity(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta_hat) {
  return score(family, X, y, beta_hat).cwiseAbs().maxCoeff();
}

bool tau_threshold_check(double eta, double lambda, double tau, double beta0_min,
                         int s) {
  const double noise = eta + lambda;
  return noise < tau / 3.0 && beta0_min > 3.0 * std::sqrt(static_cast<double>(s)) * noise;
}

}  // namespace threshreg
