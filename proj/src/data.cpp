#include "threshreg/data.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "threshreg/errors.hpp"

namespace threshreg {

TruthSpec TruthSpec::from_beta(const Eigen::VectorXd& beta0, double sigma) {
  TruthSpec t;
  t.beta0 = beta0;
  for (Eigen::Index j = 0; j < beta0.size(); ++j)
    if (beta0[j] != 0.0) t.support.push_back(static_cast<int>(j));
  t.s = static_cast<int>(t.support.size());
  t.sigma = sigma;
  return t;
}

std::string setting_name(Setting s) {
  switch (s) {
    case Setting::linear: return "linear";
    case Setting::logistic: return "logistic";
    case Setting::poisson_count: return "poisson";
  }
  return "unknown";
}

Setting parse_setting(const std::string& name) {
  if (name == "linear") return Setting::linear;
  if (name == "logistic") return Setting::logistic;
  if (name == "poisson") return Setting::poisson_count;
  throw std::invalid_argument("unknown setting: " + name);
}

Family setting_family(Setting s) {
  switch (s) {
    case Setting::linear: return Family::gaussian;
    case Setting::logistic: return Family::bernoulli;
    case Setting::poisson_count: return Family::poisson;
  }
  return Family::gaussian;
}

Eigen::MatrixXd generate_ar1_design(int n, int p, double r, Rng& rng) {
  if (!(r >= 0.0 && r < 1.0))
    throw std::invalid_argument("AR(1) correlation must lie in [0, 1)");
  if (n < 1 || p < 1) throw std::invalid_argument("need n >= 1 and p >= 1");
  Eigen::MatrixXd X(n, p);
  const double innovation = std::sqrt(1.0 - r * r);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    for (int j = 1; j < p; ++j) X(i, j) = r * X(i, j - 1) + innovation * rng.normal();
  }
  return X;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> rescale_columns(const Eigen::MatrixXd& X) {
  const double target = std::sqrt(static_cast<double>(X.rows()));
  Eigen::MatrixXd out = X;
  Eigen::VectorXd scales(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    if (norm == 0.0)
      throw std::invalid_argument("column " + std::to_string(j) +
                                  " is identically zero, cannot rescale");
    // already-at-target columns are kept unchanged so rescaling is idempotent
    if (std::abs(norm / target - 1.0) <= 1e-13) {
      scales[j] = 1.0;
    } else {
      scales[j] = target / norm;
      out.col(j) *= scales[j];
    }
  }
  return {std::move(out), std::move(scales)};
}

Eigen::VectorXd simulate_response(Family family, const Eigen::MatrixXd& X,
                                  const TruthSpec& truth, Rng& rng) {
  if (X.cols() != truth.beta0.size())
    throw DimensionError("truth coefficient length does not match design columns");
  const Eigen::VectorXd theta = X * truth.beta0;
  if (!theta.allFinite()) throw DomainOverflowError("non-finite linear predictor");
  Eigen::VectorXd y(X.rows());
  switch (family) {
    case Family::gaussian:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] = theta[i] + (truth.sigma > 0.0 ? rng.normal(0.0, truth.sigma) : 0.0);
      break;
    case Family::bernoulli:
      for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] = rng.bernoulli(b_prime(Family::bernoulli, theta[i]));
      break;
    case Family::poisson:
      if (theta.maxCoeff() > 30.0)
        throw DomainOverflowError("poisson mean exp(theta) too large: max theta = " +
                                  std::to_string(theta.maxCoeff()));
      for (Eigen::Index i = 0; i < y.size(); ++i)
        y[i] = static_cast<double>(rng.poisson(std::exp(theta[i])));
      break;
  }
  return y;
}

TruthSpec paper_truth(Setting setting, int p) {
  std::vector<double> prefix;
  double sigma = 0.0;
  switch (setting) {
    case Setting::linear:
      prefix = {1.0, -0.5, 0.7, -1.2, -0.9, 0.5, 0.55};
      sigma = 0.4;
      break;
    case Setting::logistic:
      prefix = {2.0, 0.0, -2.3, 0.0, 2.8, 0.0, -2.2, 0.0, 2.5};
      break;
    case Setting::poisson_count:
      prefix = {1.0, -0.9, 0.8, -1.1, 0.6};
      break;
  }
  if (p < static_cast<int>(prefix.size()))
    throw std::invalid_argument("p must be at least " + std::to_string(prefix.size()) +
                                " for the " + setting_name(setting) + " truth");
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(p);
  for (size_t j = 0; j < prefix.size(); ++j) beta0[static_cast<Eigen::Index>(j)] = prefix[j];
  return TruthSpec::from_beta(beta0, sigma);
}

Dataset simulate_dataset(Family family, int n, int p, double r,
                         const TruthSpec& truth, Rng& rng) {
  Dataset ds;
  auto [X, scales] = rescale_columns(generate_ar1_design(n, p, r, rng));
  ds.X = std::move(X);
  ds.column_scales = std::move(scales);
  ds.rescaled = true;
  ds.family = family;
  ds.y = simulate_response(family, ds.X, truth, rng);
  return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, int row, int col) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw CsvError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                       ", column " + std::to_string(col),
                   row, col);
  }
  while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
  if (pos != cell.size())
    throw CsvError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                       ", column " + std::to_string(col),
                   row, col);
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 Family family) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path, 0, 0);
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file " + path, 0, 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  int response_idx = -1;
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == response_column) response_idx = static_cast<int>(j);
  if (response_idx < 0)
    throw CsvError("response column '" + response_column + "' not found in header", 0, 0);

  std::vector<std::vector<double>> rows;
  int row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw CsvError("row " + std::to_string(row_no) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(header.size()),
                     row_no, 0);
    std::vector<double> vals(cells.size());
    for (size_t j = 0; j < cells.size(); ++j)
      vals[j] = parse_cell(cells[j], row_no, static_cast<int>(j) + 1);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw CsvError("no data rows in " + path, 0, 0);

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(header.size()) - 1;
  if (p < 1) throw CsvError("need at least one covariate column", 0, 0);

  Dataset ds;
  ds.family = family;
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    int col = 0;
    for (size_t j = 0; j < header.size(); ++j) {
      if (static_cast<int>(j) == response_idx)
        ds.y[i] = rows[i][j];
      else
        ds.X(i, col++) = rows[i][j];
    }
  }
  check_response(family, ds.y);
  auto [X, scales] = rescale_columns(ds.X);
  ds.X = std::move(X);
  ds.column_scales = std::move(scales);
  ds.rescaled = true;
  return ds;
}

}  // namespace threshreg
