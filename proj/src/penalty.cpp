#include "threshreg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "threshreg/errors.hpp"

namespace threshreg {

std::string penalty_kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::l1: return "l1";
    case PenaltyKind::scad: return "scad";
    case PenaltyKind::mcp: return "mcp";
    case PenaltyKind::sica: return "sica";
    case PenaltyKind::hard: return "hard";
    case PenaltyKind::l0: return "l0";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(const std::string& name) {
  if (name == "l1" || name == "lasso") return PenaltyKind::l1;
  if (name == "scad") return PenaltyKind::scad;
  if (name == "mcp") return PenaltyKind::mcp;
  if (name == "sica") return PenaltyKind::sica;
  if (name == "hard") return PenaltyKind::hard;
  if (name == "l0") return PenaltyKind::l0;
  throw std::invalid_argument("unknown penalty: " + name);
}

Penalty Penalty::scad(double a) { Penalty p{PenaltyKind::scad, a}; validate_penalty(p); return p; }
Penalty Penalty::mcp(double a) { Penalty p{PenaltyKind::mcp, a}; validate_penalty(p); return p; }
Penalty Penalty::sica(double a) { Penalty p{PenaltyKind::sica, a}; validate_penalty(p); return p; }

std::string Penalty::name() const { return penalty_kind_name(kind); }

void validate_penalty(const Penalty& pen) {
  switch (pen.kind) {
    case PenaltyKind::scad:
      if (!(pen.a > 2.0)) throw std::invalid_argument("scad requires a > 2");
      break;
    case PenaltyKind::mcp:
      if (!(pen.a > 1.0)) throw std::invalid_argument("mcp requires a > 1");
      break;
    case PenaltyKind::sica:
      if (!(pen.a > 0.0)) throw std::invalid_argument("sica requires a > 0");
      break;
    default:
      break;
  }
}

double penalty_value(const Penalty& pen, double lambda, double t) {
  if (t < 0.0) throw std::invalid_argument("penalty_value requires t >= 0");
  if (lambda < 0.0) throw std::invalid_argument("penalty_value requires lambda >= 0");
  validate_penalty(pen);
  const double a = pen.a;
  switch (pen.kind) {
    case PenaltyKind::l1:
      return lambda * t;
    case PenaltyKind::scad:
      if (t <= lambda) return lambda * t;
      if (t <= a * lambda)
        return (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0));
      return lambda * lambda * (a + 1.0) / 2.0;
    case PenaltyKind::mcp:
      if (t <= a * lambda) return lambda * t - t * t / (2.0 * a);
      return a * lambda * lambda / 2.0;
    case PenaltyKind::sica:
      if (t == 0.0) return 0.0;
      return lambda * (a + 1.0) * t / (a + t);
    case PenaltyKind::hard: {
      const double r = std::max(lambda - t, 0.0);
      return lambda * lambda - r * r;
    }
    case PenaltyKind::l0:
      return t != 0.0 ? lambda : 0.0;
  }
  return 0.0;
}

double penalty_derivative(const Penalty& pen, double lambda, double t) {
  if (t < 0.0) throw std::invalid_argument("penalty_derivative requires t >= 0");
  validate_penalty(pen);
  const double a = pen.a;
  switch (pen.kind) {
    case PenaltyKind::l1:
      return lambda;
    case PenaltyKind::scad:
      if (t <= lambda) return lambda;
      return std::max(a * lambda - t, 0.0) / (a - 1.0);
    case PenaltyKind::mcp:
      return std::max(lambda - t / a, 0.0);
    case PenaltyKind::sica:
      return lambda * (a + 1.0) * a / ((a + t) * (a + t));
    case PenaltyKind::hard:
      return 2.0 * std::max(lambda - t, 0.0);
    case PenaltyKind::l0:
      throw std::invalid_argument("l0 penalty has no derivative");
  }
  return 0.0;
}

double prime_at_zero_factor(const Penalty& pen) {
  validate_penalty(pen);
  switch (pen.kind) {
    case PenaltyKind::l1:
    case PenaltyKind::scad:
    case PenaltyKind::mcp:
      return 1.0;
    case PenaltyKind::sica:
      return (pen.a + 1.0) / pen.a;
    case PenaltyKind::hard:
      return 2.0;
    case PenaltyKind::l0:
      throw std::invalid_argument("l0 penalty has no derivative at 0+");
  }
  return 0.0;
}

double max_concavity(const Penalty& pen, double lambda) {
  validate_penalty(pen);
  switch (pen.kind) {
    case PenaltyKind::l1:
      return 0.0;
    case PenaltyKind::scad:
      return 1.0 / (pen.a - 1.0);
    case PenaltyKind::mcp:
      return 1.0 / pen.a;
    case PenaltyKind::sica:
      return 2.0 * lambda * (1.0 / pen.a + 1.0 / (pen.a * pen.a));
    case PenaltyKind::hard:
      return 2.0;
    case PenaltyKind::l0:
      throw std::invalid_argument("l0 penalty has no finite concavity");
  }
  return 0.0;
}

namespace {

// Real roots of x^3 + c2 x^2 + c1 x + c0 = 0 (Cardano / trigonometric).
void cubic_real_roots(double c2, double c1, double c0, std::vector<double>& roots) {
  roots.clear();
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double shift = -c2 / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    roots.push_back(u + v + shift);
  } else if (p == 0.0 && q == 0.0) {
    roots.push_back(shift);
  } else {
    constexpr double pi = 3.14159265358979323846;
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(phi - 2.0 * pi * k / 3.0) + shift);
  }
}

double golden_section_min(double lo, double hi, double tol,
                          const std::function<double(double)>& f) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Stationary points of 0.5*w*(z-t)^2 + p(t) on t >= 0, for z >= 0, plus
// the breakpoints of the piecewise forms. Within every piece the objective
// is smooth and its minimum sits at a stationary point or piece boundary,
// so comparing objective values over this set finds the global minimum.
void unconstrained_candidates(const Penalty& pen, double lambda, double z,
                              double w, std::vector<double>& out) {
  out.clear();
  const double a = pen.a;
  auto keep = [&](double t, double lo, double hi) {
    if (t > lo && t < hi && t <= z) out.push_back(t);
  };
  switch (pen.kind) {
    case PenaltyKind::l1:
      keep(z - lambda / w, 0.0, std::numeric_limits<double>::infinity());
      break;
    case PenaltyKind::scad: {
      keep(z - lambda / w, 0.0, lambda);
      const double denom = w * (a - 1.0) - 1.0;
      if (denom != 0.0) keep((w * z * (a - 1.0) - a * lambda) / denom, lambda, a * lambda);
      if (z > a * lambda) out.push_back(z);
      out.push_back(std::min(lambda, z));
      out.push_back(std::min(a * lambda, z));
      break;
    }
    case PenaltyKind::mcp: {
      const double denom = a * w - 1.0;
      if (denom != 0.0) keep(a * (w * z - lambda) / denom, 0.0, a * lambda);
      if (z > a * lambda) out.push_back(z);
      out.push_back(std::min(a * lambda, z));
      break;
    }
    case PenaltyKind::hard: {
      if (w != 2.0) keep((w * z - 2.0 * lambda) / (w - 2.0), 0.0, lambda);
      if (z > lambda) out.push_back(z);
      out.push_back(std::min(lambda, z));
      break;
    }
    case PenaltyKind::sica: {
      // w(t - z) + lambda a (a+1) / (a+t)^2 = 0, a cubic in t
      std::vector<double> roots;
      cubic_real_roots(2.0 * a - z, a * a - 2.0 * a * z,
                       lambda * a * (a + 1.0) / w - a * a * z, roots);
      bool found = false;
      for (double r : roots)
        if (r > 0.0 && r <= z * (1.0 + 1e-12)) {
          out.push_back(std::min(r, z));
          found = true;
        }
      if (!found && z > 0.0) {
        auto f = [&](double t) {
          return 0.5 * w * (z - t) * (z - t) + penalty_value(pen, lambda, t);
        };
        out.push_back(golden_section_min(0.0, z, 1e-10, f));
      }
      break;
    }
    case PenaltyKind::l0:
      // penalty constant on t > 0: quadratic minimizer
      if (z > 0.0) out.push_back(z);
      break;
  }
}

}  // namespace

namespace detail {

double scalar_threshold_constrained(const Penalty& pen, double lambda, double tau,
                                    double z, double w, bool allow_zero) {
  if (!(w > 0.0)) throw std::invalid_argument("scalar_threshold requires w > 0");
  if (tau < 0.0) throw std::invalid_argument("scalar_threshold requires tau >= 0");
  if (!std::isfinite(z)) throw std::invalid_argument("scalar_threshold requires finite z");
  validate_penalty(pen);

  const double sign = z < 0.0 ? -1.0 : 1.0;
  const double za = std::abs(z);

  auto f = [&](double t) {
    return 0.5 * w * (za - t) * (za - t) + penalty_value(pen, lambda, t);
  };

  std::vector<double> cands;
  unconstrained_candidates(pen, lambda, za, w, cands);
  cands.push_back(tau);
  if (allow_zero) cands.push_back(0.0);

  double best = allow_zero ? 0.0 : tau;
  double best_f = f(best);
  std::sort(cands.begin(), cands.end());
  for (double c : cands) {
    if (c < 0.0) continue;
    if (c < tau && !(allow_zero && c == 0.0)) continue;
    const double fc = f(c);
    // scanning in ascending magnitude, ties within 1e-12 keep the smaller one
    if (fc < best_f - 1e-12) {
      best = c;
      best_f = fc;
    }
  }
  return sign * best;
}

}  // namespace detail

double scalar_threshold(const Penalty& pen, double lambda, double tau, double z,
                        double w, ThresholdMode mode) {
  if (pen.kind == PenaltyKind::l0)
    throw std::invalid_argument("scalar_threshold does not accept l0; use the brute-force solver");
  if (mode == ThresholdMode::exact)
    return detail::scalar_threshold_constrained(pen, lambda, tau, z, w, true);
  // drop: unconstrained global minimizer, zeroed when below tau
  const double m = detail::scalar_threshold_constrained(pen, lambda, 0.0, z, w, true);
  return std::abs(m) >= tau ? m : 0.0;
}

void validate_objective(const RegObjective& obj) {
  validate_penalty(obj.penalty);
  if (obj.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (obj.tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (obj.spark_cap < 2) throw std::invalid_argument("spark_cap must be >= 2");
}

double objective(const RegObjective& obj, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  validate_objective(obj);
  double pen_sum = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) pen_sum += penalty_value(obj.penalty, obj.lambda, std::abs(beta[j]));
  return neg_log_likelihood(obj.family, X, y, beta) + pen_sum;
}

bool is_feasible(const RegObjective& obj, const Eigen::VectorXd& beta) {
  int nnz = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0.0) continue;
    ++nnz;
    if (std::abs(beta[j]) < obj.tau) return false;
  }
  return nnz < 0.5 * obj.spark_cap;
}

}  // namespace threshreg
