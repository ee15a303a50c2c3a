#pragma once

#include <Eigen/Dense>
#include <string>

#include "threshreg/glm.hpp"

namespace threshreg {

enum class PenaltyKind { l1, scad, mcp, sica, hard, l0 };

std::string penalty_kind_name(PenaltyKind kind);
PenaltyKind parse_penalty_kind(const std::string& name);

// p_lambda(t) on t >= 0 with shape parameter a where the kind has one.
// Shape requirements: scad a > 2, mcp a > 1, sica a > 0.
struct Penalty {
  PenaltyKind kind = PenaltyKind::l1;
  double a = 0.0;

  static Penalty l1() { return {PenaltyKind::l1, 0.0}; }
  static Penalty scad(double a = 3.7);
  static Penalty mcp(double a = 3.0);
  static Penalty sica(double a = 1e-2);
  static Penalty hard() { return {PenaltyKind::hard, 0.0}; }
  static Penalty l0() { return {PenaltyKind::l0, 0.0}; }

  bool has_shape() const {
    return kind == PenaltyKind::scad || kind == PenaltyKind::mcp ||
           kind == PenaltyKind::sica;
  }
  std::string name() const;
};

void validate_penalty(const Penalty& pen);

double penalty_value(const Penalty& pen, double lambda, double t);

// p'_lambda(t); the one-sided derivative at 0+ when t == 0.
// Throws for l0 (not differentiable anywhere useful).
double penalty_derivative(const Penalty& pen, double lambda, double t);

// p'_lambda(0+) / lambda: 1 for l1/scad/mcp, (a+1)/a for sica, 2 for hard.
double prime_at_zero_factor(const Penalty& pen);

// rho(p_lambda) = sup_{0<t1<t2} -(p'(t2)-p'(t1))/(t2-t1).
// Closed forms: 0 (l1), 1/(a-1) (scad), 1/a (mcp), 2*lambda*(1/a + 1/a^2)
// (sica), 2 (hard). Throws for l0.
double max_concavity(const Penalty& pen, double lambda);

enum class ThresholdMode { drop, exact };

// Solves min_beta 0.5*w*(z-beta)^2 + p_lambda(|beta|) under the tau rule.
//   drop:  take the unconstrained global minimizer; zero it when its
//          magnitude falls below tau.
//   exact: minimize over {0} union {|beta| >= tau}.
// Odd in z; ties within 1e-12 go to the smaller magnitude. Throws for l0.
double scalar_threshold(const Penalty& pen, double lambda, double tau, double z,
                        double w, ThresholdMode mode);

namespace detail {
// Same scalar problem restricted to {|beta| >= tau} (allow_zero=false) or
// {0} union {|beta| >= tau} (allow_zero=true). Accepts l0; used by the
// reference solver which needs the nonzero-constrained update.
double scalar_threshold_constrained(const Penalty& pen, double lambda, double tau,
                                    double z, double w, bool allow_zero);
}  // namespace detail

// Penalized objective Q_n and the thresholded parameter space it is
// minimized over. spark_cap is the robust-spark bound kappa used as the
// support-size cap (||beta||_0 < spark_cap / 2).
struct RegObjective {
  Family family = Family::gaussian;
  Penalty penalty;
  double lambda = 0.0;
  double tau = 0.0;
  int spark_cap = 2;
};

void validate_objective(const RegObjective& obj);

// Q_n(beta) = neg_log_likelihood + sum_j p_lambda(|beta_j|).
// Does not check membership in B_tau; see is_feasible.
double objective(const RegObjective& obj, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

// beta in B_tau: ||beta||_0 < spark_cap/2 and nonzeros have |beta_j| >= tau.
bool is_feasible(const RegObjective& obj, const Eigen::VectorXd& beta);

}  // namespace threshreg
