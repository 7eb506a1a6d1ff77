#pragma once

// Log-barrier interior-point method for small dense convex programs
//
//     minimize    cost^T x
//     subject to  h_j(x) <= 0,   j = 1..m
//
// where every constraint is separable with linear and exponential terms:
//
//     h_j(x) = sum_k lin_jk x_k + sum_k exp_jk (e^{x_k} - 1) - rhs_j,  exp_jk >= 0.
//
// That family covers both power-allocation programs once powers are written in
// terms of per-slot rates. Centering uses damped Newton steps with a
// backtracking line search that keeps iterates strictly feasible; a phase-I
// problem supplies the strictly feasible start.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ehcrn::barrier {

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::vector<Term> lin;
  std::vector<Term> exp;  // coef * expm1(x_var), coef >= 0
  double rhs = 0.0;
  std::string tag;

  double value(const std::vector<double>& x) const;
};

struct Problem {
  std::size_t n = 0;
  std::vector<double> cost;
  std::vector<Constraint> constraints;
};

struct Options {
  double mu_factor = 10.0;         // barrier weight multiplier per outer step
  double gap_tol = 1e-11;          // stop once m / t <= gap_tol * max(1, |cost^T x|)
  double newton_tol = 1e-13;       // centering stop on half squared Newton decrement
  std::size_t max_newton = 200;    // per centering step
  double t0 = 1.0;
};

enum class Status { Optimal, MaxIter, Infeasible };

struct Result {
  Status status = Status::MaxIter;
  std::vector<double> x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t newton_iterations = 0;
  /// Largest relaxation applied to constraint right-hand sides when the
  /// feasible set turned out to have no strict interior.
  double relaxation = 0.0;
  std::string message;
};

/// Solves the program. `hint`, when non-empty, is tried as the starting point
/// before falling back to phase I.
Result solve(const Problem& problem, const Options& opts = {},
             const std::vector<double>& hint = {});

}  // namespace ehcrn::barrier
