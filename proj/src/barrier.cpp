#include "ehcrn/barrier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehcrn::barrier {

double Constraint::value(const std::vector<double>& x) const {
  double v = -rhs;
  for (const Term& t : lin) v += t.coef * x[t.var];
  for (const Term& t : exp) v += t.coef * std::expm1(x[t.var]);
  return v;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Centering {
  bool ok = true;
  std::size_t iterations = 0;
};

bool strictly_feasible(const Problem& p, const std::vector<double>& x) {
  for (const Constraint& c : p.constraints) {
    const double h = c.value(x);
    if (!(h < 0.0)) return false;
  }
  return true;
}

double barrier_value(const Problem& p, const std::vector<double>& x, double t) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.n; ++k) f += t * p.cost[k] * x[k];
  for (const Constraint& c : p.constraints) {
    const double h = c.value(x);
    if (!(h < 0.0)) return kInf;
    f -= std::log(-h);
  }
  return f;
}

void gradient_hessian(const Problem& p, const std::vector<double>& x, double t,
                      Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  const auto n = static_cast<Eigen::Index>(p.n);
  g = Eigen::Map<const Eigen::VectorXd>(p.cost.data(), n) * t;
  H.setZero(n, n);
  Eigen::VectorXd dh(n);
  for (const Constraint& c : p.constraints) {
    const double h = c.value(x);
    const double inv = 1.0 / (-h);
    dh.setZero();
    for (const Term& term : c.lin) dh[static_cast<Eigen::Index>(term.var)] += term.coef;
    for (const Term& term : c.exp) {
      const double e = term.coef * std::exp(x[term.var]);
      dh[static_cast<Eigen::Index>(term.var)] += e;
      H(static_cast<Eigen::Index>(term.var), static_cast<Eigen::Index>(term.var)) += e * inv;
    }
    g += dh * inv;
    H.noalias() += (dh * inv) * (dh * inv).transpose();
  }
}

// Damped Newton centering of t*cost^T x - sum log(-h_j(x)).
Centering center(const Problem& p, std::vector<double>& x, double t, const Options& o) {
  Centering out;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  std::vector<double> trial(p.n);
  double prev_lambda2 = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < o.max_newton; ++it) {
    gradient_hessian(p, x, t, g, H);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd dx = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
      const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += reg;
      dx = H.ldlt().solve(-g);
      if (!dx.allFinite()) {
        out.ok = false;
        return out;
      }
    }
    const double lambda2 = -g.dot(dx);
    ++out.iterations;
    if (lambda2 * 0.5 <= o.newton_tol) return out;
    // Full steps that no longer shrink the decrement: roundoff in the gradient
    // has taken over and further iterations only wander.
    if (lambda2 < 1e-6 && lambda2 > 0.25 * prev_lambda2) return out;
    prev_lambda2 = lambda2;

    const double f0 = barrier_value(p, x, t);
    double step = lambda2 < 0.0625 ? 1.0 : 1.0 / (1.0 + std::sqrt(lambda2));
    bool moved = false;
    while (step > 1e-20) {
      for (std::size_t k = 0; k < p.n; ++k) trial[k] = x[k] + step * dx[static_cast<Eigen::Index>(k)];
      if (strictly_feasible(p, trial)) {
        const double f1 = barrier_value(p, trial, t);
        // inside the quadratic region roundoff in f dominates; trust the decrement
        if (lambda2 < 0.0625 || f1 <= f0 - 0.25 * step * lambda2) {
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) {
      out.ok = lambda2 < 1e-8;
      return out;
    }
    x = trial;
  }
  out.ok = false;
  return out;
}

double objective(const Problem& p, const std::vector<double>& x) {
  double f = 0.0;
  for (std::size_t k = 0; k < p.n; ++k) f += p.cost[k] * x[k];
  return f;
}

// Stationarity and complementarity at x. Multipliers start from the central
// path estimate 1/(t*(-h)); the ones carrying the stationarity balance are
// then refitted by least squares, since a tiny slack computed as a difference
// of O(1) numbers can be off by many digits and would spoil the estimate.
double kkt_residual(const Problem& p, const std::vector<double>& x, double t) {
  const auto n = static_cast<Eigen::Index>(p.n);
  const Eigen::VectorXd cost = Eigen::Map<const Eigen::VectorXd>(p.cost.data(), n);
  const double cscale = std::max(1.0, n > 0 ? cost.cwiseAbs().maxCoeff() : 0.0);
  const std::size_t m = p.constraints.size();

  std::vector<Eigen::VectorXd> grad(m, Eigen::VectorXd::Zero(n));
  std::vector<double> h(m), lambda(m);
  double infeas = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Constraint& c = p.constraints[j];
    h[j] = c.value(x);
    infeas = std::max(infeas, h[j]);
    lambda[j] = 1.0 / (t * std::max(-h[j], std::numeric_limits<double>::min()));
    for (const Term& term : c.lin) grad[j][static_cast<Eigen::Index>(term.var)] += term.coef;
    for (const Term& term : c.exp)
      grad[j][static_cast<Eigen::Index>(term.var)] += term.coef * std::exp(x[term.var]);
  }

  std::vector<std::size_t> active;
  Eigen::VectorXd rest = cost;
  for (std::size_t j = 0; j < m; ++j) {
    if (n > 0 && lambda[j] * grad[j].cwiseAbs().maxCoeff() > 1e-3 * cscale) {
      active.push_back(j);
    } else {
      rest += lambda[j] * grad[j];
    }
  }
  if (!active.empty()) {
    Eigen::MatrixXd G(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) G.col(static_cast<Eigen::Index>(a)) = grad[active[a]];
    const Eigen::VectorXd fit = G.colPivHouseholderQr().solve(-rest);
    if (fit.allFinite() && fit.minCoeff() >= 0.0) {
      for (std::size_t a = 0; a < active.size(); ++a) lambda[active[a]] = fit[static_cast<Eigen::Index>(a)];
    }
  }

  Eigen::VectorXd r = cost;
  double comp = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    r += lambda[j] * grad[j];
    comp = std::max(comp, lambda[j] * std::abs(h[j]));
  }
  const double stat = n > 0 ? r.cwiseAbs().maxCoeff() / cscale : 0.0;
  return std::max({stat, comp, infeas});
}

struct PathResult {
  bool ok = true;
  double t = 1.0;
  std::size_t newton = 0;
};

// Follows the central path from a strictly feasible x. `early_exit`, when set,
// is polled after each centering and stops the path when it returns true.
template <class Exit>
PathResult follow_path(const Problem& p, std::vector<double>& x, const Options& o, Exit early_exit) {
  PathResult res;
  const double m = static_cast<double>(std::max<std::size_t>(p.constraints.size(), 1));
  double t = o.t0;
  for (int outer = 0; outer < 200; ++outer) {
    const Centering c = center(p, x, t, o);
    res.newton += c.iterations;
    res.t = t;
    if (early_exit(x)) return res;
    if (!c.ok) {
      res.ok = false;
      return res;
    }
    if (m / t <= o.gap_tol * std::max(1.0, std::abs(objective(p, x)))) return res;
    t *= o.mu_factor;
  }
  res.ok = false;
  return res;
}

}  // namespace

Result solve(const Problem& problem, const Options& opts, const std::vector<double>& hint) {
  Result result;
  Problem p = problem;

  if (p.n == 0) {
    result.status = Status::Optimal;
    for (const Constraint& c : p.constraints) {
      if (c.value({}) > 0.0) result.status = Status::Infeasible;
    }
    return result;
  }

  std::vector<double> x = hint.size() == p.n ? hint : std::vector<double>(p.n, 0.0);
  std::size_t newton = 0;

  if (!strictly_feasible(p, x)) {
    // Phase I: minimize s subject to h_j(x) <= s and s >= -1.
    Problem ph;
    ph.n = p.n + 1;
    ph.cost.assign(ph.n, 0.0);
    ph.cost[p.n] = 1.0;
    double scale = 1.0;
    double smax = -kInf;
    for (const Constraint& c : p.constraints) {
      Constraint cc = c;
      cc.lin.push_back({p.n, -1.0});
      ph.constraints.push_back(std::move(cc));
      scale = std::max(scale, std::abs(c.rhs));
      smax = std::max(smax, c.value(x));
    }
    Constraint floor;
    floor.lin.push_back({p.n, -1.0});
    floor.rhs = 1.0;
    ph.constraints.push_back(floor);

    std::vector<double> xs = x;
    xs.push_back(std::max(smax, 0.0) + 1.0);
    Options po = opts;
    po.gap_tol = 1e-14;
    const PathResult pr = follow_path(ph, xs, po, [&](const std::vector<double>& v) {
      return v[p.n] < 0.0;
    });
    newton += pr.newton;
    const double s = xs[p.n];
    xs.pop_back();
    if (s >= 0.0) {
      if (s > 1e-9 * scale) {
        result.status = Status::Infeasible;
        result.x = xs;
        result.newton_iterations = newton;
        result.message = "phase I: constraints cannot be met (max violation " + std::to_string(s) + ")";
        return result;
      }
      // Feasible set without strict interior: relax every constraint slightly.
      const double delta = 2.0 * s + 1e-12 * scale;
      for (Constraint& c : p.constraints) c.rhs += delta;
      result.relaxation = delta;
    }
    x = xs;
    if (!strictly_feasible(p, x)) {
      result.status = Status::Infeasible;
      result.x = x;
      result.newton_iterations = newton;
      result.message = "phase I did not reach a strictly feasible point";
      return result;
    }
  }

  const PathResult pr = follow_path(p, x, opts, [](const std::vector<double>&) { return false; });
  newton += pr.newton;
  result.x = x;
  result.objective = objective(problem, x);
  result.kkt_residual = kkt_residual(p, x, pr.t);
  result.newton_iterations = newton;
  result.status = pr.ok ? Status::Optimal : Status::MaxIter;
  if (!pr.ok) result.message = "centering stalled";
  return result;
}

}  // namespace ehcrn::barrier
