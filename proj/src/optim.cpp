#include "nsbvar/optim.hpp"

#include <cmath>
#include <limits>

namespace nsbvar {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::EvalLimit: return "eval_limit";
    case StopReason::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double relative_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = relative_step * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

QuasiNewtonResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                                const QuasiNewtonOptions& opt) {
  const Eigen::Index n = x0.size();
  QuasiNewtonResult res;
  long evals = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  auto budget_left = [&](long need) { return evals + need <= opt.max_evals; };

  res.x = x0;
  res.objective = f(x0);
  auto finish = [&](StopReason reason) {
    res.reason = reason;
    res.converged = reason == StopReason::StepTolerance || reason == StopReason::GradientTolerance;
    res.evals = evals;
    return res;
  };
  if (!budget_left(2 * n)) return finish(StopReason::EvalLimit);

  Eigen::VectorXd g = central_gradient(f, res.x, opt.fd_relative_step);
  res.trace.push_back({0, res.objective, g.lpNorm<Eigen::Infinity>(), evals, 0.0});
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;

  for (int iter = 1;; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol * std::max(1.0, std::abs(res.objective))) {
      return finish(StopReason::GradientTolerance);
    }
    Eigen::VectorXd d = -hinv * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      fresh = true;
      d = -g;
      slope = -g.squaredNorm();
    }
    // First step of a fresh approximation is scaled to a unit-size move.
    double alpha = fresh ? std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300)) : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      if (!budget_left(1)) return finish(StopReason::EvalLimit);
      x_new = res.x + alpha * d;
      f_new = f(x_new);
      if (f_new <= res.objective + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        hinv.setIdentity();
        fresh = true;
        continue;
      }
      return finish(StopReason::LineSearchFailed);
    }
    const Eigen::VectorXd s = x_new - res.x;
    const double step = s.lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, res.x.lpNorm<Eigen::Infinity>());
    res.x = x_new;
    res.objective = f_new;
    res.iterations = iter;
    if (step <= opt.relative_step_tol * scale) {
      res.trace.push_back({iter, res.objective, g.lpNorm<Eigen::Infinity>(), evals, step});
      return finish(StopReason::StepTolerance);
    }
    if (!budget_left(2 * n)) {
      res.trace.push_back({iter, res.objective, g.lpNorm<Eigen::Infinity>(), evals, step});
      return finish(StopReason::EvalLimit);
    }
    const Eigen::VectorXd g_new = central_gradient(f, res.x, opt.fd_relative_step);
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    g = g_new;
    res.trace.push_back({iter, res.objective, g.lpNorm<Eigen::Infinity>(), evals, step});
  }
}

}  // namespace nsbvar
