#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nsbvar {

struct QuasiNewtonOptions {
  long max_evals = 30000;              // objective evaluations, gradient probes included
  double relative_step_tol = 1e-9;     // ||dx||_inf <= tol * max(1, ||x||_inf)
  double gradient_tol = 1e-6;          // ||g||_inf <= tol * max(1, |f|)
  double fd_relative_step = 1e-6;      // central-difference step, relative to max(1, |x_i|)
  int max_line_search = 40;
};

enum class StopReason { StepTolerance, GradientTolerance, EvalLimit, LineSearchFailed };
std::string to_string(StopReason r);

struct OptimizerTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double first_order_optimality = 0.0;  // ||g||_inf
  long evals = 0;
  double step = 0.0;                    // ||dx||_inf of the accepted step
};

struct QuasiNewtonResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  bool converged = false;
  StopReason reason = StopReason::EvalLimit;
  int iterations = 0;
  long evals = 0;
  std::vector<OptimizerTraceRow> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Central-difference gradient; counts 2n evaluations.
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double relative_step);

// BFGS on the inverse Hessian with Armijo backtracking and finite-difference
// gradients. Non-finite objective values are treated as +inf. Returns the best
// point seen, even when the evaluation budget runs out.
QuasiNewtonResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const QuasiNewtonOptions& options);

}  // namespace nsbvar
