#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxent/moment_problem.hpp"

namespace proxent::solvers {

enum class Method { Newton, GradDual, GradSOS };

struct SolverConfig {
  Method method = Method::Newton;
  int max_iter = 50;
  double tol = 1e-8;
  double step = 1.0;  // gradient step-size modifier
  std::optional<Eigen::VectorXd> start;  // default (1/2, ..., 1/2)
  bool pure_newton = false;  // plain full steps, no globalization
};

struct SolveResult {
  Eigen::VectorXd mu;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // size iterations + 1
  std::string failure_reason;            // empty when nothing went wrong
};

class SingularJacobianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damped Newton on the dual system: mu <- mu - J^{-1} r with residual-norm
/// backtracking (factor 1/2, up to 30 halvings) unless pure_newton is set.
/// A singular Jacobian gets one Tikhonov retry (+1e-12 I) before throwing.
SolveResult newton_solve(const moment::MomentProblem& problem,
                         const SolverConfig& config);

/// Fixed-step descent directly on the dual: mu <- mu - step * r(mu).
SolveResult grad_dual_solve(const moment::MomentProblem& problem,
                            const SolverConfig& config);

/// Fixed-step descent on G(mu) = ||r||^2: mu <- mu - step * 2 J^T r.
/// History records ||r||, not G.
SolveResult grad_sos_solve(const moment::MomentProblem& problem,
                           const SolverConfig& config);

/// Dispatch on config.method.
SolveResult solve(const moment::MomentProblem& problem,
                  const SolverConfig& config);

/// Sequence-of-problems schedule: generators rho_N = base - N delta for
/// N = 0..stages, stage 0 solved by Newton, later stages by the configured
/// gradient method warm-started from the previous multipliers.
struct HomotopyConfig {
  double delta = 0.1;
  int stages = 3;  // upsilon; total shift is stages * delta
  std::vector<int> inner_iters;  // per gradient stage; last entry repeats
  SolverConfig inner;            // gradient template (method, step, tol)
  SolverConfig stage0;           // Newton config for the base problem
  bool two_stage = false;        // N = 0 then N = stages directly

  double total_shift() const { return stages * delta; }
};

struct HomotopyResult {
  std::vector<SolveResult> stage_results;
  std::vector<double> shifts;  // downward shift per stage
  bool completed = false;
};

HomotopyResult homotopy_solve(const moment::Generator& base_generator,
                              const HomotopyConfig& config,
                              const moment::MomentProblem& problem_template);

}  // namespace proxent::solvers
