#include "proxent/solvers.hpp"

#include <cmath>

namespace proxent::solvers {

namespace {

Eigen::VectorXd start_point(const moment::MomentProblem& p,
                            const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0) || !(cfg.step > 0.0) || cfg.max_iter < 1) {
    throw std::invalid_argument(
        "SolverConfig: needs tol > 0, step > 0, max_iter >= 1");
  }
  if (cfg.start) {
    if (cfg.start->size() != p.n_moments()) {
      throw std::invalid_argument("start vector has wrong length");
    }
    return *cfg.start;
  }
  return Eigen::VectorXd::Constant(p.n_moments(), 0.5);
}

// Fresh residual norm at mu; non-finite or diverged evaluations map to +inf.
double residual_norm_at(const moment::MomentProblem& p,
                        const Eigen::VectorXd& mu, Eigen::VectorXd* r_out) {
  try {
    Eigen::VectorXd r = p.dual_residual(mu);
    const double n = r.norm();
    if (r_out) *r_out = std::move(r);
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
  } catch (const moment::DivergedEvaluation&) {
    return std::numeric_limits<double>::infinity();
  }
}

void finalize(const moment::MomentProblem& p, SolveResult& res,
              double tol) {
  // reported norm is always a fresh evaluation at the returned mu
  res.residual_norm = residual_norm_at(p, res.mu, nullptr);
  res.converged = res.residual_norm <= tol;
}

}  // namespace

SolveResult newton_solve(const moment::MomentProblem& problem,
                         const SolverConfig& config) {
  SolveResult res;
  res.mu = start_point(problem, config);

  Eigen::VectorXd r;
  double rn = residual_norm_at(problem, res.mu, &r);
  res.residual_history.push_back(rn);
  if (!std::isfinite(rn)) {
    res.failure_reason = "diverged evaluation at starting point";
    finalize(problem, res, config.tol);
    return res;
  }

  while (rn > config.tol && res.iterations < config.max_iter) {
    Eigen::MatrixXd jac;
    try {
      jac = problem.dual_jacobian(res.mu);
    } catch (const moment::DivergedEvaluation& e) {
      res.failure_reason =
          "diverged Jacobian evaluation at node " + std::to_string(e.node());
      break;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    Eigen::VectorXd step = lu.solve(r);
    if (!step.allFinite() || lu.rcond() < 1e-15) {
      // Tikhonov fallback, one retry
      Eigen::MatrixXd reg =
          jac + 1e-12 * Eigen::MatrixXd::Identity(jac.rows(), jac.cols());
      Eigen::PartialPivLU<Eigen::MatrixXd> lu2(reg);
      step = lu2.solve(r);
      if (!step.allFinite()) {
        throw SingularJacobianError(
            "newton_solve: singular Jacobian after Tikhonov fallback");
      }
    }

    if (config.pure_newton) {
      const Eigen::VectorXd cand = res.mu - step;
      Eigen::VectorXd r_new;
      const double rn_new = residual_norm_at(problem, cand, &r_new);
      if (!std::isfinite(rn_new)) {
        res.failure_reason = "diverged evaluation under pure Newton step";
        break;
      }
      res.mu = cand;
      r = std::move(r_new);
      rn = rn_new;
    } else {
      double alpha = 1.0;
      bool accepted = false;
      for (int h = 0; h <= 30; ++h) {
        const Eigen::VectorXd cand = res.mu - alpha * step;
        Eigen::VectorXd r_new;
        const double rn_new = residual_norm_at(problem, cand, &r_new);
        if (std::isfinite(rn_new) && rn_new < rn) {
          res.mu = cand;
          r = std::move(r_new);
          rn = rn_new;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        res.failure_reason = "line search stalled after 30 halvings";
        break;
      }
    }
    ++res.iterations;
    res.residual_history.push_back(rn);
  }

  finalize(problem, res, config.tol);
  return res;
}

SolveResult grad_dual_solve(const moment::MomentProblem& problem,
                            const SolverConfig& config) {
  SolveResult res;
  res.mu = start_point(problem, config);

  Eigen::VectorXd r;
  double rn = residual_norm_at(problem, res.mu, &r);
  res.residual_history.push_back(rn);
  if (!std::isfinite(rn)) {
    res.failure_reason = "diverged evaluation at starting point";
    finalize(problem, res, config.tol);
    return res;
  }

  while (rn > config.tol && res.iterations < config.max_iter) {
    const Eigen::VectorXd cand = res.mu - config.step * r;
    Eigen::VectorXd r_new;
    const double rn_new = residual_norm_at(problem, cand, &r_new);
    if (!std::isfinite(rn_new)) {
      res.failure_reason = "diverged evaluation during descent";
      break;
    }
    res.mu = cand;
    r = std::move(r_new);
    rn = rn_new;
    ++res.iterations;
    res.residual_history.push_back(rn);
  }

  finalize(problem, res, config.tol);
  return res;
}

SolveResult grad_sos_solve(const moment::MomentProblem& problem,
                           const SolverConfig& config) {
  SolveResult res;
  res.mu = start_point(problem, config);

  Eigen::VectorXd r;
  double rn = residual_norm_at(problem, res.mu, &r);
  res.residual_history.push_back(rn);
  if (!std::isfinite(rn)) {
    res.failure_reason = "diverged evaluation at starting point";
    finalize(problem, res, config.tol);
    return res;
  }

  while (rn > config.tol && res.iterations < config.max_iter) {
    Eigen::VectorXd grad;
    try {
      grad = 2.0 * problem.dual_jacobian(res.mu).transpose() * r;
    } catch (const moment::DivergedEvaluation& e) {
      res.failure_reason =
          "diverged Jacobian evaluation at node " + std::to_string(e.node());
      break;
    }
    const Eigen::VectorXd cand = res.mu - config.step * grad;
    Eigen::VectorXd r_new;
    const double rn_new = residual_norm_at(problem, cand, &r_new);
    if (!std::isfinite(rn_new)) {
      res.failure_reason = "diverged evaluation during descent";
      break;
    }
    res.mu = cand;
    r = std::move(r_new);
    rn = rn_new;
    ++res.iterations;
    res.residual_history.push_back(rn);
  }

  finalize(problem, res, config.tol);
  return res;
}

SolveResult solve(const moment::MomentProblem& problem,
                  const SolverConfig& config) {
  switch (config.method) {
    case Method::Newton: return newton_solve(problem, config);
    case Method::GradDual: return grad_dual_solve(problem, config);
    case Method::GradSOS: return grad_sos_solve(problem, config);
  }
  throw std::logic_error("solve: unknown method");
}

HomotopyResult homotopy_solve(const moment::Generator& base_generator,
                              const HomotopyConfig& config,
                              const moment::MomentProblem& problem_template) {
  if (config.stages < 1) {
    throw std::invalid_argument("homotopy_solve: stages must be >= 1");
  }
  std::vector<int> schedule;  // shift indices N
  if (config.two_stage) {
    schedule = {0, config.stages};
  } else {
    for (int n = 0; n <= config.stages; ++n) schedule.push_back(n);
  }

  HomotopyResult out;
  std::string blocked;
  Eigen::VectorXd warm;

  for (std::size_t idx = 0; idx < schedule.size(); ++idx) {
    const double shift = schedule[idx] * config.delta;
    out.shifts.push_back(shift);

    if (!blocked.empty()) {
      SolveResult skipped;
      skipped.mu = Eigen::VectorXd::Constant(problem_template.n_moments(),
                                             std::nan(""));
      skipped.residual_norm = std::numeric_limits<double>::infinity();
      skipped.converged = false;
      skipped.residual_history = {skipped.residual_norm};
      skipped.failure_reason = blocked;
      out.stage_results.push_back(std::move(skipped));
      continue;
    }

    const moment::MomentProblem prob(
        base_generator.shifted_down(shift), problem_template.average(),
        problem_template.n_moments(), problem_template.rule());

    SolveResult res;
    if (idx == 0) {
      SolverConfig cfg = config.stage0;
      cfg.method = Method::Newton;
      res = newton_solve(prob, cfg);
      if (!res.converged) {
        blocked = "stage 0 Newton did not converge: " +
                  (res.failure_reason.empty() ? "budget exhausted"
                                              : res.failure_reason);
      }
    } else {
      SolverConfig cfg = config.inner;
      if (cfg.method == Method::Newton) cfg.method = Method::GradDual;
      if (!config.inner_iters.empty()) {
        const std::size_t j = std::min(idx - 1, config.inner_iters.size() - 1);
        cfg.max_iter = config.inner_iters[j];
      }
      cfg.start = warm;
      res = solve(prob, cfg);
      if (!res.failure_reason.empty()) {
        blocked = "stage " + std::to_string(idx) +
                  " failed: " + res.failure_reason;
      }
    }
    warm = res.mu;
    out.stage_results.push_back(std::move(res));
  }

  out.completed = blocked.empty();
  return out;
}

}  // namespace proxent::solvers
