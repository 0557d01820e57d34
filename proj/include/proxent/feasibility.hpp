#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "proxent/moment_problem.hpp"

namespace proxent::feasibility {

class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(double condition)
      : std::runtime_error("feasibility system numerically singular"),
        condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Square discretization of the constraint map: row j, column i holds
/// w_i a_j(s_i) under the n-point rule, so Mx = b asks for nodal values of
/// a function matching the moment data. b comes from the problem's own
/// (finer) data rule; matching abscissas to moments only squares M.
struct DiscretizedSystem {
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  quadrature::QuadratureRule rule;  // the n-point rule behind M
  int n = 0;
};

DiscretizedSystem build_system(
    int n, const moment::Generator& generator,
    const quadrature::QuadratureRule& data_rule =
        quadrature::QuadratureRule::gauss_legendre(20));

enum class Classification { FeasibleCertificate, Indeterminate };

struct FeasibilityReport {
  Eigen::VectorXd x;          // nodal solution of Mx = b
  double min_component = 0.0;
  double orthant_distance = 0.0;  // ||min(x,0)||_2
  double condition_estimate = 0.0;
  double system_residual = 0.0;   // ||Mx - b||_2 after the solve
  Classification classification = Classification::Indeterminate;
};

/// Solves Mx = b by partial-pivot LU (1-norm condition estimate) and
/// measures the distance of x from the non-negative orthant. Throws
/// SingularSystemError when the condition estimate exceeds 1e12.
FeasibilityReport feasibility_report(const DiscretizedSystem& system);

}  // namespace proxent::feasibility
