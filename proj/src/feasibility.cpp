#include "proxent/feasibility.hpp"

#include <cmath>

namespace proxent::feasibility {

DiscretizedSystem build_system(int n, const moment::Generator& generator,
                               const quadrature::QuadratureRule& data_rule) {
  if (n < 1) throw std::invalid_argument("build_system: n must be >= 1");
  auto rule = quadrature::QuadratureRule::gauss_legendre(n);

  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m(j, i) = rule.weights()[i] * std::pow(rule.nodes()[i], j);
    }
  }
  Eigen::VectorXd b = moment::data_vector(generator, n, data_rule);
  return DiscretizedSystem{std::move(m), std::move(b), std::move(rule), n};
}

FeasibilityReport feasibility_report(const DiscretizedSystem& system) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system.M);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond
                                  : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) throw SingularSystemError(cond);

  FeasibilityReport rep;
  rep.x = lu.solve(system.b);
  rep.condition_estimate = cond;
  rep.system_residual = (system.M * rep.x - system.b).norm();
  rep.min_component = rep.x.minCoeff();
  rep.orthant_distance = rep.x.cwiseMin(0.0).norm();
  rep.classification = rep.min_component >= -1e-12
                           ? Classification::FeasibleCertificate
                           : Classification::Indeterminate;
  return rep;
}

}  // namespace proxent::feasibility
