#pragma once

#include <Eigen/Dense>
#include <functional>
#include <istream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "proxent/averages.hpp"
#include "proxent/quadrature.hpp"

namespace proxent::moment {

/// Data-generating function rho. The built-in kind is the vertically
/// shifted c + sin(3 pi s^2)/2 family; Custom wraps any scalar function.
struct Generator {
  enum class Kind { BuiltinSin, Custom };

  Kind kind = Kind::BuiltinSin;
  double base_shift = 0.6;  // the c in c + sin(3 pi s^2)/2
  std::function<double(double)> custom;

  double operator()(double s) const;

  /// The same generator translated down by delta (rho - delta).
  Generator shifted_down(double delta) const;
};

/// Thrown when (f^*)' or (f^*)'' is non-finite at a quadrature node,
/// carrying the node and the multipliers that caused it. Solvers use this
/// signal to backtrack.
class DivergedEvaluation : public std::runtime_error {
 public:
  DivergedEvaluation(int node, double inner_product, Eigen::VectorXd mu)
      : std::runtime_error("diverged evaluation at quadrature node"),
        node_(node),
        inner_product_(inner_product),
        mu_(std::move(mu)) {}
  int node() const { return node_; }
  double inner_product() const { return inner_product_; }
  const Eigen::VectorXd& mu() const { return mu_; }

 private:
  int node_;
  double inner_product_;
  Eigen::VectorXd mu_;
};

/// b_k = integral of a_k * rho over [0,1] under the given rule,
/// a_k(s) = s^{k-1}.
Eigen::VectorXd data_vector(const Generator& gen, int n,
                            const quadrature::QuadratureRule& rule);

/// The finite-dimensional dual side of the entropy minimization problem:
/// monomial constraints, data vector, residual, Jacobian, primal
/// reconstruction. Immutable after construction; evaluations are
/// reentrant.
class MomentProblem {
 public:
  MomentProblem(Generator gen, averages::AverageSpec average,
                int n_moments = 8,
                quadrature::QuadratureRule rule =
                    quadrature::QuadratureRule::gauss_legendre(20));

  int n_moments() const { return n_; }
  const Generator& generator() const { return gen_; }
  const averages::AverageSpec& average() const { return avg_; }
  const quadrature::QuadratureRule& rule() const { return rule_; }
  const Eigen::VectorXd& data() const { return b_; }

  /// a_k(s) = s^{k-1}; k is 1-based and must lie in 1..n_moments.
  double constraint_function(int k, double s) const;

  /// r_k(mu) = sum_i w_i (f^*)'(sum_j mu_j a_j(s_i)) a_k(s_i) - b_k.
  Eigen::VectorXd dual_residual(const Eigen::VectorXd& mu) const;

  /// J_kl = sum_i w_i (f^*)''(...) a_k(s_i) a_l(s_i); symmetric PSD.
  Eigen::MatrixXd dual_jacobian(const Eigen::VectorXd& mu) const;

  /// Primal reconstruction x(s) = (f^*)'(sum_j mu_j a_j(s)).
  double primal_solution(const Eigen::VectorXd& mu, double s) const;

  /// Batched primal reconstruction over a sample grid.
  void primal_curve(const Eigen::VectorXd& mu, std::span<const double> s,
                    std::span<double> out) const;

  /// G(mu) = ||r(mu)||^2 and its gradient 2 J^T r.
  struct SosObjective {
    double value;
    Eigen::VectorXd gradient;
  };
  SosObjective sos_objective(const Eigen::VectorXd& mu) const;

 private:
  Eigen::VectorXd inner_products(const Eigen::VectorXd& mu) const;

  Generator gen_;
  averages::AverageSpec avg_;
  int n_;
  quadrature::QuadratureRule rule_;
  Eigen::MatrixXd basis_;  // (i,k) = a_{k+1}(s_i) = s_i^k, cached
  Eigen::VectorXd weights_;
  Eigen::VectorXd b_;
};

/// Parse "key = value" lines (# comments allowed) into a map.
std::map<std::string, std::string> flat_key_values(std::istream& in);

/// Flat key-value problem description (the CLI config format):
///   generator = sin
///   shift     = 0.6
///   moments   = 8
///   quad      = 20
///   family    = weighted | proximal
///   param     = 0.5
///   limiting  = 0 | 1
struct ProblemConfig {
  double shift = 0.6;
  int moments = 8;
  int quad = 20;
  averages::AverageSpec average;

  static ProblemConfig from_key_values(
      const std::map<std::string, std::string>& kv);
  static ProblemConfig from_stream(std::istream& in);
};

MomentProblem make_problem(const ProblemConfig& cfg);

}  // namespace proxent::moment
