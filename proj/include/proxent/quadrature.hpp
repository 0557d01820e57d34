#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace proxent::quadrature {

/// Thrown by integrate when the integrand is non-finite at a node.
class NonFiniteIntegrand : public std::runtime_error {
 public:
  NonFiniteIntegrand(int node, double s)
      : std::runtime_error("integrand non-finite at quadrature node"),
        node_(node),
        abscissa_(s) {}
  int node() const { return node_; }
  double abscissa() const { return abscissa_; }

 private:
  int node_;
  double abscissa_;
};

/// Gauss-Legendre rule on [0,1]; immutable after construction.
class QuadratureRule {
 public:
  /// m-point rule, exact for polynomials of degree <= 2m-1. Nodes and
  /// weights via Newton iteration on the Legendre recurrence; 1 <= m <= 256.
  static QuadratureRule gauss_legendre(int m);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  int order() const { return static_cast<int>(nodes_.size()); }

  double integrate(const std::function<double(double)>& f) const;

 private:
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {}

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace proxent::quadrature
