#include "proxent/quadrature.hpp"

#include <cmath>

namespace proxent::quadrature {

QuadratureRule QuadratureRule::gauss_legendre(int m) {
  if (m < 1 || m > 256) {
    throw std::invalid_argument("gauss_legendre: order must lie in [1,256]");
  }

  std::vector<double> x(m), w(m);
  const double pi = 3.14159265358979323846;
  const int half = (m + 1) / 2;

  for (int i = 1; i <= half; ++i) {
    // Newton on P_m(z) from the Chebyshev-like starting value
    double z = std::cos(pi * (i - 0.25) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    // map [-1,1] -> [0,1]; ascending node order
    x[i - 1] = 0.5 * (1.0 - z);
    x[m - i] = 0.5 * (1.0 + z);
    w[i - 1] = 1.0 / ((1.0 - z * z) * pp * pp);
    w[m - i] = w[i - 1];
  }
  return QuadratureRule(std::move(x), std::move(w));
}

double QuadratureRule::integrate(
    const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double v = f(nodes_[i]);
    if (!std::isfinite(v)) {
      throw NonFiniteIntegrand(static_cast<int>(i), nodes_[i]);
    }
    acc += weights_[i] * v;
  }
  return acc;
}

}  // namespace proxent::quadrature
