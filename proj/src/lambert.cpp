#include "proxent/lambert.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace proxent::lambert {

namespace {

// Initial guess for the Halley iteration. Branch-point square-root series
// below -0.3235, Taylor near zero, log(1+x) in between (an upper bound on W
// for x > -1/e, so the iteration approaches from the convex side), and the
// usual log-log asymptotic for large x.
double w0_guess(double x) {
  if (x < -0.3235) {
    const double p = std::sqrt(2.0 * (1.0 + 2.718281828459045 * x));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  }
  if (x < 0.25) {
    return x * (1.0 + x * (-1.0 + x * (1.5 - 8.0 / 3.0 * x)));
  }
  if (x < 10.0) {
    return std::log1p(x);
  }
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
}

}  // namespace

double w0(double x) {
  if (std::isnan(x)) return x;
  if (x < kBranchPoint) {
    throw std::domain_error("w0: argument below -1/e");
  }
  if (x == kBranchPoint) return -1.0;
  if (x == 0.0) return 0.0;

  double w = w0_guess(x);
  const double tol = 1e-15 * std::max(1.0, std::abs(x));
  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double w1 = w + 1.0;
    // Halley step for g(w) = w e^w - x; the update runs once more after
    // the residual test passes, so the returned value is a polish beyond
    // the stopping tolerance.
    w -= f / (ew * w1 - (w + 2.0) * f / (2.0 * w1));
    // iterates stay on the principal branch
    if (w <= -1.0) w = std::nextafter(-1.0, 0.0);
    if (std::abs(f) <= tol) break;
  }
  return w;
}

namespace detail {

double wexp_below(double u) { return w0(std::exp(u)); }

double wexp_above(double u) {
  // Newton on f(w) = w + log w - u, seeded by the asymptotic w ~ u - log u.
  double w = u - std::log(std::max(u, 2.0));
  const double tol = 1e-15 * std::max(1.0, std::abs(u));
  for (int i = 0; i < 20; ++i) {
    const double f = w + std::log(w) - u;
    if (std::abs(f) <= tol) break;
    w -= f * w / (w + 1.0);
  }
  return w;
}

}  // namespace detail

double wexp(double u) {
  if (std::isnan(u)) return u;
  if (u <= kUSafe) return detail::wexp_below(u);
  return detail::wexp_above(u);
}

double wexp_scaled(double c, double u) {
  if (std::isnan(c) || std::isnan(u)) return std::nan("");
  if (c <= 0.0) {
    throw std::domain_error("wexp_scaled: scale must be positive");
  }
  return wexp(u + std::log(c));
}

double w0_derivative(double x, int n) {
  if (n < 1) {
    throw std::invalid_argument("w0_derivative: order must be >= 1");
  }
  if (std::isnan(x)) return x;
  if (x <= kBranchPoint) {
    throw std::domain_error("w0_derivative: derivative singular at/below -1/e");
  }

  // Build p_n by the recurrence; p_1 = 1, deg p_n = n - 1.
  std::vector<double> p{1.0};
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      next[j] -= (3.0 * k - 1.0) * p[j];   // -(3n-1) p_n
      next[j + 1] -= k * p[j];             // -n w p_n
      if (j >= 1) next[j - 1] += j * p[j]; // p_n'
      next[j] += j * p[j];                 // w p_n'
    }
    p = std::move(next);
  }

  const double w = w0(x);
  double pw = 0.0;
  for (std::size_t j = p.size(); j-- > 0;) pw = pw * w + p[j];
  return std::exp(-n * w) * pw / std::pow(1.0 + w, 2.0 * n - 1.0);
}

double w0_antiderivative(double x) {
  if (std::isnan(x)) return x;
  if (x < kBranchPoint) {
    throw std::domain_error("w0_antiderivative: argument below -1/e");
  }
  const double w = w0(x);
  return (w * w - w + 1.0) * std::exp(w);
}

}  // namespace proxent::lambert
