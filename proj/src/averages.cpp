#include "proxent/averages.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxent/lambert.hpp"

namespace proxent::averages {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ExtendedReal ent(double x) {
  if (std::isnan(x)) return x;
  if (x > 0.0) return x * std::log(x) - x;
  if (x == 0.0) return 0.0;
  return ExtendedReal::infinity();
}

ExtendedReal f_t(double x, double t) {
  if (t == 1.0) return 0.5 * x * x;  // the ent term carries weight zero
  const ExtendedReal e = ent(x);
  if (!e.is_finite()) return e;
  return (1.0 - t) * e.value() + t * 0.5 * x * x;
}

double f_t_star(double y, double t, EndpointMode mode) {
  if (t == 0.0) return std::exp(y);
  if (t == 1.0) {
    if (mode == EndpointMode::Limiting) return y > 0.0 ? 0.5 * y * y : 0.0;
    return 0.5 * y * y;
  }
  const double w = lambert::wexp_scaled(t / (1.0 - t), y / (1.0 - t));
  return (1.0 - t) * (1.0 - t) / (2.0 * t) * (w + 2.0) * w;
}

double f_t_star_prime(double y, double t, EndpointMode mode) {
  if (t == 0.0) return std::exp(y);
  if (t == 1.0) {
    if (mode == EndpointMode::Limiting) return std::max(y, 0.0);
    return y;
  }
  return (1.0 - t) / t * lambert::wexp_scaled(t / (1.0 - t), y / (1.0 - t));
}

double f_t_star_second(double y, double t, EndpointMode mode) {
  if (t == 0.0) return std::exp(y);
  if (t == 1.0) {
    if (mode == EndpointMode::Limiting) return y > 0.0 ? 1.0 : 0.0;
    return 1.0;
  }
  const double w = lambert::wexp_scaled(t / (1.0 - t), y / (1.0 - t));
  return (1.0 / t) * w / (1.0 + w);
}

double prox_phi(double x, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("prox_phi: lambda must lie in (0,1)");
  }
  const double v = lambert::wexp_scaled(2.0 / lambda - 1.0, 2.0 * x / lambda);
  return -((2.0 / lambda - 2.0) / (2.0 / lambda - 1.0)) * v + 2.0 * x / lambda;
}

ExtendedReal f_lambda(double x, double lambda) {
  if (lambda == 0.0) return ent(x);
  if (lambda == 1.0) return 0.5 * x * x;
  const double v = lambert::wexp_scaled(2.0 / lambda - 1.0, 2.0 * x / lambda);
  const double a =
      (2.0 * lambda - 2.0) / (2.0 - lambda) * v + 2.0 * x / lambda;
  const double om = lambert::wexp(a);
  return (lambda - 1.0) / 2.0 * om * om -
         x * x * (lambda - 2.0) / (2.0 * lambda) + (lambda - 1.0) * om -
         lambda * (lambda - 1.0) * (lambda - 1.0) /
             ((lambda - 2.0) * (lambda - 2.0)) * v * v;
}

double prox_theta(double x, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("prox_theta: lambda must lie in (0,1)");
  }
  const double w =
      lambert::wexp_scaled(lambda / (2.0 - lambda), 2.0 * x / (2.0 - lambda));
  return (2.0 / lambda - 2.0) * w + 2.0 * x / (2.0 - lambda);
}

double f_lambda_star(double x, double lambda) {
  if (lambda == 0.0) return std::exp(x);
  if (lambda == 1.0) return 0.5 * x * x;
  const double om =
      lambert::wexp_scaled(lambda / (2.0 - lambda), 2.0 * x / (2.0 - lambda));
  const double b = (2.0 / lambda - 2.0) * om + 2.0 * x / (2.0 - lambda);
  const double big = lambert::wexp(b);
  return (1.0 - lambda) * big + lambda * x * x / (4.0 - 2.0 * lambda) +
         0.5 * (1.0 - lambda) * big * big +
         (lambda - 1.0) * (lambda - 1.0) * (lambda - 2.0) / (lambda * lambda) *
             om * om;
}

double f_lambda_star_prime(double x, double lambda) {
  if (lambda == 0.0) return std::exp(x);
  if (lambda == 1.0) return x;
  const double om =
      lambert::wexp_scaled(lambda / (2.0 - lambda), 2.0 * x / (2.0 - lambda));
  const double b = (2.0 / lambda - 2.0) * om + 2.0 * x / (2.0 - lambda);
  const double big = lambert::wexp(b);
  return (1.0 / (1.0 + om)) *
         (2.0 * (1.0 - lambda) / lambda * (om - lambda / (lambda - 2.0)) *
              big -
          4.0 * (lambda - 1.0) * (lambda - 1.0) / (lambda * lambda) * om * om +
          lambda * x / (2.0 - lambda) * om + x * lambda / (2.0 - lambda));
}

double f_lambda_star_second(double x, double lambda) {
  if (lambda == 0.0) return std::exp(x);
  if (lambda == 1.0) return 1.0;
  const double h = 1e-5 * std::max(1.0, std::abs(x));
  const double d1 = (f_lambda_star_prime(x + h, lambda) -
                     f_lambda_star_prime(x - h, lambda)) /
                    (2.0 * h);
  const double d2 = (f_lambda_star_prime(x + 0.5 * h, lambda) -
                     f_lambda_star_prime(x - 0.5 * h, lambda)) /
                    h;
  return (4.0 * d2 - d1) / 3.0;
}

InnerConjugates inner_conjugates(double x) {
  const double w = lambert::wexp(x);
  return {0.5 * w * (w + 2.0), 0.5 * x * x - w - 0.5 * w * w};
}

double conjugate_numeric(const std::function<double(double)>& f, double x,
                         BracketConfig cfg) {
  const int n = cfg.scan_points;
  const double step = (cfg.hi - cfg.lo) / (n - 1);
  auto obj = [&](double y) { return x * y - f(y); };

  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i < n; ++i) {
    const double v = obj(cfg.lo + i * step);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == n - 1) {
    // slope test: growing outward means the sup escapes the bracket
    const double inner = obj(cfg.lo + (best == 0 ? 1 : n - 2) * step);
    if (best_val > inner) {
      throw UnboundedAboveError(
          "conjugate_numeric: supremum attained at bracket edge");
    }
  }

  // golden-section refinement on the two cells around the scan maximum
  double a = cfg.lo + std::max(best - 1, 0) * step;
  double b = cfg.lo + std::min(best + 1, n - 1) * step;
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = obj(c), fd = obj(d);
  while (b - a > cfg.golden_tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = obj(d);
    }
  }
  return std::max({best_val, fc, fd});
}

double proximal_average_numeric(double lambda, double x) {
  if (lambda == 0.0) return ent(x).value();
  if (lambda == 1.0) return 0.5 * x * x;
  auto g = [lambda](double y) {
    return (1.0 - lambda) * inner_conjugates(y).ent_side +
           lambda * 0.25 * y * y;
  };
  BracketConfig cfg;
  cfg.lo = std::min(cfg.lo, 2.0 * x / lambda - 25.0);
  cfg.hi = std::max(cfg.hi, 2.0 * x / lambda + 25.0);
  return conjugate_numeric(g, x, cfg) - 0.5 * x * x;
}

ExtendedReal f_value(const AverageSpec& spec, double x) {
  if (spec.family == Family::Weighted) {
    if (spec.parameter == 1.0 && spec.endpoint_mode == EndpointMode::Limiting) {
      // limiting case: the positive energy, infinite on negatives
      if (x < 0.0) return ExtendedReal::infinity();
      return 0.5 * x * x;
    }
    return f_t(x, spec.parameter);
  }
  return f_lambda(x, spec.parameter);
}

double fstar_value(const AverageSpec& spec, double x) {
  if (spec.family == Family::Weighted) {
    return f_t_star(x, spec.parameter, spec.endpoint_mode);
  }
  return f_lambda_star(x, spec.parameter);
}

double fstar_prime(const AverageSpec& spec, double x) {
  if (spec.family == Family::Weighted) {
    return f_t_star_prime(x, spec.parameter, spec.endpoint_mode);
  }
  return f_lambda_star_prime(x, spec.parameter);
}

double fstar_second(const AverageSpec& spec, double x) {
  if (spec.family == Family::Weighted) {
    return f_t_star_second(x, spec.parameter, spec.endpoint_mode);
  }
  return f_lambda_star_second(x, spec.parameter);
}

}  // namespace proxent::averages
