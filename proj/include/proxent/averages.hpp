#pragma once

#include <functional>
#include <stdexcept>
#include <utility>

#include "proxent/extended_real.hpp"

namespace proxent::averages {

enum class Family { Weighted, Proximal };

/// How the parameter-1 endpoint of the weighted family is read: Exact gives
/// the energy / its self-conjugate, Limiting gives the t->1 limits
/// (positive energy; conjugate max(.,0)^2/2; derivative max(.,0)).
enum class EndpointMode { Exact, Limiting };

/// Which homotopy family (weighted t vs proximal lambda) and its parameter.
struct AverageSpec {
  Family family = Family::Proximal;
  double parameter = 0.5;
  EndpointMode endpoint_mode = EndpointMode::Exact;

  void validate() const {
    if (!(parameter >= 0.0 && parameter <= 1.0)) {
      throw std::invalid_argument("AverageSpec: parameter must lie in [0,1]");
    }
  }
};

/// Negative Boltzmann-Shannon entropy: x log x - x on (0,inf), 0 at 0,
/// +inf on (-inf,0).
ExtendedReal ent(double x);

/// Weighted average (1-t) ent + t x^2/2. t = 1 is exactly the energy.
ExtendedReal f_t(double x, double t);

/// Conjugate of f_t. Interior t uses the W closed form; t = 0 gives exp,
/// t = 1 gives y^2/2 (Exact) or max(y,0)^2/2 (Limiting).
double f_t_star(double y, double t, EndpointMode mode = EndpointMode::Exact);
double f_t_star_prime(double y, double t,
                      EndpointMode mode = EndpointMode::Exact);
double f_t_star_second(double y, double t,
                       EndpointMode mode = EndpointMode::Exact);

/// Argmin selector for the inner conjugate behind f_lambda; satisfies
/// x - (1-lambda) W(e^p) - (lambda/2) p = 0. lambda must lie in (0,1).
double prox_phi(double x, double lambda);

/// Proximal average of ent and the energy. Full domain for lambda > 0;
/// lambda = 0 is ent (hence the extended codomain), lambda = 1 the energy.
ExtendedReal f_lambda(double x, double lambda);

/// Argmin selector behind f_lambda_star; satisfies
/// (1-lambda) W(e^p) + (lambda/2 - 1) p + x = 0. lambda in (0,1).
double prox_theta(double x, double lambda);

/// Conjugate of f_lambda: the proximal average of exp and the energy.
double f_lambda_star(double x, double lambda);
double f_lambda_star_prime(double x, double lambda);

/// Second derivative via Richardson-extrapolated central differences of
/// f_lambda_star_prime (closed forms at the endpoints).
double f_lambda_star_second(double x, double lambda);

/// Both closed-form inner conjugates behind the proximal-average
/// construction: (ent + (.)^2/2)^* and (exp + (.)^2/2)^*.
struct InnerConjugates {
  double ent_side;
  double exp_side;
};
InnerConjugates inner_conjugates(double x);

/// Bracket for the brute-force conjugate: coarse scan then golden section.
struct BracketConfig {
  double lo = -50.0;
  double hi = 50.0;
  int scan_points = 20001;
  double golden_tol = 1e-10;
};

/// Thrown when the supremum is attained at the bracket edge with the
/// objective still growing outward.
class UnboundedAboveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brute-force Fenchel conjugate sup_y { x y - f(y) }. Test oracle.
double conjugate_numeric(const std::function<double(double)>& f, double x,
                         BracketConfig cfg = {});

/// Numeric proximal average of (ent, energy): outer conjugate brute-forced,
/// inner conjugates from the closed forms. The ground-truth oracle for
/// f_lambda; widens the bracket for small lambda where the maximizer
/// escapes the default window.
double proximal_average_numeric(double lambda, double x);

// Family dispatch used by the batch kernels, the moment problem and the CLI.
ExtendedReal f_value(const AverageSpec& spec, double x);
double fstar_value(const AverageSpec& spec, double x);
double fstar_prime(const AverageSpec& spec, double x);
double fstar_second(const AverageSpec& spec, double x);

}  // namespace proxent::averages
