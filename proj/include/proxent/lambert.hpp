#pragma once

namespace proxent::lambert {

/// -1/e, the left end of the real domain of the principal branch.
inline constexpr double kBranchPoint = -0.36787944117144233;

/// Above this argument wexp switches from w0(exp(u)) to solving
/// w + log w = u directly, so no e^u is ever materialized.
inline constexpr double kUSafe = 36.0;

/// Principal-branch Lambert W: the inverse of w -> w e^w on [-1/e, inf).
/// Halley iteration with a piecewise initial guess; stops when
/// |w e^w - x| <= 1e-15 max(1,|x|). Throws std::domain_error for x < -1/e.
double w0(double x);

/// W(e^u) for any finite u. Stable in log domain: large u never forms e^u.
double wexp(double u);

/// W(c e^u) = wexp(u + log c). Throws std::domain_error for c <= 0.
double wexp_scaled(double c, double u);

/// n-th derivative of W at x > -1/e, via e^{-nW} p_n(W) / (1+W)^{2n-1}
/// with the polynomial recurrence p_{n+1} = -(nw+3n-1) p_n + (1+w) p_n'.
double w0_derivative(double x, int n);

/// Antiderivative (W^2 - W + 1) e^W, normalized so the value at 0 is 1.
double w0_antiderivative(double x);

namespace detail {
// The two wexp evaluation paths, exposed so the splice at kUSafe can be
// checked directly.
double wexp_below(double u);
double wexp_above(double u);
}  // namespace detail

}  // namespace proxent::lambert
