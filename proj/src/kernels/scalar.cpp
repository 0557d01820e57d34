#include "proxent/kernels.hpp"
#include "proxent/lambert.hpp"

namespace proxent::kernels::detail {

void omega_batch_scalar(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = lambert::wexp(u[i]);
}

void fstar_prime_batch_scalar(const averages::AverageSpec& spec,
                              const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = averages::fstar_prime(spec, x[i]);
}

void fstar_second_closed_scalar(const averages::AverageSpec& spec,
                                const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = averages::fstar_second(spec, x[i]);
}

}  // namespace proxent::kernels::detail
