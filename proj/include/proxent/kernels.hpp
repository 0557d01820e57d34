#pragma once

#include <cstddef>
#include <span>

#include "proxent/averages.hpp"

namespace proxent::kernels {

/// Batch-kernel backend. Scalar is the reference (loops over the plain
/// scalar functions); Avx2 is the vectorized variant, equivalence-tested
/// against it. Auto picks the best supported one at first use; the
/// PROXENT_SIMD environment variable (scalar|avx2|auto) overrides.
enum class Backend { Auto, Scalar, Avx2 };

/// The backend batch calls will actually use (never Auto).
Backend active_backend();

const char* backend_name(Backend b);

/// Pin the backend; Backend::Auto re-runs detection. Throws
/// std::runtime_error when the requested backend is unsupported here.
void force_backend(Backend b);

/// Elementwise W(e^u).
void omega_batch(std::span<const double> u, std::span<double> out);

/// Elementwise (f^*)' of the given average family.
void fstar_prime_batch(const averages::AverageSpec& spec,
                       std::span<const double> x, std::span<double> out);

/// Elementwise (f^*)''. Weighted family and the endpoints use closed
/// forms; interior proximal parameters difference fstar_prime_batch with
/// the same Richardson stencil as the scalar function.
void fstar_second_batch(const averages::AverageSpec& spec,
                        std::span<const double> x, std::span<double> out);

namespace detail {
void omega_batch_scalar(const double* u, double* out, std::size_t n);
void fstar_prime_batch_scalar(const averages::AverageSpec& spec,
                              const double* x, double* out, std::size_t n);
void fstar_second_closed_scalar(const averages::AverageSpec& spec,
                                const double* x, double* out, std::size_t n);
#if defined(PROXENT_X86_64)
bool avx2_supported();
void omega_batch_avx2(const double* u, double* out, std::size_t n);
void fstar_prime_batch_avx2(const averages::AverageSpec& spec,
                            const double* x, double* out, std::size_t n);
void fstar_second_closed_avx2(const averages::AverageSpec& spec,
                              const double* x, double* out, std::size_t n);
// vector exp/log over 4-lane blocks, exposed for accuracy tests
void exp4(const double* x, double* out, std::size_t n);
void log4(const double* x, double* out, std::size_t n);
#endif
}  // namespace detail

}  // namespace proxent::kernels
