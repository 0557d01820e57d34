#include "proxent/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxent::kernels {

namespace {

Backend detect() {
#if defined(PROXENT_X86_64)
  if (detail::avx2_supported()) return Backend::Avx2;
#endif
  return Backend::Scalar;
}

Backend resolve(Backend want) {
  if (want == Backend::Auto) {
    if (const char* e = std::getenv("PROXENT_SIMD")) {
      const std::string s(e);
      if (s == "scalar") return Backend::Scalar;
      if (s == "avx2") {
#if defined(PROXENT_X86_64)
        if (detail::avx2_supported()) return Backend::Avx2;
#endif
        return Backend::Scalar;
      }
    }
    return detect();
  }
  return want;
}

std::atomic<Backend>& state() {
  static std::atomic<Backend> b{resolve(Backend::Auto)};
  return b;
}

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out) {
    throw std::invalid_argument("kernels: input/output spans differ in size");
  }
}

bool has_closed_second(const averages::AverageSpec& spec) {
  return spec.family == averages::Family::Weighted || spec.parameter == 0.0 ||
         spec.parameter == 1.0;
}

}  // namespace

Backend active_backend() { return state().load(); }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Auto: return "auto";
  }
  return "?";
}

void force_backend(Backend b) {
  if (b == Backend::Avx2) {
#if defined(PROXENT_X86_64)
    if (!detail::avx2_supported()) {
      throw std::runtime_error("kernels: AVX2 not supported on this CPU");
    }
#else
    throw std::runtime_error("kernels: AVX2 backend not built on this arch");
#endif
  }
  state().store(resolve(b));
}

void omega_batch(std::span<const double> u, std::span<double> out) {
  check_sizes(u.size(), out.size());
#if defined(PROXENT_X86_64)
  if (active_backend() == Backend::Avx2) {
    detail::omega_batch_avx2(u.data(), out.data(), u.size());
    return;
  }
#endif
  detail::omega_batch_scalar(u.data(), out.data(), u.size());
}

void fstar_prime_batch(const averages::AverageSpec& spec,
                       std::span<const double> x, std::span<double> out) {
  check_sizes(x.size(), out.size());
  spec.validate();
#if defined(PROXENT_X86_64)
  if (active_backend() == Backend::Avx2) {
    detail::fstar_prime_batch_avx2(spec, x.data(), out.data(), x.size());
    return;
  }
#endif
  detail::fstar_prime_batch_scalar(spec, x.data(), out.data(), x.size());
}

void fstar_second_batch(const averages::AverageSpec& spec,
                        std::span<const double> x, std::span<double> out) {
  check_sizes(x.size(), out.size());
  spec.validate();
  if (has_closed_second(spec)) {
#if defined(PROXENT_X86_64)
    if (active_backend() == Backend::Avx2) {
      detail::fstar_second_closed_avx2(spec, x.data(), out.data(), x.size());
      return;
    }
#endif
    detail::fstar_second_closed_scalar(spec, x.data(), out.data(), x.size());
    return;
  }

  // Interior proximal parameter: Richardson stencil on fstar_prime_batch,
  // element-for-element the same arithmetic as f_lambda_star_second.
  const std::size_t n = x.size();
  std::vector<double> h(n), shifted(n), pp(n), pm(n), pph(n), pmh(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = 1e-5 * std::max(1.0, std::abs(x[i]));
  }
  for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] + h[i];
  fstar_prime_batch(spec, shifted, pp);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] - h[i];
  fstar_prime_batch(spec, shifted, pm);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] + 0.5 * h[i];
  fstar_prime_batch(spec, shifted, pph);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] - 0.5 * h[i];
  fstar_prime_batch(spec, shifted, pmh);
  for (std::size_t i = 0; i < n; ++i) {
    const double d1 = (pp[i] - pm[i]) / (2.0 * h[i]);
    const double d2 = (pph[i] - pmh[i]) / h[i];
    out[i] = (4.0 * d2 - d1) / 3.0;
  }
}

}  // namespace proxent::kernels
