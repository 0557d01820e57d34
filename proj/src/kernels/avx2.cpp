// AVX2 variants of the batch kernels. Built only on x86_64 and compiled
// with -mavx2 -mfma; selected at runtime after a cpuid check. The scalar
// kernels are the reference; equivalence is covered in tests/.
#include "proxent/kernels.hpp"

#if defined(PROXENT_X86_64)

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <limits>

namespace proxent::kernels::detail {

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline __m256d blend(__m256d a, __m256d b, __m256d mask) {
  // mask lanes all-ones select b
  return _mm256_blendv_pd(a, b, mask);
}

// 2^k for integer-valued k (as doubles) with |k| <= 1023.
inline __m256d pow2i(__m256d k) {
  const __m128i i32 = _mm256_cvtpd_epi32(k);
  const __m256i i64 = _mm256_cvtepi32_epi64(i32);
  const __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(i64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_castsi256_pd(bits);
}

// v * 2^n, n split in two so subnormal results scale without the
// combined factor underflowing first.
inline __m256d scale2i(__m256d v, __m256d n) {
  const __m256d half = _mm256_round_pd(
      _mm256_mul_pd(n, set1(0.5)), _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
  const __m256d rest = _mm256_sub_pd(n, half);
  return _mm256_mul_pd(_mm256_mul_pd(v, pow2i(half)), pow2i(rest));
}

// Cephes-style e^x: range reduction by log 2, Pade approximation on the
// remainder, reassembly by 2^n. Clamps to 0 / inf outside the finite range.
inline __m256d exp_pd(__m256d x) {
  const __m256d max_log = set1(709.782712893383996843);
  const __m256d min_log = set1(-745.2);  // below even subnormals vanish
  const __m256d over = _mm256_cmp_pd(x, max_log, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, min_log, _CMP_LT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_log), max_log);

  const __m256d n = _mm256_round_pd(
      _mm256_fmadd_pd(xc, set1(1.4426950408889634073599), set1(0.5)),
      _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93145751953125e-1), xc);
  r = _mm256_fnmadd_pd(n, set1(1.42860682030941723212e-6), r);

  const __m256d z = _mm256_mul_pd(r, r);
  __m256d p = set1(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, z, set1(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, z, set1(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = set1(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, z, set1(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, z, set1(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, z, set1(2.00000000000000000005e0));
  const __m256d e =
      _mm256_fmadd_pd(set1(2.0), _mm256_div_pd(p, _mm256_sub_pd(q, p)),
                      set1(1.0));

  __m256d out = scale2i(e, n);
  out = blend(out, set1(std::numeric_limits<double>::infinity()), over);
  out = blend(out, _mm256_setzero_pd(), under);
  return blend(out, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));  // NaN through
}

// Cephes-style log x for x > 0 (finite); 0 -> -inf, negatives/NaN -> NaN.
inline __m256d log_pd(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d nonpos = _mm256_cmp_pd(x, zero, _CMP_LE_OQ);
  const __m256d iszero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d isinf =
      _mm256_cmp_pd(x, set1(std::numeric_limits<double>::infinity()),
                    _CMP_EQ_OQ);

  // scale subnormals into the normal range
  const __m256d tiny = _mm256_cmp_pd(x, set1(2.2250738585072014e-308),
                                     _CMP_LT_OQ);
  __m256d xs = blend(x, _mm256_mul_pd(x, set1(0x1p54)), tiny);
  __m256d ebias = blend(zero, set1(54.0), tiny);

  // frexp: mantissa in [0.5, 1), exponent
  const __m256i bits = _mm256_castpd_si256(xs);
  const __m256i expo_i =
      _mm256_srli_epi64(_mm256_and_si256(bits, _mm256_set1_epi64x(
                                                   0x7FF0000000000000LL)),
                        52);
  // int64 -> double via the 2^52 trick (exponents are small positive ints)
  const __m256d expo_d = _mm256_sub_pd(
      _mm256_castsi256_pd(
          _mm256_or_si256(expo_i, _mm256_castpd_si256(set1(0x1p52)))),
      set1(0x1p52));
  __m256d e = _mm256_sub_pd(_mm256_sub_pd(expo_d, set1(1022.0)), ebias);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
      _mm256_set1_epi64x(0x3FE0000000000000LL)));

  const __m256d below = _mm256_cmp_pd(m, set1(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, set1(1.0)));
  m = blend(_mm256_sub_pd(m, set1(1.0)),
            _mm256_sub_pd(_mm256_add_pd(m, m), set1(1.0)), below);

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d p = set1(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, m, set1(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, m, set1(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, m, set1(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, m, set1(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, m, set1(7.70838733755885391666e0));
  __m256d q = _mm256_add_pd(m, set1(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, m, set1(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, m, set1(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, m, set1(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, m, set1(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(m, z), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, set1(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(set1(0.5), z, y);
  __m256d out = _mm256_add_pd(m, y);
  out = _mm256_fmadd_pd(e, set1(0.693359375), out);

  out = blend(out, set1(std::numeric_limits<double>::quiet_NaN()), nonpos);
  out = blend(out, set1(-std::numeric_limits<double>::infinity()), iszero);
  out = blend(out, set1(std::numeric_limits<double>::infinity()), isinf);
  return blend(out, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
}

// W(e^u): piecewise initial guess, then Halley on f(w) = w + log w - u.
inline __m256d omega_pd(__m256d u) {
  const __m256d lo = _mm256_cmp_pd(u, set1(-2.0), _CMP_LE_OQ);
  const __m256d hi = _mm256_cmp_pd(u, set1(30.0), _CMP_GT_OQ);
  const __m256d deep = _mm256_cmp_pd(u, set1(-708.0), _CMP_LE_OQ);

  // series in z = e^u for the far-left lanes
  const __m256d z = exp_pd(_mm256_min_pd(u, set1(-2.0)));
  const __m256d w_lo = _mm256_mul_pd(
      z, _mm256_fmadd_pd(_mm256_mul_pd(set1(1.5), z), z,
                         _mm256_sub_pd(set1(1.0), z)));

  // middle: log(1 + e^u)
  const __m256d t =
      exp_pd(_mm256_min_pd(_mm256_max_pd(u, set1(-2.0)), set1(30.0)));
  const __m256d w_mid = log_pd(_mm256_add_pd(set1(1.0), t));

  // right: u - log u + log u / u
  const __m256d um = _mm256_max_pd(u, set1(2.0));
  const __m256d lu = log_pd(um);
  const __m256d w_hi =
      _mm256_add_pd(_mm256_sub_pd(um, lu), _mm256_div_pd(lu, um));

  __m256d w = blend(blend(w_mid, w_hi, hi), w_lo, lo);
  w = _mm256_max_pd(w, set1(2.2250738585072014e-308));

  for (int i = 0; i < 4; ++i) {
    const __m256d f =
        _mm256_add_pd(_mm256_sub_pd(w, u), log_pd(w));
    const __m256d wp1 = _mm256_add_pd(w, set1(1.0));
    const __m256d num =
        _mm256_mul_pd(_mm256_mul_pd(set1(2.0), f), _mm256_mul_pd(w, wp1));
    const __m256d den =
        _mm256_fmadd_pd(_mm256_mul_pd(set1(2.0), wp1), wp1, f);
    w = _mm256_sub_pd(w, _mm256_div_pd(num, den));
  }

  // below e^-708 the value itself is (sub)normal e^u; no iteration needed
  w = blend(w, z, deep);
  return blend(w, u, _mm256_cmp_pd(u, u, _CMP_UNORD_Q));
}

// run a 4-lane kernel over an arbitrary-length array, padding the tail
template <typename F>
inline void run_blocks(const double* x, double* out, std::size_t n, F&& f) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, f(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, x + i, (n - i) * sizeof(double));
    _mm256_store_pd(buf, f(_mm256_load_pd(buf)));
    std::memcpy(out + i, buf, (n - i) * sizeof(double));
  }
}

struct ProximalConsts {
  __m256d two_minus_l, log_c, k5, k1, k2, k3, k4, one;
};

inline __m256d proximal_prime(__m256d x, const ProximalConsts& c) {
  // mirror the scalar operation order: u = 2x/(2-lambda), arg = u + log c
  const __m256d u =
      _mm256_div_pd(_mm256_add_pd(x, x), c.two_minus_l);
  const __m256d om = omega_pd(_mm256_add_pd(u, c.log_c));
  const __m256d b = _mm256_fmadd_pd(c.k5, om, u);
  const __m256d big = omega_pd(b);
  // (1/(1+om)) (k1 (om - k2) big - k3 om^2 + k4 x om + k4 x)
  __m256d acc =
      _mm256_mul_pd(_mm256_mul_pd(c.k1, _mm256_sub_pd(om, c.k2)), big);
  acc = _mm256_fnmadd_pd(_mm256_mul_pd(c.k3, om), om, acc);
  const __m256d k4x = _mm256_mul_pd(c.k4, x);
  acc = _mm256_fmadd_pd(k4x, om, acc);
  acc = _mm256_add_pd(acc, k4x);
  return _mm256_div_pd(acc, _mm256_add_pd(c.one, om));
}

}  // namespace

void exp4(const double* x, double* out, std::size_t n) {
  run_blocks(x, out, n, [](__m256d v) { return exp_pd(v); });
}

void log4(const double* x, double* out, std::size_t n) {
  run_blocks(x, out, n, [](__m256d v) { return log_pd(v); });
}

void omega_batch_avx2(const double* u, double* out, std::size_t n) {
  run_blocks(u, out, n, [](__m256d v) { return omega_pd(v); });
}

void fstar_prime_batch_avx2(const averages::AverageSpec& spec, const double* x,
                            double* out, std::size_t n) {
  using averages::EndpointMode;
  using averages::Family;
  const double p = spec.parameter;

  if (p == 0.0) {
    run_blocks(x, out, n, [](__m256d v) { return exp_pd(v); });
    return;
  }
  if (p == 1.0) {
    if (spec.family == Family::Weighted &&
        spec.endpoint_mode == EndpointMode::Limiting) {
      run_blocks(x, out, n, [](__m256d v) {
        return _mm256_max_pd(v, _mm256_setzero_pd());
      });
    } else {
      std::memcpy(out, x, n * sizeof(double));
    }
    return;
  }

  if (spec.family == Family::Weighted) {
    const __m256d one_minus_t = set1(1.0 - p);
    const __m256d log_c = set1(std::log(p / (1.0 - p)));
    const __m256d scale = set1((1.0 - p) / p);
    run_blocks(x, out, n, [&](__m256d v) {
      const __m256d w =
          omega_pd(_mm256_add_pd(_mm256_div_pd(v, one_minus_t), log_c));
      return _mm256_mul_pd(scale, w);
    });
    return;
  }

  ProximalConsts c;
  c.two_minus_l = set1(2.0 - p);
  c.log_c = set1(std::log(p / (2.0 - p)));
  c.k5 = set1(2.0 / p - 2.0);
  c.k1 = set1(2.0 * (1.0 - p) / p);
  c.k2 = set1(p / (p - 2.0));
  c.k3 = set1(4.0 * (p - 1.0) * (p - 1.0) / (p * p));
  c.k4 = set1(p / (2.0 - p));
  c.one = set1(1.0);
  run_blocks(x, out, n, [&](__m256d v) { return proximal_prime(v, c); });
}

void fstar_second_closed_avx2(const averages::AverageSpec& spec,
                              const double* x, double* out, std::size_t n) {
  using averages::EndpointMode;
  using averages::Family;
  const double p = spec.parameter;

  if (p == 0.0) {
    run_blocks(x, out, n, [](__m256d v) { return exp_pd(v); });
    return;
  }
  if (p == 1.0) {
    if (spec.family == Family::Weighted &&
        spec.endpoint_mode == EndpointMode::Limiting) {
      run_blocks(x, out, n, [](__m256d v) {
        const __m256d pos = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_GT_OQ);
        return _mm256_and_pd(pos, set1(1.0));
      });
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = 1.0;
    }
    return;
  }

  // weighted interior: (1/t) w/(1+w)
  const __m256d one_minus_t = set1(1.0 - p);
  const __m256d log_c = set1(std::log(p / (1.0 - p)));
  const __m256d inv_t = set1(1.0 / p);
  run_blocks(x, out, n, [&](__m256d v) {
    const __m256d w =
        omega_pd(_mm256_add_pd(_mm256_div_pd(v, one_minus_t), log_c));
    return _mm256_div_pd(_mm256_mul_pd(inv_t, w),
                         _mm256_add_pd(set1(1.0), w));
  });
}

}  // namespace proxent::kernels::detail

#endif  // PROXENT_X86_64
