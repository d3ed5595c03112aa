// AVX2 variants of the reduction kernels. Compiled with -mavx2 -mfma; only
// reached after the runtime CPU check in the dispatcher.

#include "forge/vecops.hpp"

#include <immintrin.h>

namespace forge::vecops::avx2 {

namespace {

inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

double sum(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + i));
  }
  double out = hsum256(acc);
  for (; i < n; ++i) out += v[i];
  return out;
}

double sum_sq_dev(const double* v, std::size_t n, double mean) {
  const __m256d m = _mm256_set1_pd(mean);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i), m);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double out = hsum256(acc);
  for (; i < n; ++i) {
    const double d = v[i] - mean;
    out += d * d;
  }
  return out;
}

}  // namespace forge::vecops::avx2
