#include <immintrin.h>

#include "frailty_vb/kernels.hpp"
#include "frailty_vb/piecewise.hpp"

namespace frailty_vb {

namespace {

// Lanes reduced as (l0 + l1) + (l2 + l3), then the scalar tail.
inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void residuals(const double* y, const double* design, std::size_t n, std::size_t p, const double* mu, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(y + j);
    for (std::size_t k = 0; k < p; ++k) {
      const __m256d x = _mm256_loadu_pd(design + k * n + j);
      acc = _mm256_sub_pd(acc, _mm256_mul_pd(x, _mm256_set1_pd(mu[k])));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double v = y[j];
    for (std::size_t k = 0; k < p; ++k) v -= design[k * n + j] * mu[k];
    out[j] = v;
  }
}

template <std::size_t B>
inline __m256d lookup(__m256d z, const std::array<double, B>& breaks, const std::array<double, B + 1>& values) {
  __m256d v = _mm256_set1_pd(values[0]);
  for (std::size_t k = 0; k < B; ++k) {
    const __m256d above = _mm256_cmp_pd(z, _mm256_set1_pd(breaks[k]), _CMP_GT_OQ);
    v = _mm256_blendv_pd(v, _mm256_set1_pd(values[k + 1]), above);
  }
  return v;
}

void piecewise(const double* r, std::size_t n, double scale, const ApproximationTable& t, double* rho, double* zeta,
               double* phi) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d z = _mm256_mul_pd(_mm256_loadu_pd(r + j), s);
    _mm256_storeu_pd(rho + j, lookup(z, t.quad_breaks, t.rho));
    _mm256_storeu_pd(zeta + j, lookup(z, t.quad_breaks, t.zeta));
    _mm256_storeu_pd(phi + j, lookup(z, t.lin_breaks, t.phi));
  }
  if (j < n) scalar_kernels().piecewise(r + j, n - j, scale, t, rho + j, zeta + j, phi + j);
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + j));
  double s = hsum(acc);
  for (; j < n; ++j) s += a[j];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
  double s = hsum(acc);
  for (; j < n; ++j) s += a[j] * b[j];
  return s;
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(a + j));
    acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + j), acc);
  }
  double s = hsum(acc);
  for (; j < n; ++j) s += w[j] * a[j] * b[j];
  return s;
}

}  // namespace

const KernelSet& avx2_kernel_table() {
  static const KernelSet k{"avx2", residuals, piecewise, sum, dot, weighted_dot};
  return k;
}

}  // namespace frailty_vb
