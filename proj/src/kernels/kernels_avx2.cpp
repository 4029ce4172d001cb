// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "hidegl/kernels.hpp"

namespace hidegl::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(t0, t0, acc0);
    acc1 = _mm256_fmadd_pd(t1, t1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(t0, t0, acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four centers per pass so each load of x is reused four times.
void distances_to_columns_avx2(const double* x, const double* c, std::size_t d, std::size_t k,
                               double* out) {
  std::size_t j = 0;
  for (; j + 4 <= k; j += 4) {
    const double* c0 = c + j * d;
    const double* c1 = c0 + d;
    const double* c2 = c1 + d;
    const double* c3 = c2 + d;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= d; i += 4) {
      const __m256d xv = _mm256_loadu_pd(x + i);
      const __m256d t0 = _mm256_sub_pd(xv, _mm256_loadu_pd(c0 + i));
      const __m256d t1 = _mm256_sub_pd(xv, _mm256_loadu_pd(c1 + i));
      const __m256d t2 = _mm256_sub_pd(xv, _mm256_loadu_pd(c2 + i));
      const __m256d t3 = _mm256_sub_pd(xv, _mm256_loadu_pd(c3 + i));
      a0 = _mm256_fmadd_pd(t0, t0, a0);
      a1 = _mm256_fmadd_pd(t1, t1, a1);
      a2 = _mm256_fmadd_pd(t2, t2, a2);
      a3 = _mm256_fmadd_pd(t3, t3, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; i < d; ++i) {
      const double t0 = x[i] - c0[i], t1 = x[i] - c1[i], t2 = x[i] - c2[i], t3 = x[i] - c3[i];
      s0 += t0 * t0;
      s1 += t1 * t1;
      s2 += t2 * t2;
      s3 += t3 * t3;
    }
    out[j] = s0;
    out[j + 1] = s1;
    out[j + 2] = s2;
    out[j + 3] = s3;
  }
  for (; j < k; ++j) out[j] = squared_distance_avx2(x, c + j * d, d);
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::avx2, &dot_avx2, &squared_distance_avx2, &axpy_avx2,
                             &distances_to_columns_avx2};
}  // namespace detail

}  // namespace hidegl::kernels
