#include "vibronic/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace vibronic::kern::avx2 {

namespace {

// Two complex doubles per vector, interleaved [re0 im0 re1 im1].
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

inline __m256d broadcast(cd a) { return _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag()); }

inline cd reduce_c(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  alignas(16) double out[2];
  _mm_store_pd(out, s);
  return {out[0], out[1]};
}

const __m256d kConjMask = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);

}  // namespace

void zaxpy(std::size_t n, cd a, const cd* x, cd* y) {
  const __m256d av = broadcast(a);
  std::size_t i = 0;
  const auto* xp = reinterpret_cast<const double*>(x);
  auto* yp = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(yv, cmul(av, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void zaxpby(std::size_t n, cd a, const cd* x, cd b, cd* y) {
  const __m256d av = broadcast(a);
  const __m256d bv = broadcast(b);
  std::size_t i = 0;
  const auto* xp = reinterpret_cast<const double*>(x);
  auto* yp = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(cmul(av, xv), cmul(bv, yv)));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void zscal(std::size_t n, cd a, cd* x) {
  const __m256d av = broadcast(a);
  std::size_t i = 0;
  auto* xp = reinterpret_cast<double*>(x);
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(xp + 2 * i, cmul(av, _mm256_loadu_pd(xp + 2 * i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

cd zdotc(std::size_t n, const cd* x, const cd* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  const auto* xp = reinterpret_cast<const double*>(x);
  const auto* yp = reinterpret_cast<const double*>(y);
  for (; i + 4 <= n; i += 4) {
    const __m256d xv0 = _mm256_xor_pd(_mm256_loadu_pd(xp + 2 * i), kConjMask);
    const __m256d xv1 = _mm256_xor_pd(_mm256_loadu_pd(xp + 2 * i + 4), kConjMask);
    acc0 = _mm256_add_pd(acc0, cmul(xv0, _mm256_loadu_pd(yp + 2 * i)));
    acc1 = _mm256_add_pd(acc1, cmul(xv1, _mm256_loadu_pd(yp + 2 * i + 4)));
  }
  cd s = reduce_c(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double znrm2sq(std::size_t n, const cd* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const auto* xp = reinterpret_cast<const double*>(x);
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(xp + 2 * i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  const cd partial = reduce_c(acc);
  double s = partial.real() + partial.imag();
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void zhad(std::size_t n, const cd* x, cd* y) {
  std::size_t i = 0;
  const auto* xp = reinterpret_cast<const double*>(x);
  auto* yp = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, cmul(xv, yv));
  }
  for (; i < n; ++i) y[i] *= x[i];
}

void csr_zmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
             const cd* val, const cd* x, cd* y) {
  const auto* vp = reinterpret_cast<const double*>(val);
  const auto* xp = reinterpret_cast<const double*>(x);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int64_t begin = row_ptr[r], end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    std::int64_t k = begin;
    for (; k + 2 <= end; k += 2) {
      const __m256d vv = _mm256_loadu_pd(vp + 2 * k);
      const __m128d x0 = _mm_loadu_pd(xp + 2 * static_cast<std::int64_t>(col[k]));
      const __m128d x1 = _mm_loadu_pd(xp + 2 * static_cast<std::int64_t>(col[k + 1]));
      const __m256d xv = _mm256_set_m128d(x1, x0);
      acc = _mm256_add_pd(acc, cmul(vv, xv));
    }
    cd s = reduce_c(acc);
    for (; k < end; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

}  // namespace vibronic::kern::avx2

#else  // non-x86: AVX2 entry points fall back to the scalar kernels.

namespace vibronic::kern::avx2 {

void zaxpy(std::size_t n, cd a, const cd* x, cd* y) { scalar::zaxpy(n, a, x, y); }
void zaxpby(std::size_t n, cd a, const cd* x, cd b, cd* y) { scalar::zaxpby(n, a, x, b, y); }
void zscal(std::size_t n, cd a, cd* x) { scalar::zscal(n, a, x); }
cd zdotc(std::size_t n, const cd* x, const cd* y) { return scalar::zdotc(n, x, y); }
double znrm2sq(std::size_t n, const cd* x) { return scalar::znrm2sq(n, x); }
void zhad(std::size_t n, const cd* x, cd* y) { scalar::zhad(n, x, y); }
void csr_zmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
             const cd* val, const cd* x, cd* y) {
  scalar::csr_zmv(rows, row_ptr, col, val, x, y);
}

}  // namespace vibronic::kern::avx2

#endif
