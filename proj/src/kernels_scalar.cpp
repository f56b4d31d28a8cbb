#include "vibronic/kernels.hpp"

namespace vibronic::kern::scalar {

void zaxpy(std::size_t n, cd a, const cd* x, cd* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void zaxpby(std::size_t n, cd a, const cd* x, cd b, cd* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void zscal(std::size_t n, cd a, cd* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

cd zdotc(std::size_t n, const cd* x, const cd* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cd v = std::conj(x[i]) * y[i];
    re += v.real();
    im += v.imag();
  }
  return {re, im};
}

double znrm2sq(std::size_t n, const cd* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void zhad(std::size_t n, const cd* x, cd* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

void csr_zmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
             const cd* val, const cd* x, cd* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    cd acc{0.0, 0.0};
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
    y[r] = acc;
  }
}

}  // namespace vibronic::kern::scalar
