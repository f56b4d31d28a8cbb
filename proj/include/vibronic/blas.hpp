#pragma once

#include <complex>
#include <cstdint>

namespace vibronic::blas {

using cd = std::complex<double>;

void set_threads(int n);

// C = alpha * op(A) * op(B) + beta * C, col-major; op is 'N', 'T' or 'C'.
void zgemm(char op_a, char op_b, std::int64_t m, std::int64_t n, std::int64_t k, cd alpha,
           const cd* a, std::int64_t lda, const cd* b, std::int64_t ldb, cd beta, cd* c,
           std::int64_t ldc);

// Hermitian eigendecomposition, col-major input. On return `a` holds the
// eigenvectors (columns) and `w` the ascending eigenvalues.
void heev(std::int64_t n, cd* a, std::int64_t lda, double* w);

}  // namespace vibronic::blas
