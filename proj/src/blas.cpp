#include "vibronic/blas.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <stdexcept>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace vibronic::blas {

void set_threads(int n) { openblas_set_num_threads(n > 0 ? n : 1); }

namespace {

CBLAS_TRANSPOSE to_trans(char op) {
  switch (op) {
    case 'N':
      return CblasNoTrans;
    case 'T':
      return CblasTrans;
    case 'C':
      return CblasConjTrans;
    default:
      throw std::invalid_argument("zgemm: bad op");
  }
}

}  // namespace

void zgemm(char op_a, char op_b, std::int64_t m, std::int64_t n, std::int64_t k, cd alpha,
           const cd* a, std::int64_t lda, const cd* b, std::int64_t ldb, cd beta, cd* c,
           std::int64_t ldc) {
  cblas_zgemm(CblasColMajor, to_trans(op_a), to_trans(op_b), static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &alpha, a, static_cast<int>(lda), b,
              static_cast<int>(ldb), &beta, c, static_cast<int>(ldc));
}

void heev(std::int64_t n, cd* a, std::int64_t lda, double* w) {
  const int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<int>(n),
                     reinterpret_cast<lapack_complex_double*>(a), static_cast<int>(lda), w);
  if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
}

}  // namespace vibronic::blas
