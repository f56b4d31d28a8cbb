#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>

// Data-parallel inner loops shared by the superoperator application, the
// Krylov solver and the propagator. Each kernel has a scalar reference
// implementation and an AVX2 variant; the dispatcher selects one at startup
// (or on request) and exposes it through function pointers.

namespace vibronic::kern {

using cd = std::complex<double>;

namespace scalar {
void zaxpy(std::size_t n, cd a, const cd* x, cd* y);                 // y += a*x
void zaxpby(std::size_t n, cd a, const cd* x, cd b, cd* y);          // y = a*x + b*y
void zscal(std::size_t n, cd a, cd* x);
cd zdotc(std::size_t n, const cd* x, const cd* y);                   // sum conj(x)*y
double znrm2sq(std::size_t n, const cd* x);
void zhad(std::size_t n, const cd* x, cd* y);                        // y_i *= x_i
void csr_zmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
             const cd* val, const cd* x, cd* y);                     // y = A*x
}  // namespace scalar

namespace avx2 {
void zaxpy(std::size_t n, cd a, const cd* x, cd* y);
void zaxpby(std::size_t n, cd a, const cd* x, cd b, cd* y);
void zscal(std::size_t n, cd a, cd* x);
cd zdotc(std::size_t n, const cd* x, const cd* y);
double znrm2sq(std::size_t n, const cd* x);
void zhad(std::size_t n, const cd* x, cd* y);
void csr_zmv(std::size_t rows, const std::int64_t* row_ptr, const std::int32_t* col,
             const cd* val, const cd* x, cd* y);
}  // namespace avx2

enum class Backend { Auto, Scalar, Avx2 };

// Selects the kernel backend. Auto picks AVX2 when the CPU supports it.
// Throws std::runtime_error when an unsupported backend is forced.
void select_backend(Backend b);
Backend active_backend();
const char* backend_name();

extern void (*zaxpy)(std::size_t, cd, const cd*, cd*);
extern void (*zaxpby)(std::size_t, cd, const cd*, cd, cd*);
extern void (*zscal)(std::size_t, cd, cd*);
extern cd (*zdotc)(std::size_t, const cd*, const cd*);
extern double (*znrm2sq)(std::size_t, const cd*);
extern void (*zhad)(std::size_t, const cd*, cd*);
extern void (*csr_zmv)(std::size_t, const std::int64_t*, const std::int32_t*, const cd*,
                       const cd*, cd*);

}  // namespace vibronic::kern
