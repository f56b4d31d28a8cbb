#include "vibronic/kernels.hpp"

#include <stdexcept>

#include "vibronic/cpu_features.hpp"

namespace vibronic::kern {

void (*zaxpy)(std::size_t, cd, const cd*, cd*) = nullptr;
void (*zaxpby)(std::size_t, cd, const cd*, cd, cd*) = nullptr;
void (*zscal)(std::size_t, cd, cd*) = nullptr;
cd (*zdotc)(std::size_t, const cd*, const cd*) = nullptr;
double (*znrm2sq)(std::size_t, const cd*) = nullptr;
void (*zhad)(std::size_t, const cd*, cd*) = nullptr;
void (*csr_zmv)(std::size_t, const std::int64_t*, const std::int32_t*, const cd*, const cd*,
                cd*) = nullptr;

namespace {

Backend g_active = Backend::Scalar;

void bind_scalar() {
  zaxpy = scalar::zaxpy;
  zaxpby = scalar::zaxpby;
  zscal = scalar::zscal;
  zdotc = scalar::zdotc;
  znrm2sq = scalar::znrm2sq;
  zhad = scalar::zhad;
  csr_zmv = scalar::csr_zmv;
  g_active = Backend::Scalar;
}

void bind_avx2() {
  zaxpy = avx2::zaxpy;
  zaxpby = avx2::zaxpby;
  zscal = avx2::zscal;
  zdotc = avx2::zdotc;
  znrm2sq = avx2::znrm2sq;
  zhad = avx2::zhad;
  csr_zmv = avx2::csr_zmv;
  g_active = Backend::Avx2;
}

const bool g_init = [] {
  if (cpu_has_avx2_fma()) {
    bind_avx2();
  } else {
    bind_scalar();
  }
  return true;
}();

}  // namespace

void select_backend(Backend b) {
  switch (b) {
    case Backend::Auto:
      cpu_has_avx2_fma() ? bind_avx2() : bind_scalar();
      return;
    case Backend::Scalar:
      bind_scalar();
      return;
    case Backend::Avx2:
      if (!cpu_has_avx2_fma()) throw std::runtime_error("AVX2 backend not supported on this CPU");
      bind_avx2();
      return;
  }
  throw std::runtime_error("unknown kernel backend");
}

Backend active_backend() { return g_active; }

const char* backend_name() { return g_active == Backend::Avx2 ? "avx2" : "scalar"; }

}  // namespace vibronic::kern
