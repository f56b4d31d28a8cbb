#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vibronic/cpu_features.hpp"
#include "vibronic/kernels.hpp"

using namespace vibronic;
using kern::cd;

namespace {

std::vector<cd> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> v(n);
  for (auto& x : v) x = {u(rng), u(rng)};
  return v;
}

double rel_err(cd a, cd b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scalar and avx2 vector kernels agree on random data") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {0ul, 1ul, 2ul, 3ul, 5ul, 64ul, 1001ul}) {
    const auto x = random_vec(n, rng);
    const cd a{0.37, -1.2}, b{-0.8, 0.45};

    auto y1 = random_vec(n, rng);
    auto y2 = y1;
    kern::scalar::zaxpy(n, a, x.data(), y1.data());
    kern::avx2::zaxpy(n, a, x.data(), y2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y2[i], y1[i]) < 1e-14);

    y2 = y1;
    kern::scalar::zaxpby(n, a, x.data(), b, y1.data());
    kern::avx2::zaxpby(n, a, x.data(), b, y2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y2[i], y1[i]) < 1e-14);

    auto z1 = x, z2 = x;
    kern::scalar::zscal(n, b, z1.data());
    kern::avx2::zscal(n, b, z2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(z2[i], z1[i]) < 1e-14);

    auto h1 = y1, h2 = y1;
    kern::scalar::zhad(n, x.data(), h1.data());
    kern::avx2::zhad(n, x.data(), h2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(h2[i], h1[i]) < 1e-14);

    const cd d1 = kern::scalar::zdotc(n, x.data(), y1.data());
    const cd d2 = kern::avx2::zdotc(n, x.data(), y1.data());
    CHECK(std::abs(d1 - d2) < 1e-12 * std::max(1.0, std::abs(d1)));

    const double n1 = kern::scalar::znrm2sq(n, x.data());
    const double n2 = kern::avx2::znrm2sq(n, x.data());
    CHECK(n1 == doctest::Approx(n2).epsilon(1e-13));
  }
}

TEST_CASE("csr matvec variants agree against a dense reference") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t rows = 37, cols = 29;
  // build a random sparse matrix in CSR form directly
  std::vector<std::int64_t> rp{0};
  std::vector<std::int32_t> ci;
  std::vector<cd> val;
  std::vector<cd> dense(rows * cols, cd{0.0, 0.0});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (u(rng) > 0.4) continue;
      ci.push_back(static_cast<std::int32_t>(c));
      const cd v{u(rng), u(rng)};
      val.push_back(v);
      dense[r * cols + c] = v;
    }
    rp.push_back(static_cast<std::int64_t>(ci.size()));
  }
  const auto x = random_vec(cols, rng);
  std::vector<cd> ref(rows, cd{0.0, 0.0});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) ref[r] += dense[r * cols + c] * x[c];

  std::vector<cd> y1(rows), y2(rows);
  kern::scalar::csr_zmv(rows, rp.data(), ci.data(), val.data(), x.data(), y1.data());
  kern::avx2::csr_zmv(rows, rp.data(), ci.data(), val.data(), x.data(), y2.data());
  for (std::size_t r = 0; r < rows; ++r) {
    CHECK(std::abs(y1[r] - ref[r]) < 1e-13);
    CHECK(std::abs(y2[r] - ref[r]) < 1e-13);
  }
}

TEST_CASE("backend selection") {
  kern::select_backend(kern::Backend::Scalar);
  CHECK(kern::active_backend() == kern::Backend::Scalar);
  CHECK(std::string(kern::backend_name()) == "scalar");
  if (cpu_has_avx2_fma()) {
    kern::select_backend(kern::Backend::Avx2);
    CHECK(std::string(kern::backend_name()) == "avx2");
  }
  kern::select_backend(kern::Backend::Auto);
  if (cpu_has_avx2_fma()) CHECK(kern::active_backend() == kern::Backend::Avx2);
}
