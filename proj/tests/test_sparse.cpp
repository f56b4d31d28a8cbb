#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vibronic/sparse.hpp"

using namespace vibronic;

namespace {

CsrMatrix random_csr(std::int64_t rows, std::int64_t cols, double fill, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CooBuilder b(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c)
      if (u(rng) < 2.0 * fill - 1.0) b.add(r, c, {u(rng), u(rng)});
  return b.build();
}

}  // namespace

TEST_CASE("builder combines duplicates and drops small entries") {
  CooBuilder b(2, 2);
  b.add(0, 0, {1.0, 0.0});
  b.add(0, 0, {2.0, 0.0});
  b.add(1, 0, {1e-20, 0.0});
  const CsrMatrix m = b.build(1e-15);
  CHECK(m.nnz() == 1);
  CHECK(m.val[0] == cd{3.0, 0.0});
}

TEST_CASE("kron against dense reference") {
  std::mt19937_64 rng(3);
  const CsrMatrix a = random_csr(4, 3, 0.6, rng);
  const CsrMatrix b = random_csr(2, 5, 0.7, rng);
  const CsrMatrix k = kron(a, b);
  REQUIRE(k.rows == 8);
  REQUIRE(k.cols == 15);
  const auto ad = a.to_dense(), bd = b.to_dense(), kd = k.to_dense();
  for (std::int64_t i = 0; i < 8; ++i) {
    for (std::int64_t j = 0; j < 15; ++j) {
      const cd expect = ad[(i / 2) + (j / 5) * 4] * bd[(i % 2) + (j % 5) * 2];
      CHECK(std::abs(kd[i + j * 8] - expect) < 1e-14);
    }
  }
}

TEST_CASE("matmul, dagger, add agree with dense algebra") {
  std::mt19937_64 rng(5);
  const CsrMatrix a = random_csr(6, 4, 0.5, rng);
  const CsrMatrix b = random_csr(4, 7, 0.5, rng);
  const CsrMatrix ab = matmul(a, b);
  const auto ad = a.to_dense(), bd = b.to_dense(), abd = ab.to_dense();
  for (std::int64_t i = 0; i < 6; ++i) {
    for (std::int64_t j = 0; j < 7; ++j) {
      cd ref{0.0, 0.0};
      for (std::int64_t k = 0; k < 4; ++k) ref += ad[i + k * 6] * bd[k + j * 4];
      CHECK(std::abs(abd[i + j * 6] - ref) < 1e-13);
    }
  }
  const CsrMatrix adag = a.dagger();
  const auto add_ = adag.to_dense();
  for (std::int64_t i = 0; i < 4; ++i)
    for (std::int64_t j = 0; j < 6; ++j)
      CHECK(add_[i + j * 4] == std::conj(ad[j + i * 6]));

  const CsrMatrix s = add(a, {2.0, 0.0}, a, {0.0, 1.0});
  const auto sd = s.to_dense();
  for (std::size_t i = 0; i < sd.size(); ++i)
    CHECK(std::abs(sd[i] - (cd{2.0, 1.0}) * ad[i]) < 1e-14);
}

TEST_CASE("dense products mm_left / mm_right") {
  std::mt19937_64 rng(9);
  const std::int64_t n = 5, k = 6;
  const CsrMatrix a = random_csr(n, n, 0.5, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> x(n * k);
  for (auto& v : x) v = {u(rng), u(rng)};
  const auto ad = a.to_dense();

  std::vector<cd> y(n * k);
  a.mm_left(x.data(), y.data(), k);
  for (std::int64_t j = 0; j < k; ++j) {
    for (std::int64_t i = 0; i < n; ++i) {
      cd ref{0.0, 0.0};
      for (std::int64_t p = 0; p < n; ++p) ref += ad[i + p * n] * x[p + j * n];
      CHECK(std::abs(y[i + j * n] - ref) < 1e-13);
    }
  }

  std::vector<cd> x2(k * n);
  for (auto& v : x2) v = {u(rng), u(rng)};
  std::vector<cd> y2(k * n);
  a.mm_right(x2.data(), y2.data(), k);
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < k; ++i) {
      cd ref{0.0, 0.0};
      for (std::int64_t p = 0; p < n; ++p) ref += x2[i + p * k] * ad[p + j * n];
      CHECK(std::abs(y2[i + j * k] - ref) < 1e-13);
    }
  }
}

TEST_CASE("identity and diagonal") {
  const CsrMatrix i5 = CsrMatrix::identity(5);
  CHECK(i5.nnz() == 5);
  std::mt19937_64 rng(1);
  const CsrMatrix a = random_csr(5, 5, 0.8, rng);
  const auto d = a.diagonal();
  const auto ad = a.to_dense();
  for (int i = 0; i < 5; ++i) CHECK(d[i] == ad[i + i * 5]);
}
