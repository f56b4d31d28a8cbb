#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "vibronic/kernels.hpp"
#include "vibronic/operators.hpp"

using namespace vibronic;
using test::small_params;

namespace {

// Analytic coherent-state coefficients of D(-alpha)|0>: e^{-a^2/2}(-a)^n/sqrt(n!).
std::vector<cd> coherent_coeffs(double alpha, int levels) {
  std::vector<cd> v(levels);
  v[0] = std::exp(-0.5 * alpha * alpha);
  for (int n = 1; n < levels; ++n) v[n] = v[n - 1] * (-alpha) / std::sqrt(double(n));
  return v;
}

}  // namespace

TEST_CASE("annihilation matrix elements and commutator") {
  const CsrMatrix a = annihilation(6);
  const auto d = a.to_dense();
  CHECK(d[0 + 1 * 6] == cd{1.0, 0.0});                       // <0|a|1>
  CHECK(std::abs(d[1 + 2 * 6] - std::sqrt(2.0)) < 1e-15);     // <1|a|2>
  const CsrMatrix comm = add(matmul(a, a.dagger()), 1.0, matmul(a.dagger(), a), -1.0);
  const auto cd_ = comm.to_dense();
  for (int n = 0; n < 5; ++n) CHECK(std::abs(cd_[n + n * 6] - cd{1.0, 0.0}) < 1e-14);
  CHECK_THROWS_AS(annihilation(1), ConfigError);
}

TEST_CASE("local lowering operator") {
  ModelParams p = small_params(8, 8);
  p.alpha[0][static_cast<int>(ElectronicState::CT)] = 0.0;
  const VibronicBasis b = p.basis();
  SUBCASE("zero displacement reduces to the bare operator") {
    const auto diff =
        add(local_lowering(0, ElectronicState::CT, p, b), 1.0, annihilation(8), -1.0);
    CHECK(diff.frobenius_norm() < 1e-15);
  }
  SUBCASE("annihilates the displaced vacuum") {
    ModelParams q = small_params(16, 16);
    q.alpha[0][static_cast<int>(ElectronicState::CT)] = 0.45;
    const CsrMatrix low = local_lowering(0, ElectronicState::CT, q, q.basis());
    const auto coh = coherent_coeffs(0.45, 16);
    std::vector<cd> out(16);
    low.mv(coh.data(), out.data());
    CHECK(std::sqrt(kern::znrm2sq(out.size(), out.data())) < 1e-10);
  }
  SUBCASE("vacuum expectation equals the displacement") {
    p.alpha[0][static_cast<int>(ElectronicState::CT)] = -0.7;
    const auto d = local_lowering(0, ElectronicState::CT, p, b).to_dense();
    CHECK(std::abs(d[0] - cd{-0.7, 0.0}) < 1e-15);
  }
}

TEST_CASE("hamiltonian matrix elements") {
  const ModelParams p = small_params(3, 4);
  const VibronicBasis b = p.basis();
  const CsrMatrix h = build_hamiltonian(p, b);
  const auto hd = h.to_dense();
  const std::int64_t dim = b.dim();

  SUBCASE("electronic coupling acts as identity on vibrations") {
    for (int n1 = 0; n1 < 3; ++n1) {
      for (int n2 = 0; n2 < 4; ++n2) {
        const auto i = b.index_of(ElectronicState::E, n1, n2);
        const auto j = b.index_of(ElectronicState::CT, n1, n2);
        CHECK(std::abs(hd[i + j * dim] - cd{p.g, 0.0}) < 1e-14);
      }
    }
  }
  SUBCASE("zero-point diagonal on the donor surface") {
    const auto i = b.index_of(ElectronicState::E, 0, 0);
    const double expect = p.eps_of(ElectronicState::E) + 0.5 * (p.nu[0] + p.nu[1]);
    CHECK(std::abs(hd[i + i * dim] - cd{expect, 0.0}) < 1e-13);
  }
  SUBCASE("hermitian within 1e-12") { CHECK(hermiticity_defect(h) < 1e-12); }
}

TEST_CASE("hamiltonian is hermitian for random parameter draws") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    ModelParams p = small_params(4, 4);
    p.g = 3.0 * u(rng);
    p.nu = {1.0 + 10.0 * u(rng), 1.0 + 10.0 * u(rng)};
    for (auto z : {ElectronicState::G, ElectronicState::CT, ElectronicState::A}) {
      p.alpha[0][static_cast<int>(z)] = u(rng) - 0.5;
      p.alpha[1][static_cast<int>(z)] = u(rng) - 0.5;
    }
    for (auto z : kStates) p.beta[static_cast<int>(z)] = u(rng) - 0.5;
    const CsrMatrix h = build_hamiltonian(p, p.basis());
    CHECK(hermiticity_defect(h) < 1e-12);
  }
}

TEST_CASE("g = 0 makes H block-diagonal over electronic labels") {
  ModelParams p = small_params(3, 4);
  p.g = 0.0;
  const VibronicBasis b = p.basis();
  const CsrMatrix h = build_hamiltonian(p, b);
  const int vd = b.vib_dim();
  for (std::int64_t r = 0; r < h.rows; ++r) {
    for (std::int64_t q = h.row_ptr[r]; q < h.row_ptr[r + 1]; ++q) {
      CHECK(r / vd == h.col[q] / vd);
    }
  }
}

TEST_CASE("surface number operator commutes with H at beta = 0 and g = 0") {
  ModelParams p = small_params(5, 5);
  p.g = 0.0;
  p.beta = {};
  const VibronicBasis b = p.basis();
  const CsrMatrix h = build_hamiltonian(p, b);
  // number operator of mode 1 on the ct surface, lifted to the full space
  const CsrMatrix low = local_lowering(0, ElectronicState::CT, p, b);
  const CsrMatrix num = matmul(low.dagger(), low);
  CooBuilder nb(b.dim(), b.dim());
  const CsrMatrix lifted = kron(num, CsrMatrix::identity(b.trunc[1]));
  nb.add_matrix(lifted, 1.0, 2 * b.vib_dim(), 2 * b.vib_dim());
  const CsrMatrix nfull = nb.build();
  const CsrMatrix comm = add(matmul(h, nfull), 1.0, matmul(nfull, h), -1.0);
  // exact away from the truncation edge; the edge rows are zero here too
  // because both factors share the same truncated ladder
  CHECK(comm.frobenius_norm() < 1e-10 * h.frobenius_norm());
}

TEST_CASE("collapse operator set") {
  const ModelParams p = small_params(4, 6);
  const VibronicBasis b = p.basis();
  const auto ops = build_collapse_ops(p, b);
  REQUIRE(ops.size() == 7);
  CHECK(ops[0].tag == CollapseTag::Sep);
  CHECK(ops[0].rate == p.rate_sep);
  CHECK(ops[1].tag == CollapseTag::Rec);
  CHECK(ops[1].rate == p.rate_rec);
  CHECK(ops[2].rate == p.gamma_vib[0]);
  CHECK(ops[3].rate == p.gamma_vib[1]);
  CHECK(ops[4].rate == p.deph_of(ElectronicState::G));
  CHECK(ops[5].rate == p.deph_of(ElectronicState::E));
  CHECK(ops[6].rate == p.deph_of(ElectronicState::CT));

  SUBCASE("recombination jump preserves vibrational quanta") {
    std::vector<cd> v(b.dim(), cd{0.0, 0.0});
    v[b.index_of(ElectronicState::E, 3, 5)] = 1.0;
    std::vector<cd> out(b.dim());
    ops[1].c.mv(v.data(), out.data());
    for (std::int64_t i = 0; i < b.dim(); ++i) {
      const cd expect = i == b.index_of(ElectronicState::G, 3, 5) ? cd{1.0, 0.0} : cd{0.0, 0.0};
      CHECK(std::abs(out[i] - expect) < 1e-15);
    }
  }
  SUBCASE("bare vibrational lowering at zero displacement") {
    ModelParams q = small_params(4, 6);
    for (auto z : kStates) q.alpha[0][static_cast<int>(z)] = q.alpha[1][static_cast<int>(z)] = 0.0;
    const auto qops = build_collapse_ops(q, b);
    std::vector<cd> v(b.dim(), cd{0.0, 0.0});
    v[b.index_of(ElectronicState::G, 1, 0)] = 1.0;
    std::vector<cd> out(b.dim());
    qops[2].c.mv(v.data(), out.data());
    CHECK(std::abs(out[b.index_of(ElectronicState::G, 0, 0)] - cd{1.0, 0.0}) < 1e-15);
    CHECK(std::sqrt(kern::znrm2sq(out.size(), out.data())) == doctest::Approx(1.0));
  }
}

TEST_CASE("displaced Fock states") {
  SUBCASE("identity displacement returns the bare level") {
    const auto v = displaced_fock_state(0.0, 3, 8);
    for (int i = 0; i < 8; ++i) CHECK(v[i] == (i == 3 ? cd{1.0, 0.0} : cd{0.0, 0.0}));
  }
  SUBCASE("displaced vacuum matches the analytic coherent expansion") {
    const int levels = 20;
    const auto v = displaced_fock_state(0.5, 0, levels);
    const auto ref = coherent_coeffs(0.5, levels);
    for (int n = 0; n < levels; ++n) CHECK(std::abs(v[n] - ref[n]) < 1e-12);
    // occupation distribution is Poisson with mean alpha^2 = 0.25
    double mean = 0.0;
    for (int n = 0; n < levels; ++n) mean += n * std::norm(v[n]);
    CHECK(mean == doctest::Approx(0.25).epsilon(1e-8));
  }
  SUBCASE("eigenstate of the local number operator") {
    const int levels = 24;
    for (int n : {0, 1, 3}) {
      const double alpha = 0.8;
      const auto v = displaced_fock_state(alpha, n, levels);
      CsrMatrix low = add(annihilation(levels), 1.0, CsrMatrix::identity(levels), alpha);
      const CsrMatrix num = matmul(low.dagger(), low);
      std::vector<cd> out(levels);
      num.mv(v.data(), out.data());
      const cd expect = kern::zdotc(levels, v.data(), out.data());
      CHECK(std::abs(expect - cd{double(n), 0.0}) < 1e-8);
    }
  }
  SUBCASE("franck-condon identity |<disp(a,0)|0>|^2 = exp(-a^2)") {
    for (double alpha : {0.3, 1.0, 1.5}) {
      const auto v = displaced_fock_state(alpha, 0, 20);
      CHECK(std::norm(v[0]) == doctest::Approx(std::exp(-alpha * alpha)).epsilon(1e-8));
    }
    for (double alpha : {2.0, 3.0}) {  // larger displacements need more levels
      const auto v = displaced_fock_state(alpha, 0, 40);
      CHECK(std::norm(v[0]) == doctest::Approx(std::exp(-alpha * alpha)).epsilon(1e-8));
    }
  }
  SUBCASE("truncation guard") {
    CHECK_THROWS_AS(displaced_fock_state(3.02, 0, 20), TruncationError);
    CHECK_THROWS_AS(displaced_fock_state(1.0, 7, 8), TruncationError);
  }
}

TEST_CASE("surface-local product levels") {
  ModelParams p = small_params(8, 10);
  p.alpha[0][static_cast<int>(ElectronicState::G)] = 0.25;
  p.alpha[1][static_cast<int>(ElectronicState::G)] = -0.3;
  const VibronicBasis b = p.basis();
  const auto v = surface_local_level(p, b, ElectronicState::G, 0, 0);
  const auto w1 = displaced_fock_state(0.25, 0, 8);
  const auto w2 = displaced_fock_state(-0.3, 0, 10);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 10; ++j)
      CHECK(std::abs(v[b.vib_index(i, j)] - w1[i] * w2[j]) < 1e-14);
}
