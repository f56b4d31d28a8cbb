#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "vibronic/branching.hpp"
#include "vibronic/kernels.hpp"

using namespace vibronic;
using test::fro_norm;
using test::small_params;

namespace {

double poisson(double mean, int n) {
  double p = std::exp(-mean);
  for (int k = 1; k <= n; ++k) p *= mean / k;
  return p;
}

// || L*[psi] + O Tr[rho_II psi] + I Tr[rho_I psi] - O ||_F evaluated directly.
double completed_residual(const SuperOperator& l, const BranchingFunctional& f,
                          const DensityOperator& rho_I, const DensityOperator& rho_II,
                          const DensityOperator& o_hat) {
  const SuperOperator adj = pairing_adjoint(l);
  const std::int64_t dim = l.dim_op();
  std::vector<cd> r(l.dim_vec());
  adj.apply(f.psi.data(), r.data());
  const cd c2 = pairing_trace(rho_II.m, f.psi, dim);
  const cd c1 = pairing_trace(rho_I.m, f.psi, dim);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += c2 * o_hat.m[i] - o_hat.m[i];
  for (std::int64_t i = 0; i < dim; ++i) r[i + i * dim] += c1;
  return fro_norm(r);
}

}  // namespace

TEST_CASE("steady states") {
  SUBCASE("zero displacement gives the bare ground levels") {
    ModelParams p = small_params(3, 4);
    for (auto z : kStates) p.alpha[0][static_cast<int>(z)] = p.alpha[1][static_cast<int>(z)] = 0.0;
    const VibronicBasis b = p.basis();
    const auto [rho_I, rho_II] = steady_states(p, b);
    const auto ig = b.index_of(ElectronicState::G, 0, 0);
    const auto ia = b.index_of(ElectronicState::A, 0, 0);
    CHECK(std::abs(rho_I.at(ig, ig) - cd{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(rho_II.at(ia, ia) - cd{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(rho_I.trace() - cd{1.0, 0.0}) < 1e-14);
  }
  SUBCASE("displaced ground state has a Poisson mode-1 marginal") {
    ModelParams p = small_params(10, 6);
    p.alpha[0][static_cast<int>(ElectronicState::G)] = 0.5;
    const VibronicBasis b = p.basis();
    const auto [rho_I, rho_II] = steady_states(p, b);
    for (int n1 = 0; n1 < 8; ++n1) {
      double marginal = 0.0;
      for (int n2 = 0; n2 < 6; ++n2) {
        const auto i = b.index_of(ElectronicState::G, n1, n2);
        marginal += rho_I.at(i, i).real();
      }
      CHECK(marginal == doctest::Approx(poisson(0.25, n1)).epsilon(1e-7));
    }
  }
  SUBCASE("steady-state residual is enforced") {
    const ModelParams p = small_params(6, 6);
    const SuperOperator l = assemble_model(p);
    const auto [rho_I, rho_II] = steady_states(p, p.basis());
    std::vector<cd> out(l.dim_vec());
    l.apply(rho_I.m.data(), out.data());
    CHECK(fro_norm(out) < 1e-8 * l.hamiltonian().frobenius_norm());
    l.apply(rho_II.m.data(), out.data());
    CHECK(fro_norm(out) < 1e-8 * l.hamiltonian().frobenius_norm());
  }
  SUBCASE("oversized displacement fails the truncation guard") {
    ModelParams p = small_params(3, 4);
    p.alpha[0][static_cast<int>(ElectronicState::G)] = 2.5;
    CHECK_THROWS_AS(steady_states(p, p.basis()), TruncationError);
  }
}

TEST_CASE("three-level toy: isolated ground state plus one absorbing channel") {
  // States {g, e, a}; the only channel is e -> a. Every excited state is
  // absorbed, so the functional is the projector onto the absorbing basin.
  const std::int64_t dim = 3;
  CooBuilder cb(dim, dim);
  cb.add(2, 1, {1.0, 0.0});  // |a><e|
  std::vector<CollapseOperator> ops;
  ops.push_back(CollapseOperator::make(CollapseTag::Sep, 0.8, cb.build()));
  const SuperOperator l = assemble(CsrMatrix::zero(dim, dim), std::move(ops));

  std::vector<cd> vg(dim, cd{0.0, 0.0}), va(dim, cd{0.0, 0.0}), ve(dim, cd{0.0, 0.0});
  vg[0] = 1.0;
  va[2] = 1.0;
  ve[1] = 1.0;
  const DensityOperator rho_I = pure_state(vg), rho_II = pure_state(va);

  const BranchingFunctional f = solve_functional(l, rho_I, rho_II, rho_II);
  CHECK(f.method == "full-krylov");
  // psi = P_e + P_a
  for (std::int64_t j = 0; j < dim; ++j) {
    for (std::int64_t i = 0; i < dim; ++i) {
      const cd expect = (i == j && i > 0) ? cd{1.0, 0.0} : cd{0.0, 0.0};
      CHECK(std::abs(f.psi[i + j * dim] - expect) < 1e-7);
    }
  }
  const BranchingResult re = branching_probabilities(f, pure_state(ve));
  CHECK(re.p_II == doctest::Approx(1.0).epsilon(1e-8));  // every initial e state is absorbed
  const BranchingResult rg = branching_probabilities(f, rho_I);
  CHECK(rg.p_II == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("sector and full-space solvers produce the same functional") {
  const ModelParams p = small_params(6, 6);
  const SuperOperator l = assemble_model(p);
  const auto [rho_I, rho_II] = steady_states(p, p.basis());

  SolveOptions full_opt;
  full_opt.force_full_space = true;
  full_opt.tol = 1e-10;
  SolveOptions fast_opt;
  fast_opt.tol = 1e-10;

  const BranchingFunctional f_full = solve_functional(l, rho_I, rho_II, rho_II, full_opt);
  const BranchingFunctional f_fast = solve_functional(l, rho_I, rho_II, rho_II, fast_opt);
  CHECK(f_full.method == "full-krylov");
  CHECK(f_fast.method == "sector-eigenbasis");

  double worst = 0.0;
  for (std::size_t i = 0; i < f_full.psi.size(); ++i)
    worst = std::max(worst, std::abs(f_full.psi[i] - f_fast.psi[i]));
  CHECK(worst < 1e-6);

  SUBCASE("defining pairings") {
    for (const auto* f : {&f_full, &f_fast}) {
      CHECK(std::abs(pairing_trace(rho_II.m, f->psi, f->dim) - cd{1.0, 0.0}) < 1e-8);
      CHECK(std::abs(pairing_trace(rho_I.m, f->psi, f->dim)) < 1e-8);
    }
  }
  SUBCASE("completed-equation residual") {
    CHECK(completed_residual(l, f_full, rho_I, rho_II, rho_II) < 10 * full_opt.tol);
    CHECK(completed_residual(l, f_fast, rho_I, rho_II, rho_II) < 10 * fast_opt.tol);
  }
  SUBCASE("branching probabilities agree on random mixtures") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
      DensityOperator rho;
      rho.dim = l.dim_op();
      rho.m = test::random_density(rho.dim, rng);
      const double a = branching_probabilities(f_full, rho).p_II;
      const double b = branching_probabilities(f_fast, rho).p_II;
      CHECK(a == doctest::Approx(b).epsilon(1e-8));
    }
  }
}

TEST_CASE("configurable O-hat reproduces the same functional") {
  const ModelParams p = small_params(6, 6);
  const SuperOperator l = assemble_model(p);
  const auto [rho_I, rho_II] = steady_states(p, p.basis());
  // a different full-rank completion: mixture of the acceptor vacuum and the
  // first excited acceptor level
  const VibronicBasis b = p.basis();
  std::vector<cd> v(b.dim(), cd{0.0, 0.0});
  v[b.index_of(ElectronicState::A, 1, 0)] = 1.0;
  DensityOperator o_hat;
  o_hat.dim = b.dim();
  o_hat.m.resize(o_hat.dim * o_hat.dim);
  const DensityOperator lvl = pure_state(v);
  for (std::size_t i = 0; i < o_hat.m.size(); ++i)
    o_hat.m[i] = 0.5 * rho_II.m[i] + 0.5 * lvl.m[i];

  SolveOptions opt;
  opt.tol = 1e-10;
  const BranchingFunctional f = solve_functional(l, rho_I, rho_II, o_hat, opt);
  CHECK(f.method == "full-krylov");
  const BranchingFunctional f_ref = solve_functional(l, rho_I, rho_II, rho_II, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.psi.size(); ++i)
    worst = std::max(worst, std::abs(f.psi[i] - f_ref.psi[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("analytic limits") {
  SUBCASE("no recombination channel forces p_II = 1") {
    ModelParams p = small_params(6, 6);
    p.rate_rec = 0.0;
    const PipelineResult pipe = compute_functional(p);
    const DensityOperator rho0 = cluster_initial_state(pipe.basis, 2, 2, 0);
    CHECK(branching_probabilities(pipe.functional, rho0).p_II ==
          doctest::Approx(1.0).epsilon(1e-8));

    SolveOptions full;
    full.force_full_space = true;
    const PipelineResult pipe_full = compute_functional(p, full);
    CHECK(branching_probabilities(pipe_full.functional, rho0).p_II ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("no electronic coupling forces p_II = 0") {
    ModelParams p = small_params(4, 5);
    p.g = 0.0;
    const PipelineResult pipe = compute_functional(p);
    const DensityOperator rho0 = cluster_initial_state(pipe.basis, 2, 3, 1);
    CHECK(branching_probabilities(pipe.functional, rho0).p_II ==
          doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("acceptor steady state pairs to exactly one") {
    const ModelParams p = small_params(6, 6);
    const PipelineResult pipe = compute_functional(p);
    const auto [rho_I, rho_II] = steady_states(p, p.basis());
    const BranchingResult r = branching_probabilities(pipe.functional, rho_II);
    CHECK(r.p_II <= 1.0);  // clamped path
    CHECK(r.p_II == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(branching_probabilities(pipe.functional, rho_I).p_II ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("probability is linear in the initial state") {
  const ModelParams p = small_params(3, 4);
  const PipelineResult pipe = compute_functional(p);
  std::mt19937_64 rng(12);
  DensityOperator r1, r2, mix;
  r1.dim = r2.dim = mix.dim = pipe.basis.dim();
  r1.m = test::random_density(r1.dim, rng);
  r2.m = test::random_density(r2.dim, rng);
  mix.m.resize(r1.m.size());
  const double a = 0.3;
  for (std::size_t i = 0; i < mix.m.size(); ++i) mix.m[i] = a * r1.m[i] + (1 - a) * r2.m[i];
  const double p1 = branching_probabilities(pipe.functional, r1).p_II;
  const double p2 = branching_probabilities(pipe.functional, r2).p_II;
  const double pm = branching_probabilities(pipe.functional, mix).p_II;
  CHECK(std::abs(pm - (a * p1 + (1 - a) * p2)) < 1e-10);
}

TEST_CASE("restart residual history is monotone") {
  const ModelParams p = small_params(3, 4);
  SolveOptions opt;
  opt.restart = 5;
  opt.tol = 1e-9;
  const PipelineResult pipe = compute_functional(p, opt);
  const auto& hist = pipe.functional.restart_residuals;
  for (std::size_t i = 1; i < hist.size(); ++i)
    CHECK(hist[i] <= hist[i - 1] * (1.0 + 1e-10));
}

TEST_CASE("failure modes") {
  SUBCASE("iteration starvation raises a numerical error") {
    const ModelParams p = small_params(3, 4);
    SolveOptions opt;
    opt.max_iters = 1;
    CHECK_THROWS_AS(compute_functional(p, opt), NumericalError);
  }
  SUBCASE("out-of-range pairing raises") {
    BranchingFunctional f;
    f.dim = 2;
    f.psi = {cd{2.0, 0.0}, {}, {}, cd{2.0, 0.0}};  // 2*I
    std::vector<cd> v{cd{1.0, 0.0}, cd{0.0, 0.0}};
    CHECK_THROWS_AS(branching_probabilities(f, pure_state(v)), NumericalError);
  }
  SUBCASE("leakage flag on edge-level states") {
    const ModelParams p = small_params(3, 6);
    const PipelineResult pipe = compute_functional(p);
    const DensityOperator edge = cluster_initial_state(pipe.basis, 1, 1, 5);
    CHECK(branching_probabilities(pipe.functional, edge).leakage_flag);
    const DensityOperator inner = cluster_initial_state(pipe.basis, 1, 1, 0);
    CHECK(!branching_probabilities(pipe.functional, inner).leakage_flag);
  }
}

TEST_CASE("resonance report") {
  SUBCASE("reference optimum hits kappa = 3") {
    ModelParams p = small_params(3, 3);
    p.delta = 30.0;
    p.eps[static_cast<int>(ElectronicState::CT)] = 30.0;
    p.nu = {9.28, 13.09};
    const ResonanceReport r = verify_resonance(p);
    CHECK(r.kappa == 3);
    CHECK(!r.swapped);
    CHECK(r.mismatch == doctest::Approx(0.01 / 30.0).epsilon(1e-6));
  }
  SUBCASE("exact first-order resonance") {
    ModelParams p = small_params(3, 3);
    p.nu = {3.1, p.delta + 3.1};
    const ResonanceReport r = verify_resonance(p);
    CHECK(r.kappa == 1);
    CHECK(r.mismatch < 1e-14);
  }
  SUBCASE("incommensurate frequencies only report a large mismatch") {
    ModelParams p = small_params(3, 3);
    p.delta = 30.0;
    p.eps[static_cast<int>(ElectronicState::CT)] = 30.0;
    p.nu = {1.0, 1.05};
    const ResonanceReport r = verify_resonance(p);
    CHECK(r.mismatch > 0.3);
  }
}
