#include "vibronic/operators.hpp"

#include <cmath>

#include "vibronic/blas.hpp"

namespace vibronic {

const char* to_string(CollapseTag t) {
  switch (t) {
    case CollapseTag::Sep:
      return "sep";
    case CollapseTag::Rec:
      return "rec";
    case CollapseTag::Vib1:
      return "vib1";
    case CollapseTag::Vib2:
      return "vib2";
    case CollapseTag::DephG:
      return "deph_g";
    case CollapseTag::DephE:
      return "deph_e";
    case CollapseTag::DephCT:
      return "deph_ct";
  }
  return "?";
}

CollapseOperator CollapseOperator::make(CollapseTag tag, double rate, CsrMatrix c) {
  CollapseOperator op;
  op.tag = tag;
  op.rate = rate;
  op.c_dag = c.dagger();
  op.cdc = matmul(op.c_dag, c);
  op.c = std::move(c);
  return op;
}

CsrMatrix annihilation(int levels) {
  if (levels < 2) throw ConfigError("annihilation operator needs at least 2 levels");
  CooBuilder b(levels, levels);
  for (int n = 1; n < levels; ++n) b.add(n - 1, n, std::sqrt(static_cast<double>(n)));
  return b.build();
}

CsrMatrix local_lowering(int mode, ElectronicState z, const ModelParams& p,
                         const VibronicBasis& basis) {
  if (mode < 0 || mode > 1) throw ConfigError("mode index must be 0 or 1");
  const int levels = basis.trunc[mode];
  return add(annihilation(levels), 1.0, CsrMatrix::identity(levels), p.alpha_of(mode, z));
}

namespace {

// Lifts a mode-local matrix onto the two-mode factor space.
CsrMatrix lift_mode(const CsrMatrix& op, int mode, const VibronicBasis& basis) {
  return mode == 0 ? kron(op, CsrMatrix::identity(basis.trunc[1]))
                   : kron(CsrMatrix::identity(basis.trunc[0]), op);
}

// Per-surface vibrational Hamiltonian on the two-mode space.
CsrMatrix surface_hamiltonian(const ModelParams& p, const VibronicBasis& basis,
                              ElectronicState z) {
  const int vd = basis.vib_dim();
  CooBuilder h(vd, vd);
  const double zero_point = p.eps_of(z) + 0.5 * (p.nu[0] + p.nu[1]);
  h.add_matrix(CsrMatrix::identity(vd), zero_point);
  for (int mode = 0; mode < 2; ++mode) {
    const CsrMatrix b = local_lowering(mode, z, p, basis);
    h.add_matrix(lift_mode(matmul(b.dagger(), b), mode, basis), p.nu[mode]);
  }
  if (p.beta_of(z) != 0.0) {
    // Local position factors (b + b^dag)/2 measured from the surface minimum.
    CsrMatrix x[2];
    for (int mode = 0; mode < 2; ++mode) {
      const CsrMatrix b = local_lowering(mode, z, p, basis);
      x[mode] = add(b, 0.5, b.dagger(), 0.5);
    }
    h.add_matrix(kron(x[0], x[1]), p.beta_of(z));
  }
  return h.build();
}

}  // namespace

CsrMatrix build_hamiltonian(const ModelParams& p, const VibronicBasis& basis) {
  const int vd = basis.vib_dim();
  CooBuilder h(basis.dim(), basis.dim());
  for (auto z : kStates) {
    const std::int64_t off = static_cast<std::int64_t>(z) * vd;
    h.add_matrix(surface_hamiltonian(p, basis, z), 1.0, off, off);
  }
  const std::int64_t off_e = static_cast<std::int64_t>(ElectronicState::E) * vd;
  const std::int64_t off_ct = static_cast<std::int64_t>(ElectronicState::CT) * vd;
  const CsrMatrix iv = CsrMatrix::identity(vd);
  h.add_matrix(iv, p.g, off_e, off_ct);
  h.add_matrix(iv, p.g, off_ct, off_e);
  return h.build();
}

std::vector<CollapseOperator> build_collapse_ops(const ModelParams& p,
                                                 const VibronicBasis& basis) {
  const int vd = basis.vib_dim();
  const int dim = basis.dim();
  const CsrMatrix iv = CsrMatrix::identity(vd);
  const auto offset = [vd](ElectronicState z) { return static_cast<std::int64_t>(z) * vd; };

  const auto jump = [&](ElectronicState to, ElectronicState from) {
    CooBuilder b(dim, dim);
    b.add_matrix(iv, 1.0, offset(to), offset(from));
    return b.build();
  };
  const auto projector = [&](ElectronicState z) { return jump(z, z); };

  std::vector<CollapseOperator> ops;
  ops.push_back(CollapseOperator::make(CollapseTag::Sep, p.rate_sep,
                                       jump(ElectronicState::A, ElectronicState::CT)));
  ops.push_back(CollapseOperator::make(CollapseTag::Rec, p.rate_rec,
                                       jump(ElectronicState::G, ElectronicState::E)));
  for (int mode = 0; mode < 2; ++mode) {
    CooBuilder b(dim, dim);
    for (auto z : kStates) {
      b.add_matrix(lift_mode(local_lowering(mode, z, p, basis), mode, basis), 1.0, offset(z),
                   offset(z));
    }
    ops.push_back(CollapseOperator::make(mode == 0 ? CollapseTag::Vib1 : CollapseTag::Vib2,
                                         p.gamma_vib[mode], b.build()));
  }
  ops.push_back(CollapseOperator::make(CollapseTag::DephG, p.deph_of(ElectronicState::G),
                                       projector(ElectronicState::G)));
  ops.push_back(CollapseOperator::make(CollapseTag::DephE, p.deph_of(ElectronicState::E),
                                       projector(ElectronicState::E)));
  ops.push_back(CollapseOperator::make(CollapseTag::DephCT, p.deph_of(ElectronicState::CT),
                                       projector(ElectronicState::CT)));
  return ops;
}

std::vector<cd> displaced_fock_state(double alpha, int n, int levels, double tail_tol) {
  if (n < 0 || n >= levels) throw ConfigError("Fock level outside truncation");
  if (alpha == 0.0) {
    std::vector<cd> v(levels, cd{0.0, 0.0});
    v[n] = 1.0;
    return v;
  }
  // exp(-alpha (a^dag - a)) |n> through the eigendecomposition of the
  // Hermitian matrix -i alpha (a^dag - a); the truncated exponential is
  // exactly unitary, errors show up only as mass on the top levels.
  std::vector<cd> m(static_cast<std::size_t>(levels) * levels, cd{0.0, 0.0});
  // Hermitian i*A with A = -alpha (a^dag - a): entry (k-1,k) of A is +alpha sqrt(k).
  for (int k = 1; k < levels; ++k) {
    const double s = alpha * std::sqrt(static_cast<double>(k));
    m[(k - 1) + static_cast<std::size_t>(levels) * k] = cd{0.0, s};
    m[k + static_cast<std::size_t>(levels) * (k - 1)] = cd{0.0, -s};
  }
  std::vector<double> w(levels);
  blas::heev(levels, m.data(), levels, w.data());
  std::vector<cd> v(levels, cd{0.0, 0.0});
  for (int j = 0; j < levels; ++j) {
    const cd phase = std::exp(cd{0.0, -w[j]});  // exp(A) = V exp(-i diag) V^dag
    const cd proj = std::conj(m[n + static_cast<std::size_t>(levels) * j]) * phase;
    for (int i = 0; i < levels; ++i) v[i] += m[i + static_cast<std::size_t>(levels) * j] * proj;
  }
  const double tail = std::norm(v[levels - 1]) + std::norm(v[levels - 2]);
  if (tail > tail_tol)
    throw TruncationError("displaced Fock state does not fit the truncation: tail " +
                          std::to_string(tail) + " for alpha=" + std::to_string(alpha) +
                          ", n=" + std::to_string(n) + ", levels=" + std::to_string(levels));
  return v;
}

std::vector<cd> surface_local_level(const ModelParams& p, const VibronicBasis& basis,
                                    ElectronicState z, int n1, int n2, double tail_tol) {
  const auto w1 = displaced_fock_state(p.alpha_of(0, z), n1, basis.trunc[0], tail_tol);
  const auto w2 = displaced_fock_state(p.alpha_of(1, z), n2, basis.trunc[1], tail_tol);
  std::vector<cd> v(basis.vib_dim());
  for (int i = 0; i < basis.trunc[0]; ++i)
    for (int j = 0; j < basis.trunc[1]; ++j) v[basis.vib_index(i, j)] = w1[i] * w2[j];
  return v;
}

double hermiticity_defect(const CsrMatrix& a) {
  const CsrMatrix diff = add(a, 1.0, a.dagger(), -1.0);
  const double scale = a.frobenius_norm();
  return scale > 0.0 ? diff.frobenius_norm() / scale : diff.frobenius_norm();
}

}  // namespace vibronic
