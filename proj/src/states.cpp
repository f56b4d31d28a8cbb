#include "vibronic/states.hpp"

#include <algorithm>
#include <cmath>

#include "vibronic/blas.hpp"
#include "vibronic/branching.hpp"
#include "vibronic/kernels.hpp"

namespace vibronic {

cd DensityOperator::trace() const {
  cd t{0.0, 0.0};
  for (std::int64_t i = 0; i < dim; ++i) t += at(i, i);
  return t;
}

double DensityOperator::hermiticity_defect() const {
  double num = 0.0, den = 0.0;
  for (std::int64_t j = 0; j < dim; ++j) {
    for (std::int64_t i = 0; i < dim; ++i) {
      num += std::norm(at(i, j) - std::conj(at(j, i)));
      den += std::norm(at(i, j));
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

void DensityOperator::validate(double psd_tol) const {
  if (hermiticity_defect() > 1e-12)
    throw NumericalError("density operator is not Hermitian");
  if (std::abs(trace() - cd{1.0, 0.0}) > 1e-12)
    throw NumericalError("density operator trace differs from one");
  std::vector<cd> a = m;
  std::vector<double> w(dim);
  blas::heev(dim, a.data(), dim, w.data());
  if (w[0] < -psd_tol)
    throw NumericalError("density operator has negative eigenvalue " + std::to_string(w[0]));
}

cd pairing_trace(std::span<const cd> a, std::span<const cd> b, std::int64_t dim) {
  cd t{0.0, 0.0};
  for (std::int64_t j = 0; j < dim; ++j) {
    for (std::int64_t i = 0; i < dim; ++i) t += a[i + j * dim] * b[j + i * dim];
  }
  return t;
}

DensityOperator pure_state(std::span<const cd> v) {
  DensityOperator rho;
  rho.dim = static_cast<std::int64_t>(v.size());
  rho.m.resize(rho.dim * rho.dim);
  double nrm = kern::znrm2sq(v.size(), v.data());
  if (nrm <= 0.0) throw NumericalError("pure_state: zero vector");
  for (std::int64_t j = 0; j < rho.dim; ++j) {
    for (std::int64_t i = 0; i < rho.dim; ++i)
      rho.m[i + j * rho.dim] = v[i] * std::conj(v[j]) / nrm;
  }
  return rho;
}

double edge_mass(const DensityOperator& rho, const VibronicBasis& basis) {
  double mass = 0.0;
  for (std::int64_t i = 0; i < rho.dim; ++i) {
    const auto lv = basis.state_of(static_cast<int>(i));
    if (lv.n1 >= basis.trunc[0] - 2 || lv.n2 >= basis.trunc[1] - 2)
      mass += std::abs(rho.at(i, i));
  }
  return mass;
}

std::array<double, 4> electronic_populations(const DensityOperator& rho,
                                             const VibronicBasis& basis) {
  std::array<double, 4> pop{};
  const int vd = basis.vib_dim();
  for (std::int64_t i = 0; i < rho.dim; ++i) pop[i / vd] += rho.at(i, i).real();
  return pop;
}

DensityOperator broadband_initial_state(const ModelParams& p, const VibronicBasis& basis,
                                        const std::vector<cd>& parent_vib) {
  (void)p;
  const int vd = basis.vib_dim();
  if (static_cast<std::int64_t>(parent_vib.size()) != static_cast<std::int64_t>(vd) * vd)
    throw NumericalError("parent vibrational density has wrong dimension");
  cd tr{0.0, 0.0};
  for (int i = 0; i < vd; ++i) tr += parent_vib[i + static_cast<std::int64_t>(i) * vd];
  if (std::abs(tr) < 1e-14) throw NumericalError("parent vibrational density has zero trace");

  DensityOperator rho;
  rho.dim = basis.dim();
  rho.m.assign(rho.dim * rho.dim, cd{0.0, 0.0});
  const std::int64_t off = static_cast<std::int64_t>(ElectronicState::E) * vd;
  for (int j = 0; j < vd; ++j) {
    for (int i = 0; i < vd; ++i) {
      rho.m[(off + i) + (off + j) * rho.dim] = parent_vib[i + static_cast<std::int64_t>(j) * vd] / tr;
    }
  }
  return rho;
}

DensityOperator cluster_initial_state(const VibronicBasis& basis, int count1, int count2,
                                      int offset2) {
  if (count1 < 1 || count2 < 1 || offset2 < 0)
    throw ConfigError("cluster ranges must be positive");
  if (count1 > basis.trunc[0] || offset2 + count2 > basis.trunc[1])
    throw TruncationError("cluster exceeds the truncated basis");
  DensityOperator rho;
  rho.dim = basis.dim();
  rho.m.assign(rho.dim * rho.dim, cd{0.0, 0.0});
  const double w = 1.0 / (static_cast<double>(count1) * count2);
  for (int n1 = 0; n1 < count1; ++n1) {
    for (int n2 = offset2; n2 < offset2 + count2; ++n2) {
      const std::int64_t i = basis.index_of(ElectronicState::E, n1, n2);
      rho.m[i + i * rho.dim] = w;
    }
  }
  return rho;
}

DensityOperator parent_level_state(const ModelParams& p, const VibronicBasis& basis, int n1,
                                   int n2) {
  const auto v = surface_local_level(p, basis, ElectronicState::G, n1, n2);
  const int vd = basis.vib_dim();
  std::vector<cd> parent(static_cast<std::int64_t>(vd) * vd);
  for (int j = 0; j < vd; ++j) {
    for (int i = 0; i < vd; ++i) parent[i + static_cast<std::int64_t>(j) * vd] = v[i] * std::conj(v[j]);
  }
  return broadband_initial_state(p, basis, parent);
}

DensityOperator shared_level_state(const VibronicBasis& basis, int n1, int n2) {
  std::vector<cd> v(basis.dim(), cd{0.0, 0.0});
  v[basis.index_of(ElectronicState::E, n1, n2)] = 1.0;
  return pure_state(v);
}

DensityOperator make_initial_state(const ModelParams& p, const VibronicBasis& basis,
                                   const InitialStateSpec& spec) {
  switch (spec.kind) {
    case InitialStateSpec::Kind::Cluster:
      return cluster_initial_state(basis, spec.n1, spec.n2, spec.offset2);
    case InitialStateSpec::Kind::SharedLevel:
      return shared_level_state(basis, spec.n1, spec.n2);
    case InitialStateSpec::Kind::ParentLevel:
      return parent_level_state(p, basis, spec.n1, spec.n2);
  }
  throw ConfigError("unknown initial state kind");
}

std::vector<EigenstateRecord> eigen_analysis(const CsrMatrix& h, const BranchingFunctional& psi,
                                             const VibronicBasis& basis) {
  const std::int64_t dim = h.rows;
  if (psi.dim != dim || basis.dim() != dim)
    throw NumericalError("eigen_analysis: dimension mismatch");
  std::vector<cd> a = h.to_dense();
  std::vector<double> w(dim);
  blas::heev(dim, a.data(), dim, w.data());

  // p_II for all eigenvectors at once: columns of Psi * Phi.
  std::vector<cd> pf(dim * dim);
  blas::zgemm('N', 'N', dim, dim, dim, cd{1.0, 0.0}, psi.psi.data(), dim, a.data(), dim,
              cd{0.0, 0.0}, pf.data(), dim);

  const int vd = basis.vib_dim();
  const std::int64_t off_e = static_cast<std::int64_t>(ElectronicState::E) * vd;
  const std::int64_t off_ct = static_cast<std::int64_t>(ElectronicState::CT) * vd;

  std::vector<EigenstateRecord> records(dim);
  for (std::int64_t j = 0; j < dim; ++j) {
    EigenstateRecord& r = records[j];
    r.energy = w[j];
    r.vec.assign(a.begin() + j * dim, a.begin() + (j + 1) * dim);
    r.loc_e = kern::znrm2sq(vd, r.vec.data() + off_e);
    r.loc_ct = kern::znrm2sq(vd, r.vec.data() + off_ct);
    r.p_II = kern::zdotc(dim, r.vec.data(), pf.data() + j * dim).real();
  }
  // zheevd returns ascending eigenvalues already; keep the guarantee explicit.
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& x, const auto& y) { return x.energy < y.energy; });
  return records;
}

const EigenstateRecord& find_drain_state(std::span<const EigenstateRecord> records,
                                         const ModelParams& p) {
  const double e_min = p.eps_of(ElectronicState::E);
  for (const auto& r : records) {
    if (r.energy >= e_min && r.loc_ct >= 0.5) return r;
  }
  throw NumericalError("no drain state: no eigenstate in the excited window has loc_ct >= 0.5");
}

}  // namespace vibronic
