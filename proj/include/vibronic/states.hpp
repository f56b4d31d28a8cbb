#pragma once

#include <span>
#include <vector>

#include "vibronic/model.hpp"
#include "vibronic/operators.hpp"

namespace vibronic {

struct BranchingFunctional;  // defined in branching.hpp

// Dense Hermitian trace-one operator on the vibronic space, col-major.
struct DensityOperator {
  std::int64_t dim = 0;
  std::vector<cd> m;

  cd at(std::int64_t i, std::int64_t j) const { return m[i + j * dim]; }
  cd trace() const;
  double hermiticity_defect() const;

  // Full invariant check: Hermitian within 1e-12, trace one within 1e-12,
  // smallest eigenvalue >= -psd_tol. The PSD check diagonalizes.
  void validate(double psd_tol = 1e-10) const;
};

// Non-conjugating pairing Tr[a b] between dense operators of equal dim.
cd pairing_trace(std::span<const cd> a, std::span<const cd> b, std::int64_t dim);

DensityOperator pure_state(std::span<const cd> v);

// Population in the top two Fock levels of either mode, any surface.
double edge_mass(const DensityOperator& rho, const VibronicBasis& basis);

std::array<double, 4> electronic_populations(const DensityOperator& rho,
                                             const VibronicBasis& basis);

// Vertical broadband excitation: copies a two-mode vibrational density onto
// the donor excited surface and renormalizes to unit trace.
DensityOperator broadband_initial_state(const ModelParams& p, const VibronicBasis& basis,
                                        const std::vector<cd>& parent_vib);

// Uniform diagonal mixture over |e, n1, n2> with n1 in [0, count1) and
// n2 in [offset2, offset2 + count2).
DensityOperator cluster_initial_state(const VibronicBasis& basis, int count1, int count2,
                                      int offset2);

// g-local displaced level |n1, n2>_g lifted vertically onto the e surface.
DensityOperator parent_level_state(const ModelParams& p, const VibronicBasis& basis, int n1,
                                   int n2);

// Pure shared-basis level |e, n1, n2>.
DensityOperator shared_level_state(const VibronicBasis& basis, int n1, int n2);

struct InitialStateSpec {
  enum class Kind { Cluster, SharedLevel, ParentLevel };
  Kind kind = Kind::Cluster;
  int n1 = 1;       // cluster count / level index
  int n2 = 1;
  int offset2 = 0;  // cluster only
};

DensityOperator make_initial_state(const ModelParams& p, const VibronicBasis& basis,
                                   const InitialStateSpec& spec);

struct EigenstateRecord {
  double energy = 0.0;
  std::vector<cd> vec;
  double loc_e = 0.0;
  double loc_ct = 0.0;
  double p_II = 0.0;
};

// Full eigendecomposition of H with per-eigenstate donor/bridge localization
// and branching probability, sorted ascending by energy.
std::vector<EigenstateRecord> eigen_analysis(const CsrMatrix& h, const BranchingFunctional& psi,
                                             const VibronicBasis& basis);

// Lowest-energy eigenstate in the excited window [eps_e, max] with dominant
// charge-transfer character. Throws NumericalError when no record qualifies.
const EigenstateRecord& find_drain_state(std::span<const EigenstateRecord> records,
                                         const ModelParams& p);

}  // namespace vibronic
