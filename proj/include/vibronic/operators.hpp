#pragma once

#include <vector>

#include "vibronic/model.hpp"
#include "vibronic/sparse.hpp"

namespace vibronic {

enum class CollapseTag { Sep, Rec, Vib1, Vib2, DephG, DephE, DephCT };

const char* to_string(CollapseTag t);

// One Lindblad channel: the D x D jump matrix, its rate and cached products.
struct CollapseOperator {
  CollapseTag tag;
  double rate = 0.0;
  CsrMatrix c;
  CsrMatrix c_dag;
  CsrMatrix cdc;  // c^dag c

  static CollapseOperator make(CollapseTag tag, double rate, CsrMatrix c);
};

// Standard lowering matrix in the shared e-frame Fock basis.
CsrMatrix annihilation(int levels);

// Surface-local lowering operator on the mode-k factor: b = a + alpha_{k,z}.
CsrMatrix local_lowering(int mode, ElectronicState z, const ModelParams& p,
                         const VibronicBasis& basis);

// Full vibronic Hamiltonian, Hermitian by construction.
CsrMatrix build_hamiltonian(const ModelParams& p, const VibronicBasis& basis);

// Exactly seven channels: separation, recombination, two vibrational
// relaxations (summed over all four surfaces) and three dephasings.
std::vector<CollapseOperator> build_collapse_ops(const ModelParams& p,
                                                 const VibronicBasis& basis);

// n-th eigenvector of b^dag b with b = a + alpha, expressed in the shared
// basis; computed as exp(-alpha (a^dag - a)) |n>. Throws TruncationError when
// the top two Fock levels carry more than `tail_tol` mass.
std::vector<cd> displaced_fock_state(double alpha, int n, int levels, double tail_tol = 1e-8);

// Two-mode product of surface-local displaced Fock states, length vib_dim.
std::vector<cd> surface_local_level(const ModelParams& p, const VibronicBasis& basis,
                                    ElectronicState z, int n1, int n2, double tail_tol = 1e-8);

// Relative Frobenius distance from the conjugate transpose.
double hermiticity_defect(const CsrMatrix& a);

}  // namespace vibronic
