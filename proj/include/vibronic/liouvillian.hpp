#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "vibronic/model.hpp"
#include "vibronic/operators.hpp"
#include "vibronic/sparse.hpp"

namespace vibronic {

enum class GeneratorKind { Forward, Adjoint };

// Lindblad generator in vectorized form. The vectorization convention is
// fixed: column stacking, vec(X)[i + D*j] = X(i,j), so a column-major dense
// operator and its vectorization share memory layout. Under this convention
// vec(A X B) = (B^T kron A) vec(X).
//
// Both an explicit sparse matrix (assembled lazily, zero-dropped at 1e-15)
// and a matrix-free apply path are provided. Instances are immutable and
// safe to share across threads.
class SuperOperator {
 public:
  SuperOperator(CsrMatrix h, std::vector<CollapseOperator> ops, GeneratorKind kind,
                std::optional<VibronicBasis> basis);

  std::int64_t dim_op() const { return dim_; }
  std::int64_t dim_vec() const { return dim_ * dim_; }
  GeneratorKind kind() const { return kind_; }
  const CsrMatrix& hamiltonian() const { return h_; }
  const std::vector<CollapseOperator>& collapse() const { return ops_; }
  const std::optional<VibronicBasis>& basis() const { return basis_; }

  // out = L[rho] (or the pairing adjoint applied to rho), dense col-major.
  void apply(const cd* rho, cd* out) const;

  // Same map on a vectorized operand; identical memory layout.
  void apply_vec(const cd* x, cd* y) const { apply(x, y); }

  // Assembled sparse matrix acting on vectorized operators. Refuses to
  // materialize beyond `dim_cap` rows; use the matrix-free path there.
  const CsrMatrix& matrix(std::int64_t dim_cap = (std::int64_t{1} << 21)) const;

  // Structural diagonal of the vectorized generator (no assembly).
  std::vector<cd> diagonal() const;

 private:
  std::int64_t dim_;
  CsrMatrix h_;
  std::vector<CollapseOperator> ops_;
  GeneratorKind kind_;
  std::optional<VibronicBasis> basis_;

  mutable std::once_flag matrix_once_;
  mutable std::unique_ptr<CsrMatrix> matrix_;
};

// Assembles the forward generator d rho/dt = L[rho].
SuperOperator assemble(CsrMatrix h, std::vector<CollapseOperator> ops,
                       std::optional<VibronicBasis> basis = {});

// Convenience: full model pipeline (Hamiltonian + the seven channels).
SuperOperator assemble_model(const ModelParams& p);

// Adjoint with respect to the non-conjugating pairing <Psi, X> = Tr[Psi X]:
// Tr[Psi L[X]] = Tr[L*[Psi] X] for all X.
SuperOperator pairing_adjoint(const SuperOperator& fwd);

}  // namespace vibronic
