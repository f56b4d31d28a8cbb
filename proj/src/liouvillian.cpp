#include "vibronic/liouvillian.hpp"

#include "vibronic/kernels.hpp"

namespace vibronic {

SuperOperator::SuperOperator(CsrMatrix h, std::vector<CollapseOperator> ops, GeneratorKind kind,
                             std::optional<VibronicBasis> basis)
    : dim_(h.rows), h_(std::move(h)), ops_(std::move(ops)), kind_(kind), basis_(std::move(basis)) {
  if (h_.rows != h_.cols) throw NumericalError("Hamiltonian must be square");
  for (const auto& op : ops_) {
    if (op.c.rows != dim_ || op.c.cols != dim_)
      throw NumericalError("collapse operator dimension mismatch");
  }
  if (basis_ && basis_->dim() != dim_) throw NumericalError("basis dimension mismatch");
}

namespace {

thread_local std::vector<cd> t1_buf, t2_buf;

}  // namespace

void SuperOperator::apply(const cd* rho, cd* out) const {
  const std::size_t n = static_cast<std::size_t>(dim_vec());
  t1_buf.resize(n);
  t2_buf.resize(n);
  cd* t1 = t1_buf.data();
  cd* t2 = t2_buf.data();
  std::fill(out, out + n, cd{0.0, 0.0});

  // Commutator: -i(H rho - rho H) forward, +i(H psi - psi H) adjoint.
  const cd ci = kind_ == GeneratorKind::Forward ? cd{0.0, -1.0} : cd{0.0, 1.0};
  h_.mm_left(rho, t1, dim_);
  kern::zaxpy(n, ci, t1, out);
  h_.mm_right(rho, t1, dim_);
  kern::zaxpy(n, -ci, t1, out);

  for (const auto& op : ops_) {
    if (op.rate == 0.0) continue;
    if (kind_ == GeneratorKind::Forward) {
      op.c.mm_left(rho, t1, dim_);
      op.c_dag.mm_right(t1, t2, dim_);
    } else {
      op.c_dag.mm_left(rho, t1, dim_);
      op.c.mm_right(t1, t2, dim_);
    }
    kern::zaxpy(n, op.rate, t2, out);
    op.cdc.mm_left(rho, t1, dim_);
    kern::zaxpy(n, -0.5 * op.rate, t1, out);
    op.cdc.mm_right(rho, t1, dim_);
    kern::zaxpy(n, -0.5 * op.rate, t1, out);
  }
}

const CsrMatrix& SuperOperator::matrix(std::int64_t dim_cap) const {
  if (dim_vec() > dim_cap)
    throw NumericalError("superoperator too large to materialize (" +
                         std::to_string(dim_vec()) + " rows); use the matrix-free apply");
  std::call_once(matrix_once_, [this] {
    const CsrMatrix id = CsrMatrix::identity(dim_);
    const cd ci = kind_ == GeneratorKind::Forward ? cd{0.0, -1.0} : cd{0.0, 1.0};
    CooBuilder b(dim_vec(), dim_vec());
    b.add_matrix(kron(id, h_), ci);
    b.add_matrix(kron(h_.transpose(), id), -ci);
    for (const auto& op : ops_) {
      if (op.rate == 0.0) continue;
      if (kind_ == GeneratorKind::Forward) {
        b.add_matrix(kron(op.c.conjugate(), op.c), op.rate);
      } else {
        b.add_matrix(kron(op.c.transpose(), op.c_dag), op.rate);
      }
      b.add_matrix(kron(id, op.cdc), -0.5 * op.rate);
      b.add_matrix(kron(op.cdc.transpose(), id), -0.5 * op.rate);
    }
    matrix_ = std::make_unique<CsrMatrix>(b.build(1e-15));
  });
  return *matrix_;
}

std::vector<cd> SuperOperator::diagonal() const {
  const auto h_diag = h_.diagonal();
  struct OpDiag {
    double rate;
    std::vector<cd> c, k;
  };
  std::vector<OpDiag> diags;
  for (const auto& op : ops_) {
    if (op.rate == 0.0) continue;
    diags.push_back({op.rate, op.c.diagonal(), op.cdc.diagonal()});
  }
  std::vector<cd> d(dim_vec());
  const cd ci = kind_ == GeneratorKind::Forward ? cd{0.0, -1.0} : cd{0.0, 1.0};
  for (std::int64_t nn = 0; nn < dim_; ++nn) {
    for (std::int64_t mm = 0; mm < dim_; ++mm) {
      cd v = ci * (h_diag[mm] - h_diag[nn]);
      for (const auto& od : diags) {
        const cd sandwich = kind_ == GeneratorKind::Forward
                                ? std::conj(od.c[nn]) * od.c[mm]
                                : od.c[nn] * std::conj(od.c[mm]);
        v += od.rate * (sandwich - 0.5 * (od.k[mm] + od.k[nn]));
      }
      d[mm + nn * dim_] = v;
    }
  }
  return d;
}

SuperOperator assemble(CsrMatrix h, std::vector<CollapseOperator> ops,
                       std::optional<VibronicBasis> basis) {
  return SuperOperator(std::move(h), std::move(ops), GeneratorKind::Forward, std::move(basis));
}

SuperOperator assemble_model(const ModelParams& p) {
  const VibronicBasis basis = p.basis();
  return assemble(build_hamiltonian(p, basis), build_collapse_ops(p, basis), basis);
}

SuperOperator pairing_adjoint(const SuperOperator& fwd) {
  const GeneratorKind kind =
      fwd.kind() == GeneratorKind::Forward ? GeneratorKind::Adjoint : GeneratorKind::Forward;
  return SuperOperator(fwd.hamiltonian(), fwd.collapse(), kind, fwd.basis());
}

}  // namespace vibronic
