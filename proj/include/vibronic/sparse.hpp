#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace vibronic {

using cd = std::complex<double>;

// Compressed-sparse-row complex matrix. Column indices are 32-bit (operator
// dimensions stay far below 2^31); row pointers are 64-bit so superoperator
// matrices with >2^31 entries remain representable.
struct CsrMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr;  // size rows+1
  std::vector<std::int32_t> col;
  std::vector<cd> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }

  static CsrMatrix identity(std::int64_t n);
  static CsrMatrix zero(std::int64_t rows, std::int64_t cols);

  // y = A x (dispatched kernel).
  void mv(const cd* x, cd* y) const;

  // Dense col-major products with an operator-shaped matrix X.
  void mm_left(const cd* x, cd* y, std::int64_t xcols) const;   // Y = A X, X is cols x xcols
  void mm_right(const cd* x, cd* y, std::int64_t xrows) const;  // Y = X A, X is xrows x rows

  CsrMatrix dagger() const;     // conjugate transpose
  CsrMatrix transpose() const;
  CsrMatrix conjugate() const;
  CsrMatrix scaled(cd a) const;

  std::vector<cd> diagonal() const;
  std::vector<cd> to_dense() const;  // col-major
  double frobenius_norm() const;
};

// Accumulating coordinate-format builder; duplicate entries are summed on
// build and entries below drop_tol magnitude are discarded.
class CooBuilder {
 public:
  CooBuilder(std::int64_t rows, std::int64_t cols) : rows_(rows), cols_(cols) {}

  void add(std::int64_t r, std::int64_t c, cd v) {
    if (v == cd{0.0, 0.0}) return;
    entries_.push_back({r, c, v});
  }
  void add_matrix(const CsrMatrix& a, cd scale, std::int64_t row_off = 0,
                  std::int64_t col_off = 0);
  CsrMatrix build(double drop_tol = 0.0);
  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }

 private:
  struct Entry {
    std::int64_t r, c;
    cd v;
  };
  std::int64_t rows_, cols_;
  std::vector<Entry> entries_;
};

CsrMatrix kron(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix matmul(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix add(const CsrMatrix& a, cd alpha, const CsrMatrix& b, cd beta);

}  // namespace vibronic
