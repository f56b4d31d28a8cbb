#include "vibronic/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vibronic/kernels.hpp"

namespace vibronic {

CsrMatrix CsrMatrix::identity(std::int64_t n) {
  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col.resize(n);
  m.val.assign(n, cd{1.0, 0.0});
  for (std::int64_t i = 0; i <= n; ++i) m.row_ptr[i] = i;
  for (std::int64_t i = 0; i < n; ++i) m.col[i] = static_cast<std::int32_t>(i);
  return m;
}

CsrMatrix CsrMatrix::zero(std::int64_t rows, std::int64_t cols) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  return m;
}

void CsrMatrix::mv(const cd* x, cd* y) const {
  kern::csr_zmv(static_cast<std::size_t>(rows), row_ptr.data(), col.data(), val.data(), x, y);
}

void CsrMatrix::mm_left(const cd* x, cd* y, std::int64_t xcols) const {
  for (std::int64_t j = 0; j < xcols; ++j) mv(x + j * cols, y + j * rows);
}

void CsrMatrix::mm_right(const cd* x, cd* y, std::int64_t xrows) const {
  std::fill(y, y + xrows * cols, cd{0.0, 0.0});
  for (std::int64_t k = 0; k < rows; ++k) {
    for (std::int64_t p = row_ptr[k]; p < row_ptr[k + 1]; ++p) {
      kern::zaxpy(static_cast<std::size_t>(xrows), val[p], x + k * xrows,
                  y + static_cast<std::int64_t>(col[p]) * xrows);
    }
  }
}

namespace {

CsrMatrix transpose_impl(const CsrMatrix& a, bool conj) {
  CsrMatrix t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.row_ptr.assign(t.rows + 1, 0);
  t.col.resize(a.val.size());
  t.val.resize(a.val.size());
  for (auto c : a.col) ++t.row_ptr[c + 1];
  for (std::int64_t i = 0; i < t.rows; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const std::int64_t dst = next[a.col[p]]++;
      t.col[dst] = static_cast<std::int32_t>(r);
      t.val[dst] = conj ? std::conj(a.val[p]) : a.val[p];
    }
  }
  return t;
}

}  // namespace

CsrMatrix CsrMatrix::dagger() const { return transpose_impl(*this, true); }
CsrMatrix CsrMatrix::transpose() const { return transpose_impl(*this, false); }

CsrMatrix CsrMatrix::conjugate() const {
  CsrMatrix m = *this;
  for (auto& v : m.val) v = std::conj(v);
  return m;
}

CsrMatrix CsrMatrix::scaled(cd a) const {
  CsrMatrix m = *this;
  for (auto& v : m.val) v *= a;
  return m;
}

std::vector<cd> CsrMatrix::diagonal() const {
  std::vector<cd> d(rows, cd{0.0, 0.0});
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col[p] == r) d[r] += val[p];
    }
  }
  return d;
}

std::vector<cd> CsrMatrix::to_dense() const {
  std::vector<cd> d(rows * cols, cd{0.0, 0.0});
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) d[r + col[p] * rows] += val[p];
  }
  return d;
}

double CsrMatrix::frobenius_norm() const {
  return std::sqrt(kern::znrm2sq(val.size(), val.data()));
}

void CooBuilder::add_matrix(const CsrMatrix& a, cd scale, std::int64_t row_off,
                            std::int64_t col_off) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      add(row_off + r, col_off + a.col[p], scale * a.val[p]);
    }
  }
}

CsrMatrix CooBuilder::build(double drop_tol) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  CsrMatrix m;
  m.rows = rows_;
  m.cols = cols_;
  m.row_ptr.assign(rows_ + 1, 0);
  m.col.reserve(entries_.size());
  m.val.reserve(entries_.size());
  std::size_t i = 0;
  while (i < entries_.size()) {
    const std::int64_t r = entries_[i].r, c = entries_[i].c;
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw std::out_of_range("CooBuilder: entry outside matrix shape");
    cd v{0.0, 0.0};
    while (i < entries_.size() && entries_[i].r == r && entries_[i].c == c) v += entries_[i++].v;
    if (std::abs(v) > drop_tol) {
      m.col.push_back(static_cast<std::int32_t>(c));
      m.val.push_back(v);
      ++m.row_ptr[r + 1];
    }
  }
  for (std::int64_t r = 0; r < rows_; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  entries_.clear();
  entries_.shrink_to_fit();
  return m;
}

CsrMatrix kron(const CsrMatrix& a, const CsrMatrix& b) {
  CsrMatrix m;
  m.rows = a.rows * b.rows;
  m.cols = a.cols * b.cols;
  m.row_ptr.resize(m.rows + 1);
  m.row_ptr[0] = 0;
  m.col.reserve(a.nnz() * b.nnz());
  m.val.reserve(a.nnz() * b.nnz());
  for (std::int64_t ra = 0; ra < a.rows; ++ra) {
    for (std::int64_t rb = 0; rb < b.rows; ++rb) {
      for (std::int64_t pa = a.row_ptr[ra]; pa < a.row_ptr[ra + 1]; ++pa) {
        for (std::int64_t pb = b.row_ptr[rb]; pb < b.row_ptr[rb + 1]; ++pb) {
          m.col.push_back(
              static_cast<std::int32_t>(static_cast<std::int64_t>(a.col[pa]) * b.cols + b.col[pb]));
          m.val.push_back(a.val[pa] * b.val[pb]);
        }
      }
      m.row_ptr[ra * b.rows + rb + 1] = static_cast<std::int64_t>(m.val.size());
    }
  }
  return m;
}

CsrMatrix matmul(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
  CooBuilder out(a.rows, b.cols);
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::int64_t pa = a.row_ptr[r]; pa < a.row_ptr[r + 1]; ++pa) {
      const std::int64_t k = a.col[pa];
      for (std::int64_t pb = b.row_ptr[k]; pb < b.row_ptr[k + 1]; ++pb) {
        out.add(r, b.col[pb], a.val[pa] * b.val[pb]);
      }
    }
  }
  return out.build();
}

CsrMatrix add(const CsrMatrix& a, cd alpha, const CsrMatrix& b, cd beta) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("add: shape mismatch");
  CooBuilder out(a.rows, a.cols);
  out.add_matrix(a, alpha);
  out.add_matrix(b, beta);
  return out.build();
}

}  // namespace vibronic
