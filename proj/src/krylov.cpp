#include "vibronic/krylov.hpp"

#include <algorithm>
#include <cmath>

#include "vibronic/kernels.hpp"

namespace vibronic {

namespace {

// y = M^{-1} x, elementwise; identity when no preconditioner is set.
void precondition(const std::vector<cd>& inv_diag, const cd* x, cd* y, std::size_t n) {
  std::copy(x, x + n, y);
  if (!inv_diag.empty()) kern::zhad(n, inv_diag.data(), y);
}

}  // namespace

KrylovResult gmres(const std::function<void(const cd*, cd*)>& apply_a,
                   const std::vector<cd>& inv_diag, const cd* b, cd* x, std::int64_t n_,
                   const KrylovOptions& opt) {
  const std::size_t n = static_cast<std::size_t>(n_);
  const int m = std::max(1, opt.restart);
  KrylovResult res;

  const double bnorm = std::sqrt(kern::znrm2sq(n, b));
  if (bnorm == 0.0) {
    std::fill(x, x + n, cd{0.0, 0.0});
    res.converged = true;
    return res;
  }

  std::vector<std::vector<cd>> v(m + 1, std::vector<cd>(n));
  std::vector<cd> h(static_cast<std::size_t>(m + 1) * m);  // col-major Hessenberg
  std::vector<cd> cs(m), g(m + 1);
  std::vector<double> sn(m);
  std::vector<cd> r(n), z(n), w(n);

  const auto true_residual = [&](double& out_norm) {
    apply_a(x, r.data());
    kern::zaxpby(n, cd{1.0, 0.0}, b, cd{-1.0, 0.0}, r.data());
    out_norm = std::sqrt(kern::znrm2sq(n, r.data()));
  };

  double rnorm = 0.0;
  true_residual(rnorm);

  while (res.iterations < opt.max_iters) {
    if (rnorm / bnorm <= opt.tol) break;
    // start a cycle
    std::copy(r.begin(), r.end(), v[0].begin());
    kern::zscal(n, cd{1.0 / rnorm, 0.0}, v[0].data());
    std::fill(g.begin(), g.end(), cd{0.0, 0.0});
    g[0] = rnorm;

    int j = 0;
    bool breakdown = false;
    for (; j < m && res.iterations < opt.max_iters; ++j) {
      precondition(inv_diag, v[j].data(), z.data(), n);
      apply_a(z.data(), w.data());
      // modified Gram-Schmidt
      for (int i = 0; i <= j; ++i) {
        const cd hij = kern::zdotc(n, v[i].data(), w.data());
        h[i + j * (m + 1)] = hij;
        kern::zaxpy(n, -hij, v[i].data(), w.data());
      }
      const double wnorm = std::sqrt(kern::znrm2sq(n, w.data()));
      h[(j + 1) + j * (m + 1)] = wnorm;
      if (wnorm > 1e-300) {
        std::copy(w.begin(), w.end(), v[j + 1].begin());
        kern::zscal(n, cd{1.0 / wnorm, 0.0}, v[j + 1].data());
      } else {
        breakdown = true;
      }
      // apply accumulated Givens rotations to the new column
      for (int i = 0; i < j; ++i) {
        const cd t = h[i + j * (m + 1)];
        h[i + j * (m + 1)] = std::conj(cs[i]) * t + sn[i] * h[(i + 1) + j * (m + 1)];
        h[(i + 1) + j * (m + 1)] = -sn[i] * t + cs[i] * h[(i + 1) + j * (m + 1)];
      }
      // new rotation zeroing the subdiagonal
      const cd hjj = h[j + j * (m + 1)];
      const double hs = std::abs(h[(j + 1) + j * (m + 1)]);
      const double denom = std::sqrt(std::norm(hjj) + hs * hs);
      if (denom == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = hjj / denom;
        sn[j] = hs / denom;
      }
      h[j + j * (m + 1)] = std::conj(cs[j]) * hjj + sn[j] * h[(j + 1) + j * (m + 1)];
      h[(j + 1) + j * (m + 1)] = 0.0;
      const cd gj = g[j];
      g[j] = std::conj(cs[j]) * gj;
      g[j + 1] = -sn[j] * gj;
      ++res.iterations;
      if (std::abs(g[j + 1]) / bnorm <= opt.tol || breakdown) {
        ++j;
        break;
      }
    }
    // back substitution on the rotated Hessenberg
    std::vector<cd> y(j);
    for (int i = j - 1; i >= 0; --i) {
      cd s = g[i];
      for (int k = i + 1; k < j; ++k) s -= h[i + k * (m + 1)] * y[k];
      y[i] = s / h[i + i * (m + 1)];
    }
    std::fill(w.begin(), w.end(), cd{0.0, 0.0});
    for (int i = 0; i < j; ++i) kern::zaxpy(n, y[i], v[i].data(), w.data());
    precondition(inv_diag, w.data(), z.data(), n);
    kern::zaxpy(n, cd{1.0, 0.0}, z.data(), x);

    true_residual(rnorm);
    res.restart_residuals.push_back(rnorm);
    if (breakdown) break;
  }

  res.resid_abs = rnorm;
  res.resid_rel = rnorm / bnorm;
  res.converged = res.resid_rel <= opt.tol;
  return res;
}

}  // namespace vibronic
