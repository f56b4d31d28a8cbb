#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace vibronic {

using cd = std::complex<double>;

struct KrylovOptions {
  double tol = 1e-8;      // relative residual target
  int max_iters = 20000;  // total Krylov steps across restarts
  int restart = 60;
};

struct KrylovResult {
  int iterations = 0;
  double resid_abs = 0.0;
  double resid_rel = 0.0;
  bool converged = false;
  std::vector<double> restart_residuals;  // true residual after each cycle
};

// Restarted GMRES with right diagonal (Jacobi) preconditioning for general
// non-symmetric complex systems A x = b. `inv_diag` holds 1/diag(A); pass an
// empty vector to disable preconditioning. `x` carries the initial guess and
// the solution.
KrylovResult gmres(const std::function<void(const cd*, cd*)>& apply_a,
                   const std::vector<cd>& inv_diag, const cd* b, cd* x, std::int64_t n,
                   const KrylovOptions& opt = {});

}  // namespace vibronic
