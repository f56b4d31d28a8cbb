#pragma once

#include <vector>

#include "vibronic/liouvillian.hpp"
#include "vibronic/states.hpp"

namespace vibronic {

struct Trajectory {
  std::vector<double> times;
  std::vector<std::array<double, 4>> populations;  // per electronic surface (needs basis)
  std::vector<double> leakage;                     // top-two Fock level mass
  std::vector<double> trace_error;
  std::vector<double> hermiticity_defect;
};

struct EvolveOptions {
  double tol = 1e-8;   // local error per unit time
  int samples = 64;    // geometric output grid
  double dt_init = 0.0;  // 0: automatic
};

// Adaptive Dormand-Prince 5(4) integration of d vec(rho)/dt = L vec(rho).
// Aborts when the trace drifts beyond 1e-6; output samples are symmetrized
// with the defect recorded in the trajectory.
std::pair<DensityOperator, Trajectory> evolve(const SuperOperator& l, const DensityOperator& rho0,
                                              double t_final, const EvolveOptions& opt = {});

}  // namespace vibronic
