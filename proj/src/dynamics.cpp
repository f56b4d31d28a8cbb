#include "vibronic/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "vibronic/kernels.hpp"

namespace vibronic {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kErr[7] = {71.0 / 57600,      0.0,        -71.0 / 16695, 71.0 / 1920,
                            -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double trace_real(const cd* y, std::int64_t dim) {
  double t = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) t += y[i + i * dim].real();
  return t;
}

}  // namespace

std::pair<DensityOperator, Trajectory> evolve(const SuperOperator& l, const DensityOperator& rho0,
                                              double t_final, const EvolveOptions& opt) {
  if (!(t_final > 0.0)) throw NumericalError("evolve: t_final must be positive");
  const std::int64_t dim = l.dim_op();
  const std::size_t n = static_cast<std::size_t>(l.dim_vec());
  if (rho0.dim != dim) throw NumericalError("evolve: dimension mismatch");

  std::vector<cd> y = rho0.m;
  std::vector<std::vector<cd>> k(7, std::vector<cd>(n));
  std::vector<cd> ytmp(n), yerr(n);

  // output grid: t = 0 plus a geometric ladder ending at t_final
  std::vector<double> grid{0.0};
  const int samples = std::max(2, opt.samples);
  for (int i = 0; i < samples - 1; ++i) {
    grid.push_back(t_final * std::pow(10.0, -5.0 * (1.0 - double(i) / (samples - 2))));
  }
  grid.back() = t_final;

  Trajectory traj;
  const auto record = [&](double t) {
    traj.times.push_back(t);
    DensityOperator rho;
    rho.dim = dim;
    rho.m = y;
    double num = 0.0, den = 0.0;
    for (std::int64_t j = 0; j < dim; ++j) {
      for (std::int64_t i = 0; i <= j; ++i) {
        const cd a = rho.m[i + j * dim], b = rho.m[j + i * dim];
        num += (i == j ? 1.0 : 2.0) * std::norm(a - std::conj(b));
        den += (i == j ? 1.0 : 2.0) * std::norm(a);
        const cd avg = 0.5 * (a + std::conj(b));
        rho.m[i + j * dim] = avg;
        rho.m[j + i * dim] = std::conj(avg);
      }
    }
    traj.hermiticity_defect.push_back(den > 0.0 ? std::sqrt(num / den) : 0.0);
    traj.trace_error.push_back(std::abs(trace_real(rho.m.data(), dim) - 1.0));
    if (l.basis()) {
      traj.populations.push_back(electronic_populations(rho, *l.basis()));
      traj.leakage.push_back(edge_mass(rho, *l.basis()));
    }
    return rho;
  };

  record(0.0);
  std::size_t next_sample = 1;

  l.apply_vec(y.data(), k[0].data());  // FSAL seed
  double t = 0.0;
  double h = opt.dt_init;
  if (h <= 0.0) {
    const double rate = std::sqrt(kern::znrm2sq(n, k[0].data()));
    h = std::min(t_final, 0.01 / std::max(rate, 1e-12));
  }

  DensityOperator out;
  while (t < t_final) {
    const double t_target = grid[next_sample];
    if (h > t_target - t) h = t_target - t;
    if (h < 1e-14 * t_final) throw NumericalError("evolve: step size underflow at t=" + std::to_string(t));

    for (int s = 1; s < 7; ++s) {
      std::copy(y.begin(), y.end(), ytmp.begin());
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) kern::zaxpy(n, h * kA[s][j], k[j].data(), ytmp.data());
      }
      l.apply_vec(ytmp.data(), k[s].data());
    }
    // ytmp currently holds the 5th-order solution (stage 7 node == b row)
    std::fill(yerr.begin(), yerr.end(), cd{0.0, 0.0});
    for (int j = 0; j < 6; ++j) {
      if (kErr[j] != 0.0) kern::zaxpy(n, h * kErr[j], k[j].data(), yerr.data());
    }
    kern::zaxpy(n, h * kErr[6], k[6].data(), yerr.data());

    const double err = std::sqrt(kern::znrm2sq(n, yerr.data()));
    const double scale = std::max(1.0, std::sqrt(kern::znrm2sq(n, y.data())));
    const double tol_step = opt.tol * h * scale;
    if (err <= tol_step || h <= 1e-13 * t_final) {
      t += h;
      std::swap(y, ytmp);
      std::swap(k[0], k[6]);  // FSAL
      const double drift = std::abs(trace_real(y.data(), dim) - 1.0);
      if (drift > 1e-6)
        throw NumericalError("evolve: trace drift " + std::to_string(drift) + " at t=" +
                             std::to_string(t));
      while (next_sample < grid.size() && t >= grid[next_sample] - 1e-12 * t_final) {
        out = record(t);
        ++next_sample;
      }
      if (next_sample >= grid.size()) break;
    }
    const double fac = err > 0.0 ? 0.9 * std::pow(tol_step / err, 0.25) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }
  traj.times.back() = t;
  return {std::move(out), std::move(traj)};
}

}  // namespace vibronic
