#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vibronic/branching.hpp"

namespace vibronic {

struct Gene {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  double range() const { return hi - lo; }
};

// Bounded search space over a masked subset of the model parameters.
struct SearchSpace {
  std::vector<Gene> genes;

  static SearchSpace default11();   // g, nu1, nu2, gamma1, gamma2, Gamma.e,
                                    // Gamma.ct, alpha.1.ct, alpha.2.ct,
                                    // beta.e, beta.ct
  static SearchSpace extended13();  // + alpha.1.g, alpha.2.g
  static SearchSpace by_name(const std::string& name);

  int find(const std::string& gene_name) const;  // -1 when absent
};

struct Genotype {
  std::vector<double> values;
  double fitness = 0.0;
  bool evaluated = false;
};

struct GaConfig {
  int population = 25;
  double elite_frac = 0.34;
  double mutation_frac = 0.33;
  double gene_change_frac = 0.20;
  double seed_pool_frac = 0.50;
  int fresh_candidates = 3;
  int generations = 10;
  std::uint64_t rng_seed = 0;
  int workers = 1;
};

// Writes genotype values onto a copy of the base parameters. The acceptor
// displacement mirrors the charge-transfer one, matching the load defaults.
ModelParams apply_genotype(const SearchSpace& space, const std::vector<double>& values,
                           ModelParams base);

// P_II / max(P_I, 1e-12) for the given initial state; pipeline failures
// score zero (diagnostic on stderr).
double fitness(const Genotype& genotype, const SearchSpace& space, const ModelParams& fixed,
               const InitialStateSpec& init, const SolveOptions& solve = {});

struct GaHistoryEntry {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Genotype best;
};

struct GaResult {
  Genotype best;
  std::vector<GaHistoryEntry> history;
};

// Elitist genetic search; deterministic under a fixed rng_seed regardless of
// evaluation order (per-individual RNG streams).
GaResult ga_run(const SearchSpace& space, const GaConfig& cfg, const ModelParams& fixed,
                const InitialStateSpec& init, const SolveOptions& solve = {},
                const std::function<void(const GaHistoryEntry&)>& on_generation = {});

struct RefineConfig {
  double rel_step = 1e-3;      // central-difference step, fraction of bound range
  int max_iters = 200;
  int max_backtracks = 20;
  double rel_gain_stop = 1e-6;
};

// Finite-difference ascent with backtracking; never returns a genotype with
// lower fitness than the input.
Genotype gradient_refine(const Genotype& start, const SearchSpace& space,
                         const ModelParams& fixed, const InitialStateSpec& init,
                         const SolveOptions& solve = {}, const RefineConfig& cfg = {});

}  // namespace vibronic
