#include "vibronic/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

namespace vibronic {

namespace {

SearchSpace make_space(bool extended) {
  SearchSpace s;
  s.genes = {
      {"g", 0.0, 6.0},         {"nu1", 1.0, 40.0},      {"nu2", 1.0, 40.0},
      {"gamma1", 0.0, 1.0},    {"gamma2", 0.0, 1.0},    {"Gamma.e", 0.0, 1.0},
      {"Gamma.ct", 0.0, 1.0},  {"alpha.1.ct", -4.0, 4.0}, {"alpha.2.ct", -4.0, 4.0},
      {"beta.e", -1.0, 1.0},   {"beta.ct", -1.0, 1.0},
  };
  if (extended) {
    s.genes.push_back({"alpha.1.g", -4.0, 4.0});
    s.genes.push_back({"alpha.2.g", -4.0, 4.0});
  }
  return s;
}

// SplitMix64-style mixing for per-individual deterministic streams.
std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t z = a ^ ((b + 1) * 0x9e3779b97f4a7c15ull) ^ ((c + 1) * 0xd1b54a32d192ed03ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

SearchSpace SearchSpace::default11() { return make_space(false); }
SearchSpace SearchSpace::extended13() { return make_space(true); }

SearchSpace SearchSpace::by_name(const std::string& name) {
  if (name == "default11") return default11();
  if (name == "extended13") return extended13();
  throw ConfigError("unknown search space mask: " + name);
}

int SearchSpace::find(const std::string& gene_name) const {
  for (std::size_t i = 0; i < genes.size(); ++i)
    if (genes[i].name == gene_name) return static_cast<int>(i);
  return -1;
}

ModelParams apply_genotype(const SearchSpace& space, const std::vector<double>& values,
                           ModelParams base) {
  if (values.size() != space.genes.size())
    throw ConfigError("genotype length does not match search space");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string& n = space.genes[i].name;
    const double v = values[i];
    if (n == "g") base.g = v;
    else if (n == "nu1") base.nu[0] = v;
    else if (n == "nu2") base.nu[1] = v;
    else if (n == "gamma1") base.gamma_vib[0] = v;
    else if (n == "gamma2") base.gamma_vib[1] = v;
    else if (n == "Gamma.e") base.gamma_deph[static_cast<int>(ElectronicState::E)] = v;
    else if (n == "Gamma.ct") base.gamma_deph[static_cast<int>(ElectronicState::CT)] = v;
    else if (n == "alpha.1.ct") base.alpha[0][static_cast<int>(ElectronicState::CT)] = v;
    else if (n == "alpha.2.ct") base.alpha[1][static_cast<int>(ElectronicState::CT)] = v;
    else if (n == "alpha.1.g") base.alpha[0][static_cast<int>(ElectronicState::G)] = v;
    else if (n == "alpha.2.g") base.alpha[1][static_cast<int>(ElectronicState::G)] = v;
    else if (n == "beta.e") base.beta[static_cast<int>(ElectronicState::E)] = v;
    else if (n == "beta.ct") base.beta[static_cast<int>(ElectronicState::CT)] = v;
    else throw ConfigError("unknown gene: " + n);
  }
  for (int mode = 0; mode < 2; ++mode) {
    base.alpha[mode][static_cast<int>(ElectronicState::A)] =
        base.alpha[mode][static_cast<int>(ElectronicState::CT)];
  }
  return base;
}

double fitness(const Genotype& genotype, const SearchSpace& space, const ModelParams& fixed,
               const InitialStateSpec& init, const SolveOptions& solve) {
  try {
    const ModelParams p = apply_genotype(space, genotype.values, fixed);
    p.validate();
    const PipelineResult pipe = compute_functional(p, solve);
    const DensityOperator rho0 = make_initial_state(p, pipe.basis, init);
    const BranchingResult br = branching_probabilities(pipe.functional, rho0);
    return br.p_II / std::max(br.p_I, 1e-12);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[fitness] evaluation scored 0: %s\n", e.what());
    return 0.0;
  }
}

namespace {

Genotype random_genotype(const SearchSpace& space, std::mt19937_64& rng) {
  Genotype g;
  g.values.resize(space.genes.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    std::uniform_real_distribution<double> u(space.genes[i].lo, space.genes[i].hi);
    g.values[i] = u(rng);
  }
  return g;
}

std::vector<int> pick_distinct(std::size_t count, std::size_t total, std::mt19937_64& rng) {
  std::vector<int> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> u(i, total - 1);
    std::swap(idx[i], idx[u(rng)]);
  }
  idx.resize(count);
  return idx;
}

void evaluate_population(std::vector<Genotype>& pop, const SearchSpace& space,
                         const ModelParams& fixed, const InitialStateSpec& init,
                         const SolveOptions& solve, int workers) {
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pop.size()) return;
      if (!pop[i].evaluated) {
        pop[i].fitness = fitness(pop[i], space, fixed, init, solve);
        pop[i].evaluated = true;
      }
    }
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace

GaResult ga_run(const SearchSpace& space, const GaConfig& cfg, const ModelParams& fixed,
                const InitialStateSpec& init, const SolveOptions& solve,
                const std::function<void(const GaHistoryEntry&)>& on_generation) {
  if (cfg.population < 4) throw ConfigError("population must be at least 4");
  const int pop_n = cfg.population;
  const int elites = static_cast<int>(std::lround(cfg.elite_frac * pop_n));
  const int mutants = static_cast<int>(std::lround(cfg.mutation_frac * pop_n));
  const int crossed = pop_n - elites - mutants;
  const int pool_n = static_cast<int>(std::lround(cfg.seed_pool_frac * pop_n));
  const int genes_n = static_cast<int>(space.genes.size());
  const int genes_changed =
      std::max(1, static_cast<int>(std::ceil(cfg.gene_change_frac * genes_n)));
  if (crossed < 0) throw ConfigError("elite and mutation fractions exceed the population");

  std::vector<Genotype> pop(pop_n);
  for (int i = 0; i < pop_n; ++i) {
    std::mt19937_64 rng(mix(cfg.rng_seed, 0, static_cast<std::uint64_t>(i)));
    pop[i] = random_genotype(space, rng);
  }

  GaResult result;
  for (int gen = 0; gen <= cfg.generations; ++gen) {
    evaluate_population(pop, space, fixed, init, solve, cfg.workers);
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Genotype& a, const Genotype& b) { return a.fitness > b.fitness; });

    GaHistoryEntry entry;
    entry.generation = gen;
    entry.best_fitness = pop.front().fitness;
    double mean = 0.0;
    for (const auto& g : pop) mean += g.fitness;
    entry.mean_fitness = mean / pop_n;
    entry.best = pop.front();
    result.history.push_back(entry);
    if (on_generation) on_generation(entry);
    if (gen == cfg.generations) break;

    // Seeding pool: best half of the parents plus fresh random candidates.
    std::vector<Genotype> pool(pop.begin(), pop.begin() + std::min(pool_n, pop_n));
    for (int f = 0; f < cfg.fresh_candidates; ++f) {
      std::mt19937_64 rng(mix(cfg.rng_seed, 1000000 + gen, static_cast<std::uint64_t>(f)));
      pool.push_back(random_genotype(space, rng));
    }

    std::vector<Genotype> next(pop.begin(), pop.begin() + elites);
    next.resize(pop_n);
    for (int s = elites; s < pop_n; ++s) {
      std::mt19937_64 rng(mix(cfg.rng_seed, gen + 1, static_cast<std::uint64_t>(s)));
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      Genotype child;
      if (s < elites + mutants) {
        child = pool[pick(rng)];
        for (int gi : pick_distinct(genes_changed, genes_n, rng)) {
          std::normal_distribution<double> n(0.0, 0.1 * space.genes[gi].range());
          child.values[gi] =
              std::clamp(child.values[gi] + n(rng), space.genes[gi].lo, space.genes[gi].hi);
        }
      } else {
        const std::size_t i1 = pick(rng);
        std::size_t i2 = pick(rng);
        while (i2 == i1 && pool.size() > 1) i2 = pick(rng);
        child = pool[i1];
        for (int gi : pick_distinct(genes_changed, genes_n, rng))
          child.values[gi] = pool[i2].values[gi];
      }
      child.evaluated = false;
      child.fitness = 0.0;
      next[s] = std::move(child);
    }
    pop = std::move(next);
  }

  result.best = result.history.back().best;
  return result;
}

Genotype gradient_refine(const Genotype& start, const SearchSpace& space,
                         const ModelParams& fixed, const InitialStateSpec& init,
                         const SolveOptions& solve, const RefineConfig& cfg) {
  const int genes_n = static_cast<int>(space.genes.size());
  const auto eval = [&](const std::vector<double>& values) {
    Genotype g;
    g.values = values;
    return fitness(g, space, fixed, init, solve);
  };

  Genotype cur = start;
  if (!cur.evaluated) {
    cur.fitness = eval(cur.values);
    cur.evaluated = true;
  }

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Central differences with bound-clipped evaluation points.
    std::vector<double> grad(genes_n, 0.0);
    double slope_max = 0.0;  // |df| per full gene range
    for (int i = 0; i < genes_n; ++i) {
      const Gene& gene = space.genes[i];
      const double h = cfg.rel_step * gene.range();
      auto up = cur.values, dn = cur.values;
      up[i] = std::min(gene.hi, cur.values[i] + h);
      dn[i] = std::max(gene.lo, cur.values[i] - h);
      const double span = up[i] - dn[i];
      if (span <= 0.0) continue;
      grad[i] = (eval(up) - eval(dn)) / span;
      slope_max = std::max(slope_max, std::abs(grad[i]) * gene.range());
    }
    if (slope_max == 0.0) return cur;

    // Initial trial moves the most sensitive gene by 10% of its range.
    double t = 0.1 / slope_max;

    bool improved = false;
    double f_new = cur.fitness;
    std::vector<double> trial(genes_n);
    for (int back = 0; back <= cfg.max_backtracks; ++back, t *= 0.5) {
      for (int i = 0; i < genes_n; ++i) {
        trial[i] = std::clamp(cur.values[i] + t * grad[i] * space.genes[i].range() *
                                                  space.genes[i].range(),
                              space.genes[i].lo, space.genes[i].hi);
      }
      f_new = eval(trial);
      if (f_new > cur.fitness) {
        improved = true;
        break;
      }
    }
    if (!improved) return cur;
    const double gain = (f_new - cur.fitness) / std::max(std::abs(cur.fitness), 1e-300);
    cur.values = trial;
    cur.fitness = f_new;
    if (gain < cfg.rel_gain_stop) return cur;
  }
  return cur;
}

}  // namespace vibronic
