#include "vibronic/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vibronic/blas.hpp"
#include "vibronic/branching.hpp"
#include "vibronic/dynamics.hpp"
#include "vibronic/kernels.hpp"
#include "vibronic/optimizer.hpp"

namespace vibronic::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// --- minimal SVG emission with a fixed colormap ---------------------------

struct Rgb {
  int r, g, b;
};

// Fixed viridis-like ramp.
Rgb colormap(double t) {
  static const Rgb stops[] = {{68, 1, 84},   {59, 82, 139},  {33, 145, 140},
                              {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 3.999;
  const int i = static_cast<int>(t);
  const double f = t - i;
  const auto mixc = [f](int a, int b) { return static_cast<int>(a + f * (b - a)); };
  return {mixc(stops[i].r, stops[i + 1].r), mixc(stops[i].g, stops[i + 1].g),
          mixc(stops[i].b, stops[i + 1].b)};
}

void write_heatmap_svg(const std::string& path, const std::vector<std::vector<double>>& grid,
                       const std::string& title) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  const int ny = static_cast<int>(grid.size());
  const int nx = ny ? static_cast<int>(grid[0].size()) : 0;
  const int cell = 24, margin = 40;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << nx * cell + 2 * margin
      << "' height='" << ny * cell + 2 * margin << "'>\n";
  out << "<text x='" << margin << "' y='20'>" << title << "</text>\n";
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const Rgb c = colormap(grid[y][x]);
      out << "<rect x='" << margin + x * cell << "' y='" << margin + (ny - 1 - y) * cell
          << "' width='" << cell << "' height='" << cell << "' fill='rgb(" << c.r << "," << c.g
          << "," << c.b << ")'/>\n";
    }
  }
  out << "</svg>\n";
}

void write_line_svg(const std::string& path, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& series, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  const int w = 640, h = 400, margin = 50;
  double xmin = xs.front(), xmax = xs.back(), ymin = 0.0, ymax = 0.0;
  for (const auto& s : series)
    for (double v : s) ymax = std::max(ymax, v);
  if (ymax <= ymin) ymax = ymin + 1.0;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<text x='" << margin << "' y='20'>" << title << "</text>\n";
  out << "<rect x='" << margin << "' y='" << margin << "' width='" << w - 2 * margin
      << "' height='" << h - 2 * margin << "' fill='none' stroke='black'/>\n";
  const char* colors[] = {"#3b528b", "#21918c", "#5ec962", "#fde725", "#440154"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill='none' stroke='" << colors[s % 5] << "' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double px = margin + (xs[i] - xmin) / (xmax - xmin + 1e-300) * (w - 2 * margin);
      const double py = h - margin - (series[s][i] - ymin) / (ymax - ymin) * (h - 2 * margin);
      out << px << "," << py << " ";
    }
    out << "'/>\n";
  }
  out << "</svg>\n";
}

// --- config schema ---------------------------------------------------------

const std::set<std::string>& cli_keys() {
  static const std::set<std::string> keys{
      "seed",         "init.kind",      "init.n1",        "init.n2",
      "init.offset2", "solver.tol",     "solver.max_iters", "solver.restart",
      "solver.force_full", "ga.population", "ga.generations", "ga.elite_frac",
      "ga.mutation_frac", "ga.gene_change_frac", "ga.seed_pool_frac", "ga.fresh_candidates",
      "ga.mask",      "scan.n1_count",  "scan.n2_count",  "scan.parent_n2_count",
      "dyn.t_final",  "dyn.tol",        "dyn.samples",    "conv.truncs",
      "conv.max_dimvec"};
  return keys;
}

void check_schema(const Config& cfg) {
  for (const auto& [k, v] : cfg.entries()) {
    if (!is_model_key(k) && !cli_keys().count(k)) throw ConfigError("unknown key: " + k);
  }
}

InitialStateSpec parse_init(const Config& cfg) {
  InitialStateSpec spec;
  const std::string kind = cfg.get_string_or("init.kind", "level");
  if (kind == "cluster") {
    spec.kind = InitialStateSpec::Kind::Cluster;
    spec.n1 = static_cast<int>(cfg.get_int_or("init.n1", 1));
    spec.n2 = static_cast<int>(cfg.get_int_or("init.n2", 1));
    spec.offset2 = static_cast<int>(cfg.get_int_or("init.offset2", 0));
  } else if (kind == "level") {
    spec.kind = InitialStateSpec::Kind::SharedLevel;
    spec.n1 = static_cast<int>(cfg.get_int_or("init.n1", 0));
    spec.n2 = static_cast<int>(cfg.get_int_or("init.n2", 0));
  } else if (kind == "parent") {
    spec.kind = InitialStateSpec::Kind::ParentLevel;
    spec.n1 = static_cast<int>(cfg.get_int_or("init.n1", 0));
    spec.n2 = static_cast<int>(cfg.get_int_or("init.n2", 0));
  } else {
    throw ConfigError("init.kind must be cluster, level or parent");
  }
  return spec;
}

SolveOptions parse_solve(const Config& cfg) {
  SolveOptions s;
  s.tol = cfg.get_real_or("solver.tol", 1e-8);
  s.max_iters = static_cast<int>(cfg.get_int_or("solver.max_iters", 20000));
  s.restart = static_cast<int>(cfg.get_int_or("solver.restart", 60));
  s.force_full_space = cfg.get_bool_or("solver.force_full", false);
  return s;
}

struct Context {
  Config cfg;
  ModelParams params;
  SolveOptions solve;
  std::string out_dir;
  bool plot = false;
  int workers = 1;
};

Context make_context(const CliOptions& opt) {
  Context ctx;
  ctx.cfg = Config::load_file(opt.config_path);
  ctx.cfg.apply_overrides(opt.overrides);
  check_schema(ctx.cfg);
  Config model_only;
  for (const auto& [k, v] : ctx.cfg.entries())
    if (is_model_key(k)) model_only.set(k, v);
  ctx.params = load_model(model_only);
  ctx.solve = parse_solve(ctx.cfg);
  ctx.out_dir = opt.out_dir;
  ctx.plot = opt.plot;
  ctx.workers = opt.workers > 0 ? opt.workers
                                : std::max(1u, std::thread::hardware_concurrency());
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

std::string out_path(const Context& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

// --- commands --------------------------------------------------------------

int cmd_branching(const Context& ctx) {
  const PipelineResult pipe = compute_functional(ctx.params, ctx.solve);
  const DensityOperator rho0 = make_initial_state(ctx.params, pipe.basis, parse_init(ctx.cfg));
  const BranchingResult br = branching_probabilities(pipe.functional, rho0);

  CsvWriter csv(out_path(ctx, "branching.csv"),
                {"p_I", "p_II", "residual", "iterations", "leakage_flag"});
  csv.row({fmt(br.p_I), fmt(br.p_II), fmt(pipe.functional.residual_rel),
           std::to_string(pipe.functional.solver_iters), br.leakage_flag ? "1" : "0"});
  std::printf("p_I = %.6f  p_II = %.6f  (residual %.3e, %d iterations, method %s)\n", br.p_I,
              br.p_II, pipe.functional.residual_rel, pipe.functional.solver_iters,
              pipe.functional.method.c_str());
  if (!pipe.steady_warning.empty())
    std::fprintf(stderr, "note: steady-state construction skipped: %s\n",
                 pipe.steady_warning.c_str());
  if (br.leakage_flag)
    std::fprintf(stderr,
                 "warning: initial state touches the top Fock levels; increase trunc1/trunc2\n");
  return 0;
}

int cmd_scan_levels(const Context& ctx) {
  const int n1_count = static_cast<int>(ctx.cfg.get_int_or("scan.n1_count", 11));
  const int n2_count = static_cast<int>(ctx.cfg.get_int_or("scan.n2_count", 16));
  const VibronicBasis basis = ctx.params.basis();
  if (n1_count > basis.trunc[0] || n2_count > basis.trunc[1])
    throw TruncationError("scan range exceeds truncation");

  const PipelineResult pipe = compute_functional(ctx.params, ctx.solve);
  CsvWriter csv(out_path(ctx, "scan_levels.csv"), {"n1", "n2", "p_II"});
  std::vector<std::vector<double>> grid(n2_count, std::vector<double>(n1_count));
  for (int n1 = 0; n1 < n1_count; ++n1) {
    for (int n2 = 0; n2 < n2_count; ++n2) {
      // One adjoint solve serves the whole grid; a pure shared-basis level
      // pairs with the diagonal entry of the functional.
      const std::int64_t i = basis.index_of(ElectronicState::E, n1, n2);
      const double p = std::clamp(pipe.functional.psi[i + i * pipe.functional.dim].real(), 0.0, 1.0);
      csv.row({std::to_string(n1), std::to_string(n2), fmt(p)});
      grid[n2][n1] = p;
    }
  }
  if (ctx.plot) write_heatmap_svg(out_path(ctx, "scan_levels.svg"), grid, "p_II per |e,n1,n2>");
  return 0;
}

int cmd_scan_parent(const Context& ctx) {
  const int n2_count = static_cast<int>(ctx.cfg.get_int_or("scan.parent_n2_count", 9));
  const PipelineResult pipe = compute_functional(ctx.params, ctx.solve);
  CsvWriter csv(out_path(ctx, "scan_parent.csv"), {"n2", "p_II"});
  std::vector<double> xs, ps;
  for (int n2 = 0; n2 < n2_count; ++n2) {
    const DensityOperator rho0 = parent_level_state(ctx.params, pipe.basis, 0, n2);
    const BranchingResult br = branching_probabilities(pipe.functional, rho0);
    csv.row({std::to_string(n2), fmt(br.p_II)});
    xs.push_back(n2);
    ps.push_back(br.p_II);
  }
  if (ctx.plot && !xs.empty())
    write_line_svg(out_path(ctx, "scan_parent.svg"), xs, {ps}, "p_II vs parent n2");
  return 0;
}

int cmd_eigen(const Context& ctx) {
  const PipelineResult pipe = compute_functional(ctx.params, ctx.solve);
  const CsrMatrix h = build_hamiltonian(ctx.params, pipe.basis);
  const auto records = eigen_analysis(h, pipe.functional, pipe.basis);
  const EigenstateRecord* drain = nullptr;
  try {
    drain = &find_drain_state(records, ctx.params);
  } catch (const NumericalError&) {
    std::fprintf(stderr, "warning: no drain state found\n");
  }
  CsvWriter csv(out_path(ctx, "eigen.csv"), {"energy", "loc_e", "loc_ct", "p_II", "drain_flag"});
  for (const auto& r : records) {
    csv.row({fmt(r.energy), fmt(r.loc_e), fmt(r.loc_ct), fmt(r.p_II),
             (drain == &r) ? "1" : "0"});
  }
  if (drain)
    std::printf("drain state: energy %.6f, loc_ct %.4f, p_II %.4f\n", drain->energy,
                drain->loc_ct, drain->p_II);
  return 0;
}

json genotype_json(const SearchSpace& space, const Genotype& g) {
  json j = json::object();
  for (std::size_t i = 0; i < space.genes.size(); ++i) j[space.genes[i].name] = g.values[i];
  return j;
}

int cmd_optimize(const Context& ctx) {
  if (!ctx.cfg.has("seed"))
    throw ConfigError("missing required key: seed (optimization must be reproducible)");
  GaConfig ga;
  ga.rng_seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed"));
  ga.population = static_cast<int>(ctx.cfg.get_int_or("ga.population", 25));
  ga.generations = static_cast<int>(ctx.cfg.get_int_or("ga.generations", 10));
  ga.elite_frac = ctx.cfg.get_real_or("ga.elite_frac", 0.34);
  ga.mutation_frac = ctx.cfg.get_real_or("ga.mutation_frac", 0.33);
  ga.gene_change_frac = ctx.cfg.get_real_or("ga.gene_change_frac", 0.20);
  ga.seed_pool_frac = ctx.cfg.get_real_or("ga.seed_pool_frac", 0.50);
  ga.fresh_candidates = static_cast<int>(ctx.cfg.get_int_or("ga.fresh_candidates", 3));
  ga.workers = ctx.workers;
  if (ga.workers > 1) blas::set_threads(1);

  const SearchSpace space = SearchSpace::by_name(ctx.cfg.get_string_or("ga.mask", "default11"));
  const InitialStateSpec init = parse_init(ctx.cfg);

  std::ofstream checkpoint(out_path(ctx, "checkpoint.jsonl"));
  if (!checkpoint) throw ConfigError("cannot open checkpoint file");
  const auto on_gen = [&](const GaHistoryEntry& e) {
    json j{{"generation", e.generation},
           {"best_fitness", e.best_fitness},
           {"mean_fitness", e.mean_fitness},
           {"genotype", genotype_json(space, e.best)}};
    checkpoint << j.dump() << "\n";
    checkpoint.flush();
    std::printf("generation %3d: best %.6f mean %.6f\n", e.generation, e.best_fitness,
                e.mean_fitness);
  };

  const GaResult res = ga_run(space, ga, ctx.params, init, ctx.solve, on_gen);
  const Genotype refined = gradient_refine(res.best, space, ctx.params, init, ctx.solve);
  const ModelParams best_params = apply_genotype(space, refined.values, ctx.params);
  const ResonanceReport reso = verify_resonance(best_params);

  json report{{"best_genotype", genotype_json(space, refined)},
              {"ga_fitness", res.best.fitness},
              {"refined_fitness", refined.fitness},
              {"resonance",
               {{"kappa", reso.kappa},
                {"swapped", reso.swapped},
                {"mismatch", reso.mismatch},
                {"matched_value", reso.matched_value}}},
              {"history_best", json::array()}};
  for (const auto& e : res.history) report["history_best"].push_back(e.best_fitness);
  std::ofstream(out_path(ctx, "report.json")) << report.dump(2) << "\n";

  std::printf("GA best fitness %.6f, refined %.6f\n", res.best.fitness, refined.fitness);
  std::printf("resonance: kappa=%d%s mismatch=%.3e\n", reso.kappa,
              reso.swapped ? " (modes swapped)" : "", reso.mismatch);
  if (ctx.plot) {
    std::vector<double> xs, best;
    for (const auto& e : res.history) {
      xs.push_back(e.generation);
      best.push_back(e.best_fitness);
    }
    write_line_svg(out_path(ctx, "optimize.svg"), xs, {best}, "best fitness per generation");
  }
  return 0;
}

int cmd_propagate(const Context& ctx) {
  const SuperOperator l = assemble_model(ctx.params);
  const DensityOperator rho0 =
      make_initial_state(ctx.params, ctx.params.basis(), parse_init(ctx.cfg));
  EvolveOptions eopt;
  const double default_t =
      10.0 / std::max(std::min(ctx.params.rate_sep, ctx.params.rate_rec), 1e-12);
  const double t_final = ctx.cfg.get_real_or("dyn.t_final", default_t);
  eopt.tol = ctx.cfg.get_real_or("dyn.tol", 1e-8);
  eopt.samples = static_cast<int>(ctx.cfg.get_int_or("dyn.samples", 64));
  const auto [rho_t, traj] = evolve(l, rho0, t_final, eopt);

  CsvWriter csv(out_path(ctx, "propagate.csv"),
                {"t", "pop_g", "pop_e", "pop_ct", "pop_a", "leakage", "trace_error",
                 "hermiticity_defect"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    csv.row({fmt(traj.times[i]), fmt(traj.populations[i][0]), fmt(traj.populations[i][1]),
             fmt(traj.populations[i][2]), fmt(traj.populations[i][3]), fmt(traj.leakage[i]),
             fmt(traj.trace_error[i]), fmt(traj.hermiticity_defect[i])});
  }
  if (ctx.plot) {
    std::vector<std::vector<double>> series(4);
    for (const auto& p : traj.populations)
      for (int z = 0; z < 4; ++z) series[z].push_back(p[z]);
    write_line_svg(out_path(ctx, "propagate.svg"), traj.times, series,
                   "electronic populations");
  }
  return 0;
}

int cmd_converge_trunc(const Context& ctx) {
  const std::string list = ctx.cfg.get_string_or("conv.truncs", "");
  if (list.empty()) throw ConfigError("missing required key: conv.truncs");
  const std::int64_t max_dimvec = ctx.cfg.get_int_or("conv.max_dimvec", 16000000);
  std::vector<std::array<int, 2>> rungs;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw ConfigError("conv.truncs entries must look like M1xM2");
    rungs.push_back({std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))});
  }

  CsvWriter csv(out_path(ctx, "converge_trunc.csv"),
                {"M1", "M2", "p_II", "delta_from_previous", "error"});
  const InitialStateSpec init = parse_init(ctx.cfg);
  double prev = 0.0;
  bool have_prev = false;
  for (const auto& rung : rungs) {
    ModelParams p = ctx.params;
    p.trunc = rung;
    const std::int64_t dim = p.basis().dim();
    try {
      if (dim * dim > max_dimvec)
        throw NumericalError("superoperator dimension " + std::to_string(dim * dim) +
                             " exceeds conv.max_dimvec");
      const PipelineResult pipe = compute_functional(p, ctx.solve);
      const DensityOperator rho0 = make_initial_state(p, pipe.basis, init);
      const BranchingResult br = branching_probabilities(pipe.functional, rho0);
      const double delta = have_prev ? br.p_II - prev : 0.0;
      csv.row({std::to_string(rung[0]), std::to_string(rung[1]), fmt(br.p_II),
               have_prev ? fmt(delta) : "", ""});
      if (have_prev && std::abs(delta) < 1e-3)
        std::printf("converged at %dx%d (delta %.2e)\n", rung[0], rung[1], delta);
      prev = br.p_II;
      have_prev = true;
    } catch (const std::exception& e) {
      csv.row({std::to_string(rung[0]), std::to_string(rung[1]), "", "", e.what()});
    }
  }
  return 0;
}

}  // namespace

int run_command(const CliOptions& opt) {
  try {
    const Context ctx = make_context(opt);
    if (opt.command == "branching") return cmd_branching(ctx);
    if (opt.command == "scan-levels") return cmd_scan_levels(ctx);
    if (opt.command == "scan-parent") return cmd_scan_parent(ctx);
    if (opt.command == "eigen") return cmd_eigen(ctx);
    if (opt.command == "optimize") return cmd_optimize(ctx);
    if (opt.command == "propagate") return cmd_propagate(ctx);
    if (opt.command == "converge-trunc") return cmd_converge_trunc(ctx);
    std::fprintf(stderr, "unknown command: %s\n", opt.command.c_str());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"vibronic: charge-separation branching simulator and environment optimizer"};
  app.require_subcommand(1);

  CliOptions opt;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "config file path")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--set", opt.overrides, "override config entries, key=value");
    sub->add_option("--workers", opt.workers, "worker threads (0: hardware)");
    sub->add_flag("--plot", opt.plot, "emit SVG plots next to the CSV output");
  };
  for (const char* name : {"branching", "scan-levels", "scan-parent", "eigen", "optimize",
                           "propagate", "converge-trunc"}) {
    add_common(app.add_subcommand(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  opt.command = app.get_subcommands().front()->get_name();
  return run_command(opt);
}

}  // namespace vibronic::cli
