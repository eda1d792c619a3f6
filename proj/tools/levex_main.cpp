// Command line front end: benchmark ladders, one-off extensions from field
// files, extension-vs-extrapolation comparisons, and the solidification demo.
//
// All result tables go to stdout as CSV with %.17g floats so reruns are byte
// identical; wall-clock timings go to stderr as '#' comment lines. Exit codes:
// 0 success, 1 a solve failed to converge or a model step failed, 2 bad usage
// or unreadable/malformed input.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>

#include "levex/problems.hpp"
#include "levex/stefan.hpp"

using namespace levex;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void note_timing(const std::string& label, double s) {
  std::fprintf(stderr, "# %s: %.3f s\n", label.c_str(), s);
}

BcKind parse_bc_kind(const std::string& s) {
  if (s == "dirichlet") return BcKind::DirichletZero;
  if (s == "neumann") return BcKind::NeumannZero;
  if (s == "periodic") return BcKind::Periodic;
  throw std::invalid_argument("unknown boundary kind '" + s +
                              "' (expected dirichlet, neumann or periodic)");
}

// "neumann" applies to every face; "neumann,periodic[,dirichlet]" is per axis.
BcSpec parse_bc_spec(const std::string& s, int ndim) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') { parts.push_back(cur); cur.clear(); }
    else cur.push_back(c);
  }
  parts.push_back(cur);
  if (int(parts.size()) != 1 && int(parts.size()) != ndim)
    throw std::invalid_argument("--bc needs one kind or one per axis (" +
                                std::to_string(ndim) + ")");
  BcSpec bc;
  if (parts.size() == 1) bc = BcSpec::uniform(parse_bc_kind(parts[0]));
  else
    for (int a = 0; a < ndim; ++a) {
      BcKind k = parse_bc_kind(parts[std::size_t(a)]);
      bc.faces[std::size_t(a)] = {k, k};
    }
  bc.validate(ndim);
  return bc;
}

std::string grid_tag(const Grid& g) {
  std::string t = "n" + std::to_string(g.dims[0]) + "x" + std::to_string(g.dims[1]);
  if (g.ndim > 2) t += "x" + std::to_string(g.dims[2]);
  return t;
}

ExtendParams make_params(double tol, int maxit, const std::string& method, int dense_cap) {
  ExtendParams p;
  p.tol = tol;
  p.maxit = maxit;
  p.dense_cap = dense_cap;
  if (method == "pcg") p.method = ExtendMethod::PcgFastPoisson;
  else if (method == "dense") p.method = ExtendMethod::Dense;
  else throw std::invalid_argument("--method must be pcg or dense");
  return p;
}

// ---- example ----

struct ExampleArgs {
  int which = 1;
  std::string bc;
  std::vector<int> grids;
  bool half = false, channel = false;
  int terms = 10;
  std::uint64_t seed = 4;
  double tol = 1e-6;
  int maxit = 0;
  std::string method = "pcg";
  int dense_cap = 4096;
  double band_cells = 0.0;  // 0: keep each problem's own default
  std::string emit_inputs, out_dir;
};

ExtensionProblem build_example(const ExampleArgs& a, int n) {
  auto band_or = [&](double dflt) { return a.band_cells > 0.0 ? a.band_cells : dflt; };
  switch (a.which) {
    case 1: {
      std::string bc = a.bc.empty() ? "dirichlet" : a.bc;
      double cells = band_or(4.0);
      if (bc == "dirichlet") return example1(n, Example1Bc::Dirichlet, cells);
      if (bc == "neumann") return example1(n, Example1Bc::Neumann, cells);
      if (bc == "mixed") return example1(n, Example1Bc::Mixed, cells);
      throw std::invalid_argument("example 1 takes --bc dirichlet, neumann or mixed");
    }
    case 2:
      if (!a.bc.empty() && a.bc != "periodic")
        throw std::invalid_argument("example 2 is periodic only");
      return example2(n, band_or(1.0));
    case 3: {
      if (a.half) {
        if (!a.bc.empty() && a.bc != "neumann")
          throw std::invalid_argument("the half grid variant is neumann only");
        return example3_half(n, band_or(4.0));
      }
      std::string bc = a.bc.empty() ? "neumann" : a.bc;
      return example3(n, parse_bc_kind(bc), band_or(4.0));
    }
    case 4: {
      if (!a.bc.empty())
        throw std::invalid_argument("example 4 fixes its conditions; use --channel to "
                                    "switch the walls");
      Example4Options opt;
      opt.terms = a.terms;
      opt.seed = a.seed;
      opt.periodic = !a.channel;
      opt.band_cells = band_or(opt.band_cells);
      return example4(n, opt);
    }
    default:
      throw std::invalid_argument("--which must be 1, 2, 3 or 4");
  }
}

std::vector<int> default_grids(int which) {
  switch (which) {
    case 2: return {32, 64};
    case 4: return {64, 128, 256, 512};
    default: return {128, 256};
  }
}

int run_example(const ExampleArgs& a) {
  std::vector<int> grids = a.grids.empty() ? default_grids(a.which) : a.grids;
  ExtendParams params = make_params(a.tol, a.maxit, a.method, a.dense_cap);

  std::cout << "name,nx,ny,nz,unknowns,iterations,converged,relative_residual,"
               "region,error,order\n";
  bool all_converged = true;
  std::map<std::string, double> prev;
  for (int n : grids) {
    ExtensionProblem P = build_example(a, n);
    if (!a.emit_inputs.empty()) {
      std::string base = a.emit_inputs + "/" + P.name + "_" + grid_tag(P.grid);
      write_field(base + "_known.field", P.known);
      write_field(base + "_phi.field", P.phi.phi);
    }
    Timer t;
    ExtendResult res = extend(P.known, P.mask, P.bc, params);
    note_timing(P.name + " " + grid_tag(P.grid) + " solve", t.seconds());
    all_converged = all_converged && res.stats.converged;
    if (!a.out_dir.empty())
      write_field(a.out_dir + "/" + P.name + "_" + grid_tag(P.grid) + "_extension.field",
                  res.field);
    for (const auto& re : measure(P, res.field)) {
      std::string order;
      auto it = prev.find(re.region);
      if (it != prev.end()) order = fmt_g17(std::log2(it->second / re.error));
      prev[re.region] = re.error;
      std::cout << P.name << "," << P.grid.dims[0] << "," << P.grid.dims[1] << ","
                << (P.grid.ndim > 2 ? P.grid.dims[2] : 1) << ","
                << P.mask.unknown_index.size() << "," << res.stats.iterations << ","
                << (res.stats.converged ? 1 : 0) << ","
                << fmt_g17(res.stats.relative_residual) << "," << re.region << ","
                << fmt_g17(re.error) << "," << order << "\n";
    }
  }
  return all_converged ? 0 : 1;
}

// ---- extend ----

struct ExtendArgs {
  std::string in, phi, out;
  std::string side = "inside";
  std::string bc = "neumann";
  double tol = 1e-6;
  int maxit = 0;
  std::string method = "pcg";
  int dense_cap = 4096;
};

int run_extend(const ExtendArgs& a) {
  ScalarField known;
  LevelSet ls;
  try {
    known = read_field(a.in);
    ls.phi = read_field(a.phi);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  if (!known.grid.same_layout(ls.phi.grid)) {
    std::fprintf(stderr, "error: field and level set grids differ\n");
    return 2;
  }
  if (a.side != "inside" && a.side != "outside") {
    std::fprintf(stderr, "error: --side must be inside or outside\n");
    return 2;
  }
  BcSpec bc;
  ExtendParams params;
  try {
    bc = parse_bc_spec(a.bc, known.grid.ndim);
    params = make_params(a.tol, a.maxit, a.method, a.dense_cap);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  Mask mask = mask_from_levelset(ls, a.side == "inside" ? ExtendSide::InsideKnown
                                                        : ExtendSide::OutsideKnown);
  // values on the unknown side are ignored by the solve
  for (std::int64_t k = 0; k < known.grid.node_count(); ++k)
    if (!mask.known[std::size_t(k)]) known[k] = 0.0;

  Timer t;
  ExtendResult res = extend(known, mask, bc, params);
  note_timing("extend " + grid_tag(known.grid), t.seconds());
  write_field(a.out, res.field);
  std::cout << "unknowns,iterations,converged,relative_residual\n";
  std::cout << mask.unknown_index.size() << "," << res.stats.iterations << ","
            << (res.stats.converged ? 1 : 0) << ","
            << fmt_g17(res.stats.relative_residual) << "\n";
  return res.stats.converged ? 0 : 1;
}

// ---- compare ----

struct CompareArgs {
  int which = 1;
  std::string bc;
  std::vector<int> grids;
  double tol = 1e-6;
  int maxit = 0;
  double band_cells = 0.0;  // 0: keep each problem's own default
};

int run_compare(const CompareArgs& a) {
  if (a.which != 1 && a.which != 2 && a.which != 3) {
    std::fprintf(stderr, "error: compare supports examples 1, 2 and 3\n");
    return 2;
  }
  ExampleArgs ea;
  ea.which = a.which;
  ea.bc = a.bc.empty() && a.which != 2 ? "neumann" : a.bc;
  ea.tol = a.tol;
  ea.maxit = a.maxit;
  ea.band_cells = a.band_cells;
  std::vector<int> grids = a.grids.empty() ? default_grids(a.which) : a.grids;

  std::cout << "name,method,nx,ny,nz,region,error,order\n";
  bool all_converged = true;
  std::map<std::string, double> prev;
  for (int n : grids) {
    ExtensionProblem P = build_example(ea, n);
    auto emit = [&](const std::string& method, const ScalarField& f) {
      for (const auto& re : measure(P, f)) {
        std::string key = method + "/" + re.region, order;
        auto it = prev.find(key);
        if (it != prev.end()) order = fmt_g17(std::log2(it->second / re.error));
        prev[key] = re.error;
        std::cout << P.name << "," << method << "," << P.grid.dims[0] << ","
                  << P.grid.dims[1] << "," << (P.grid.ndim > 2 ? P.grid.dims[2] : 1)
                  << "," << re.region << "," << fmt_g17(re.error) << "," << order << "\n";
      }
    };

    ExtendParams params = make_params(a.tol, a.maxit, "pcg", 4096);
    Timer t;
    ExtendResult res = extend(P.known, P.mask, P.bc, params);
    note_timing(P.name + " " + grid_tag(P.grid) + " biharmonic", t.seconds());
    all_converged = all_converged && res.stats.converged;
    emit("biharmonic", res.field);

    struct Stage { ExtrapOrder order; const char* label; };
    for (Stage s : {Stage{ExtrapOrder::Constant, "constant"},
                    Stage{ExtrapOrder::Linear, "linear"},
                    Stage{ExtrapOrder::Quadratic, "quadratic"}}) {
      Timer te;
      ScalarField f = extrapolate(P.known, P.phi, s.order);
      note_timing(P.name + " " + grid_tag(P.grid) + " " + s.label, te.seconds());
      emit(s.label, f);
    }
  }
  return all_converged ? 0 : 1;
}

// ---- stefan ----

struct StefanArgs {
  double sigma = 0.001, beta = 2.0;
  int n = 200;
  double dt = 5e-4, t_end = 0.4;
  double seed_radius = 0.1;
  double tol = 1e-6;
  int reinit = 10;
  int snapshot_every = 100;
  std::string out_dir;
  bool rotated = false;
};

int run_stefan(const StefanArgs& a) {
  StefanParams p;
  p.sigma = a.sigma;
  p.beta = a.beta;
  p.nx = p.ny = a.n;
  p.dt = a.dt;
  p.t_end = a.t_end;
  p.seed_radius = a.seed_radius;
  p.extension_tol = a.tol;
  p.reinit_iterations = a.reinit;
  p.rotated_gradients = a.rotated;

  Timer t;
  auto snaps = run(p, a.snapshot_every, a.out_dir);
  note_timing("stefan n=" + std::to_string(a.n) + " to t=" + std::to_string(a.t_end),
              t.seconds());
  std::cout << "step,t,solid_node_count,max_vn\n";
  for (const auto& s : snaps)
    std::cout << s.step << "," << fmt_g17(s.t) << "," << s.solid_count << ","
              << fmt_g17(s.max_vn) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* tstr = std::getenv("LEVEX_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(tstr, &end, 10);
    if (!end || *end != '\0' || v < 1) {
      std::fprintf(stderr, "error: LEVEX_THREADS must be a positive integer\n");
      return 2;
    }
    // accepted for interface stability; the current implementation is serial
  }

  CLI::App app{"Biharmonic field extension toolkit"};
  app.require_subcommand(1);

  ExampleArgs ea;
  CLI::App* ex = app.add_subcommand("example", "Run a benchmark ladder and report errors");
  ex->add_option("--which", ea.which, "Benchmark number (1-4)")->required();
  ex->add_option("--bc", ea.bc, "Boundary conditions (example dependent)");
  ex->add_option("--grids", ea.grids, "Comma separated grid sizes")->delimiter(',');
  ex->add_flag("--half", ea.half, "Example 3: symmetric half-width grid");
  ex->add_flag("--channel", ea.channel, "Example 4: Neumann walls instead of periodic");
  ex->add_option("--terms", ea.terms, "Example 4: number of interface modes");
  ex->add_option("--seed", ea.seed, "Example 4: interface random seed");
  ex->add_option("--tol", ea.tol, "Iterative solver tolerance");
  ex->add_option("--maxit", ea.maxit, "Iteration cap (0 = automatic)");
  ex->add_option("--method", ea.method, "pcg or dense");
  ex->add_option("--dense-cap", ea.dense_cap, "Unknown-count cap for the dense method");
  ex->add_option("--band-cells", ea.band_cells, "Measurement band half-width in cells (default: problem specific)")
      ->check(CLI::PositiveNumber);
  ex->add_option("--emit-inputs", ea.emit_inputs, "Directory for known/phi field dumps");
  ex->add_option("--out-dir", ea.out_dir, "Directory for extension field dumps");

  ExtendArgs xa;
  CLI::App* xt = app.add_subcommand("extend", "Extend a field file across an interface");
  xt->add_option("--in", xa.in, "Known field file")->required();
  xt->add_option("--phi", xa.phi, "Level set field file")->required();
  xt->add_option("--out", xa.out, "Output field file")->required();
  xt->add_option("--side", xa.side, "Which side is known: inside or outside");
  xt->add_option("--bc", xa.bc, "Face conditions, uniform or per axis");
  xt->add_option("--tol", xa.tol, "Iterative solver tolerance");
  xt->add_option("--maxit", xa.maxit, "Iteration cap (0 = automatic)");
  xt->add_option("--method", xa.method, "pcg or dense");
  xt->add_option("--dense-cap", xa.dense_cap, "Unknown-count cap for the dense method");

  CompareArgs ca;
  CLI::App* cp = app.add_subcommand("compare",
                                    "Extension vs transport extrapolation orders");
  cp->add_option("--which", ca.which, "Benchmark number (1-3)")->required();
  cp->add_option("--bc", ca.bc, "Boundary conditions for the extension");
  cp->add_option("--grids", ca.grids, "Comma separated grid sizes")->delimiter(',');
  cp->add_option("--tol", ca.tol, "Iterative solver tolerance");
  cp->add_option("--maxit", ca.maxit, "Iteration cap (0 = automatic)");
  cp->add_option("--band-cells", ca.band_cells, "Measurement band half-width in cells (default: problem specific)")
      ->check(CLI::PositiveNumber);

  StefanArgs sa;
  CLI::App* st = app.add_subcommand("stefan", "Solidification front demo");
  st->add_option("--sigma", sa.sigma, "Surface tension coefficient");
  st->add_option("--beta", sa.beta, "Undercooling number (liquid starts at -1/beta)");
  st->add_option("--n", sa.n, "Grid nodes per side");
  st->add_option("--dt", sa.dt, "Time step");
  st->add_option("--t-end", sa.t_end, "Final time");
  st->add_option("--seed-radius", sa.seed_radius, "Initial seed radius");
  st->add_option("--tol", sa.tol, "Gradient extension tolerance");
  st->add_option("--reinit", sa.reinit, "Reinitialization sweeps per step");
  st->add_option("--snapshot-every", sa.snapshot_every, "Steps between snapshots");
  st->add_option("--out-dir", sa.out_dir, "Directory for snapshot dumps");
  st->add_flag("--rotated-gradients", sa.rotated, "Average in 45-degree rotated frames");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ex) return run_example(ea);
    if (*xt) return run_extend(xa);
    if (*cp) return run_compare(ca);
    if (*st) return run_stefan(sa);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
