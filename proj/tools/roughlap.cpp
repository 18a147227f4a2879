// roughlap: meshes, boundary-value solves, spectral diagnostics and exterior
// limiting-absorption runs for rough planar/axisymmetric domains.
//
// Exit codes: 0 success, 1 failed check, 2 usage/parse error,
//             3 mathematical precondition violated, 4 solver non-convergence.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "roughlap/exterior.hpp"
#include "roughlap/fem.hpp"
#include "roughlap/geometry.hpp"
#include "roughlap/mesh.hpp"
#include "roughlap/solve.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace roughlap;

namespace {

constexpr const char* kVersion = "roughlap 0.1.0";
constexpr double kPi = 3.141592653589793238462643383279;

int thread_cap() {
  if (const char* env = std::getenv("ROUGHLAP_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// index-parallel loop; results must be deposited by index so the output is
// identical for any worker count
void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// CSV sink that embeds the tool version and the effective config
struct Csv {
  std::ofstream out;
  Csv(const fs::path& path, const json& config) {
    out.open(path);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    out << "# version " << kVersion << "\n";
    out << "# config " << config.dump() << "\n";
  }
  void header(const std::string& names) { out << names << "\n"; }
  void raw(const std::string& line) { out << line << "\n"; }
  template <typename... Args>
  void row(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out << buf << "\n";
  }
};

json json_of_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw CLI::ValidationError("config", "cannot open " + p.string());
  return json::parse(in);  // throws json::parse_error with byte position
}

geom::Domain make_domain(const std::string& name, int k_max, int n_max) {
  if (name == "square") return geom::build_square();
  if (name == "lshape") return geom::build_lshape();
  if (name == "disk") return geom::build_disk();
  if (name == "wedge") return geom::build_wedge();
  if (name == "rect-union") return geom::build_rect_union(k_max);
  if (name == "rect-union-part") return geom::build_rect_union_part(k_max);
  if (name == "spiral") return geom::build_spiral(n_max);
  throw CLI::ValidationError("--domain", "unknown domain '" + name + "'");
}

std::vector<int> dirichlet_dofs(const mesh::Mesh& m) {
  std::vector<char> mark(m.vertices.size(), 0);
  for (const auto& be : m.boundary_edges) mark[be.a] = mark[be.b] = 1;
  std::vector<int> out;
  for (std::size_t i = 0; i < mark.size(); ++i)
    if (mark[i]) out.push_back(static_cast<int>(i));
  return out;
}

// ---- mesh ------------------------------------------------------------------

int cmd_mesh(const std::string& domain_name, int k_max, int n_max, double h, int refines,
             const fs::path& outdir) {
  json cfg = {{"cmd", "mesh"},     {"domain", domain_name}, {"k_max", k_max},
              {"n_max", n_max},    {"h", h},                {"refine", refines}};
  fs::create_directories(outdir);

  geom::Domain dom = make_domain(domain_name, k_max, n_max);
  mesh::Mesh m = mesh::triangulate(dom, h);
  for (int i = 0; i < refines; ++i) m = mesh::refine(m);
  mesh::ValidationReport rep = mesh::validate(m);

  std::ofstream(outdir / "domain.txt") << geom::write_domain(dom);
  std::ofstream(outdir / "mesh.txt") << mesh::write_mesh(m);

  json quality = {{"version", kVersion},
                  {"config", cfg},
                  {"vertices", m.n_vertices()},
                  {"triangles", m.n_triangles()},
                  {"boundary_edges", m.boundary_edges.size()},
                  {"boundary_loops", rep.boundary_loops},
                  {"domain_loops", 1 + dom.holes.size()},
                  {"min_angle_deg", rep.min_angle_deg},
                  {"max_aspect", rep.max_aspect},
                  {"boundary_measure", geom::boundary_measure(dom)},
                  {"violations", rep.violations}};
  std::ofstream(outdir / "quality.json") << quality.dump(2) << "\n";
  if (!rep.valid()) {
    std::fprintf(stderr, "mesh validation failed with %zu violations\n", rep.violations.size());
    return 1;
  }
  return 0;
}

// ---- solve -----------------------------------------------------------------

struct Manufactured {
  std::function<double(Vec2)> source;
  std::function<double(Vec2)> exact;
  std::function<Vec2(Vec2)> grad;
};

Manufactured manufactured_case(const std::string& name) {
  if (name == "sine")
    return {[](Vec2 p) { return 2.0 * kPi * kPi * std::sin(kPi * p.x) * std::sin(kPi * p.y); },
            [](Vec2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); },
            [](Vec2 p) {
              return Vec2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y),
                          kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
            }};
  if (name == "cosx")
    return {[](Vec2 p) { return kPi * kPi * std::cos(kPi * p.x); },
            [](Vec2 p) { return std::cos(kPi * p.x); },
            [](Vec2 p) { return Vec2{-kPi * std::sin(kPi * p.x), 0.0}; }};
  throw CLI::ValidationError("--manufactured", "unknown case '" + name + "'");
}

int cmd_solve(const std::string& bc, const std::string& domain_name, int k_max, int n_max,
              double h, int levels, const std::string& manufactured, const std::string& source,
              std::vector<double> robin_h, double tol, const fs::path& outdir,
              const std::string& cg_log) {
  json cfg = {{"cmd", "solve"},   {"bc", bc},           {"domain", domain_name},
              {"k_max", k_max},   {"n_max", n_max},     {"h", h},
              {"levels", levels}, {"manufactured", manufactured}, {"source", source},
              {"robin_h", robin_h}, {"tol", tol}};
  fs::create_directories(outdir);

  std::function<double(Vec2)> F;
  std::function<double(Vec2)> exact;
  std::function<Vec2(Vec2)> grad_exact;
  if (manufactured != "none") {
    Manufactured mf = manufactured_case(manufactured);
    F = mf.source;
    exact = mf.exact;
    grad_exact = mf.grad;
  } else if (source == "one") {
    F = [](Vec2) { return 1.0; };
  } else if (source == "zero") {
    F = [](Vec2) { return 0.0; };
  } else {
    throw CLI::ValidationError("--source", "unknown source '" + source + "'");
  }

  geom::Domain dom = make_domain(domain_name, k_max, n_max);
  mesh::Mesh base = mesh::triangulate(dom, h);

  struct Row {
    int level, nv, iterations;
    double h, residual, l2e, h1e, energy_gap, l2, h1, energy, trace;
  };
  std::vector<Row> rows(levels + 1);
  std::vector<mesh::Mesh> meshes(levels + 1);
  meshes[0] = base;
  for (int l = 1; l <= levels; ++l) meshes[l] = mesh::refine(meshes[l - 1]);
  std::vector<double> last_solution;

  parallel_for(levels + 1, [&](int l) {
    const mesh::Mesh& m = meshes[l];
    fem::SymSparseD K = fem::assemble_stiffness(m);
    fem::SymSparseD M = fem::assemble_mass(m);
    fem::SymSparseD B1 = fem::assemble_boundary_mass(m, fem::RobinCoefficient::constant(1.0));
    std::vector<double> b = fem::assemble_load(m, F);

    solve::DiagnosticsSink sink;
    std::ofstream log;
    if (!cg_log.empty() && l == levels) {
      log.open(outdir / cg_log);
      log << "iter,residual\n";
      sink = [&log](int it, double r) { log << it << "," << r << "\n"; };
    }

    solve::LinearSolveResult res;
    if (bc == "dirichlet") {
      res = solve::solve_dirichlet(K, b, dirichlet_dofs(m), tol, sink);
    } else if (bc == "neumann") {
      res = solve::solve_neumann(K, M, b, tol, sink);
    } else if (bc == "robin") {
      fem::RobinCoefficient hcoef;
      hcoef.per_marker = robin_h.empty() ? std::vector<double>{1.0} : robin_h;
      fem::SymSparseD B = fem::assemble_boundary_mass(m, hcoef);
      res = solve::solve_robin(K, B, b, tol, sink);
    } else {
      throw CLI::ValidationError("--bc", "unknown bc '" + bc + "'");
    }

    Row r;
    r.level = l;
    r.h = mesh::mesh_h(m);
    r.nv = m.n_vertices();
    r.iterations = res.iterations;
    r.residual = res.relative_residual;
    fem::Norms nn = fem::norms(res.solution, K, M, B1);
    r.l2 = nn.l2;
    r.h1 = nn.h1;
    r.energy = nn.energy;
    r.trace = nn.trace_l2;
    // energy identity [u,u] = (F,u) up to the boundary term
    double fu = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) fu += b[i] * res.solution[i];
    double lhs = fem::quadratic_form(K, res.solution);
    if (bc == "robin") {
      fem::RobinCoefficient hcoef;
      hcoef.per_marker = robin_h.empty() ? std::vector<double>{1.0} : robin_h;
      lhs += fem::quadratic_form(fem::assemble_boundary_mass(m, hcoef), res.solution);
    }
    r.energy_gap = std::abs(lhs - fu) / std::max(std::abs(fu), 1e-300);
    if (exact) {
      r.l2e = fem::l2_error(m, res.solution, exact);
      r.h1e = fem::h1_seminorm_error(m, res.solution, grad_exact);
    } else {
      r.l2e = r.h1e = std::nan("");
    }
    rows[l] = r;
    if (l == levels) last_solution = res.solution;
  });

  Csv csv(outdir / "solve.csv", cfg);
  csv.header("level,h,nv,iterations,residual,l2_error,h1_error,energy_gap,l2,h1,energy,trace_l2");
  for (const Row& r : rows)
    csv.row("%d,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.level, r.h, r.nv,
            r.iterations, r.residual, r.l2e, r.h1e, r.energy_gap, r.l2, r.h1, r.energy, r.trace);

  std::ofstream field(outdir / "field.txt");
  field << "field " << last_solution.size() << "\n";
  char buf[64];
  for (double v : last_solution) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    field << buf;
  }
  return 0;
}

// ---- spectrum ----------------------------------------------------------------

int cmd_spectrum(const std::string& which, const std::string& domain_name, int k_max, int n_max,
                 double h, int levels, int count, double tol, std::vector<double> robin_h,
                 const fs::path& outdir) {
  json cfg = {{"cmd", "spectrum"}, {"which", which}, {"domain", domain_name},
              {"k_max", k_max},    {"n_max", n_max}, {"h", h},
              {"levels", levels},  {"count", count}, {"tol", tol},
              {"robin_h", robin_h}};
  fs::create_directories(outdir);

  geom::Domain dom = make_domain(domain_name, k_max, n_max);
  std::vector<mesh::Mesh> meshes(levels + 1);
  meshes[0] = mesh::triangulate(dom, h);
  for (int l = 1; l <= levels; ++l) meshes[l] = mesh::refine(meshes[l - 1]);

  std::vector<std::vector<std::string>> lines(levels + 1);
  parallel_for(levels + 1, [&](int l) {
    const mesh::Mesh& m = meshes[l];
    fem::SymSparseD K = fem::assemble_stiffness(m);
    fem::SymSparseD M = fem::assemble_mass(m);
    fem::SymSparseD B1 = fem::assemble_boundary_mass(m, fem::RobinCoefficient::constant(1.0));

    solve::SpectrumReport rep;
    if (which == "poincare") {
      const double c = solve::poincare_constant(K, M, tol);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%.17g,%d,0,%.17g,0", l, mesh::mesh_h(m),
                    m.n_vertices(), c);
      lines[l].push_back(buf);
      return;
    } else if (which == "neumann") {
      rep = solve::neumann_spectrum(K, M, count, tol);
    } else if (which == "steklov") {
      rep = solve::steklov_classical_spectrum(K, B1, count, tol);
    } else if (which == "trace") {
      rep = solve::steklov_spectrum(K, M, B1, count, tol);
    } else if (which == "robin-fredholm") {
      fem::RobinCoefficient hcoef;
      hcoef.per_marker = robin_h.empty() ? std::vector<double>{1.0} : robin_h;
      fem::SymSparseD B = fem::assemble_boundary_mass(m, hcoef);
      rep = solve::robin_fredholm_spectrum(K, B, M, count, tol);
    } else {
      throw CLI::ValidationError("--which", "unknown spectrum kind '" + which + "'");
    }
    for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%zu,%.17g,%.3g", l, mesh::mesh_h(m),
                    m.n_vertices(), k, rep.eigenvalues[k], rep.residuals[k]);
      lines[l].push_back(buf);
    }
  });

  Csv csv(outdir / "spectrum.csv", cfg);
  csv.header("level,h,nv,index,value,residual");
  for (const auto& block : lines)
    for (const auto& line : block) csv.raw(line);
  return 0;
}

// ---- exterior -------------------------------------------------------------------

int cmd_exterior(const fs::path& config_path, const fs::path& outdir) {
  json cfg = json_of_file(config_path);
  fs::create_directories(outdir);

  geom::Domain obstacle;
  const std::string kind = cfg.at("obstacle").at("kind");
  if (kind == "sphere") {
    obstacle = geom::build_disk();
  } else if (kind == "rect-union") {
    obstacle = geom::build_rect_union(cfg["obstacle"].value("k_max", 2));
    obstacle = geom::translate(obstacle, {cfg["obstacle"].value("shift_r", 2.0),
                                          cfg["obstacle"].value("shift_z", 0.0)});
  } else {
    throw CLI::ValidationError("obstacle.kind", "unknown obstacle '" + kind + "'");
  }

  const double R_inf = cfg.value("R_inf", 128.0);
  const double target_h = cfg.value("target_h", 0.1);
  const int refines = cfg.value("refine", 1);
  const double max_step = cfg.value("max_step", 1e300);
  mesh::Mesh m = (kind == "sphere" && max_step < 1e299)
                     ? ext::polar_annulus_mesh(1.0, R_inf, target_h, 1.2, max_step)
                     : ext::build_exterior_mesh(obstacle, R_inf, target_h);
  for (int i = 0; i < refines; ++i) m = mesh::refine(m);

  ext::ContinuationSchedule sched;
  sched.epsilons = cfg.at("epsilons").get<std::vector<double>>();
  sched.k = cfg.value("k", 0.0);
  const std::string bc = cfg.value("bc", "dirichlet");
  sched.bc = bc == "dirichlet"  ? ext::ContinuationSchedule::BC::dirichlet
             : bc == "neumann" ? ext::ContinuationSchedule::BC::neumann
                               : ext::ContinuationSchedule::BC::robin;
  sched.robin_h = cfg.value("robin_h", 1.0);

  const std::string source_kind = cfg.at("source").value("kind", "shell");
  ext::Source src = (source_kind == "ball")
                        ? ext::bump_source(cfg.at("source").value("z0", 2.0),
                                           cfg.at("source").value("radius", 0.3))
                        : ext::shell_source(cfg.at("source").value("rho0", 2.0),
                                            cfg.at("source").value("radius", 0.3));
  ext::WeightedNormSpec wspec{cfg.value("a", 1.5)};
  const double tol = cfg.value("tol", 1e-10);

  ext::ContinuationResult res = ext::solve_shifted(m, sched, src, tol, wspec);

  Csv cont(outdir / "continuation.csv", cfg);
  cont.header("epsilon,weighted_norm,pairwise_diff");
  for (std::size_t i = 0; i < res.epsilons.size(); ++i) {
    const double diff = (i + 1 < res.epsilons.size()) ? res.pairwise_diffs[i] : std::nan("");
    cont.row("%.17g,%.17g,%.17g", res.epsilons[i], res.weighted_norms[i], diff);
  }

  const std::vector<ext::Complex>& u = res.fields.back();
  std::vector<double> radii = cfg.value("radii", std::vector<double>{});
  if (radii.empty())
    for (double r = 2.0; r <= R_inf / 4.0; r *= 1.5) radii.push_back(r);

  Csv rad(outdir / "radial.csv", cfg);
  rad.header("radius,max_abs_u,radiation_residual");
  std::vector<double> rr;
  if (sched.k > 0.0) rr = ext::radiation_residual(u, m, sched.k, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double peak = 0.0;
    for (int s = 0; s <= 192; ++s) {
      const double psi = kPi * s / 192;
      const Vec2 p{radii[i] * std::sin(psi), radii[i] * std::cos(psi)};
      const int t = mesh::locate_triangle(m, p);
      if (t >= 0) peak = std::max(peak, std::abs(ext::eval_complex(m, u, p)));
    }
    rad.row("%.17g,%.17g,%.17g", radii[i], peak, sched.k > 0.0 ? rr[i] : std::nan(""));
  }
  if (sched.k == 0.0 && radii.size() >= 3) {
    ext::DecayFit fit = ext::decay_fit(u, m, radii);
    char buf[128];
    std::snprintf(buf, sizeof buf, "# decay_fit exponent %.6g constant %.6g", fit.exponent,
                  fit.constant);
    rad.raw(buf);
  }
  return 0;
}

// ---- geometry-check ----------------------------------------------------------

int cmd_geometry_check(std::uint64_t seed, const fs::path& outdir) {
  json cfg = {{"cmd", "geometry-check"}, {"seed", seed}};
  fs::create_directories(outdir);
  Csv csv(outdir / "geometry.csv", cfg);
  csv.header("check,value,reference,pass");
  bool all_ok = true;
  auto emit = [&](const std::string& name, double value, double ref, bool ok) {
    csv.row("%s,%.12g,%.12g,%d", name.c_str(), value, ref, ok ? 1 : 0);
    all_ok = all_ok && ok;
  };

  // chart roundtrips on the spiral wedge
  {
    geom::ChartMap spiral = geom::spiral_chart();
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double s = std::exp(rng.uniform(-6.0, 0.0));
      const double t = s * (1.0 + rng.uniform(1e-6, 1.0 - 1e-6));
      const Vec2 p{s, t};
      const Vec2 q = spiral.inverse(spiral.forward(p));
      worst = std::max(worst, dist(p, q) / norm(p));
    }
    emit("spiral_roundtrip_max_rel", worst, 1e-12, worst <= 1e-12);
  }
  // quasiisometry constant across bands
  {
    geom::ChartMap spiral = geom::spiral_chart();
    std::vector<double> qs;
    for (int n : {1, 3, 5}) {
      auto est = geom::estimate_quasiisometry(spiral, geom::spiral_band_region(n), 10000, seed);
      qs.push_back(geom::qhat(est));
    }
    const double spread = (qs[2] - qs[0]) / qs[0];
    emit("spiral_qhat_band_spread", std::abs(spread), 0.05, std::abs(spread) < 0.05);
  }
  // area formula along the inner spiral ray
  {
    geom::AreaCheck chk = geom::area_formula_check(
        geom::spiral_chart(), {{std::exp(-6.0), std::exp(-6.0)}, {1.0, 1.0}}, 256);
    const double rel = std::abs(chk.lhs - chk.rhs) / chk.rhs;
    emit("area_formula_rel_gap", rel, 0.005, rel <= 0.005);
    const double expect = std::sqrt(1.0 + 4.0 * kPi * kPi) * (1.0 - std::exp(-6.0));
    emit("spiral_ray_length", chk.rhs, expect, std::abs(chk.rhs - expect) / expect < 0.005);
  }
  // interior metric on the L-shape
  {
    mesh::Mesh lm = mesh::triangulate(geom::build_lshape(), 0.25);
    for (int i = 0; i < 4; ++i) lm = mesh::refine(lm);
    const int a = mesh::nearest_vertex(lm, {0.9, 0.1});
    const int b = mesh::nearest_vertex(lm, {0.1, 0.9});
    const double d = geom::interior_metric(lm, a, b);
    const double expect =
        dist(lm.vertices[a], {0.5, 0.5}) + dist({0.5, 0.5}, lm.vertices[b]);
    emit("lshape_geodesic", d, expect, d >= expect - 1e-9 && d < expect * 1.05);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - Laplace boundary-value problems and embedding diagnostics on rough domains"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // leave -h free; --h is a mesh size

  std::string domain = "square", bc = "dirichlet", manufactured = "none", source = "one";
  std::string which = "poincare", cg_log;
  int k_max = 2, n_max = 3, levels = 0, refines = 0, count = 5;
  double h = 0.1, tol = 1e-10;
  std::uint64_t seed = 1;
  std::vector<double> robin_h;
  fs::path outdir = "out", config_path;

  CLI::App* c_mesh = app.add_subcommand("mesh", "build and validate a mesh");
  c_mesh->set_help_flag("--help", "print help");
  c_mesh->add_option("--domain", domain);
  c_mesh->add_option("--k-max", k_max);
  c_mesh->add_option("--n-max", n_max);
  c_mesh->add_option("--h", h);
  c_mesh->add_option("--refine", refines);
  c_mesh->add_option("--out", outdir);

  CLI::App* c_solve = app.add_subcommand("solve", "run a boundary-value solve ladder");
  c_solve->set_help_flag("--help", "print help");
  c_solve->add_option("--bc", bc);
  c_solve->add_option("--domain", domain);
  c_solve->add_option("--k-max", k_max);
  c_solve->add_option("--n-max", n_max);
  c_solve->add_option("--h", h);
  c_solve->add_option("--levels", levels);
  c_solve->add_option("--manufactured", manufactured);
  c_solve->add_option("--source", source);
  c_solve->add_option("--robin-h", robin_h)->delimiter(',');
  c_solve->add_option("--tol", tol);
  c_solve->add_option("--cg-log", cg_log);
  c_solve->add_option("--out", outdir);

  CLI::App* c_spec = app.add_subcommand("spectrum", "eigenvalue diagnostics ladder");
  c_spec->set_help_flag("--help", "print help");
  c_spec->add_option("--which", which);
  c_spec->add_option("--domain", domain);
  c_spec->add_option("--k-max", k_max);
  c_spec->add_option("--n-max", n_max);
  c_spec->add_option("--h", h);
  c_spec->add_option("--levels", levels);
  c_spec->add_option("--count", count);
  c_spec->add_option("--tol", tol);
  c_spec->add_option("--robin-h", robin_h)->delimiter(',');
  c_spec->add_option("--out", outdir);

  CLI::App* c_ext = app.add_subcommand("exterior", "limiting-absorption scenario from JSON");
  c_ext->set_help_flag("--help", "print help");
  c_ext->add_option("--config", config_path)->required();
  c_ext->add_option("--out", outdir);

  CLI::App* c_geo = app.add_subcommand("geometry-check", "quasiisometry/area-formula suite");
  c_geo->set_help_flag("--help", "print help");
  c_geo->add_option("--seed", seed);
  c_geo->add_option("--out", outdir);

  try {
    app.parse(argc, argv);
    if (c_mesh->parsed()) return cmd_mesh(domain, k_max, n_max, h, refines, outdir);
    if (c_solve->parsed())
      return cmd_solve(bc, domain, k_max, n_max, h, levels, manufactured, source, robin_h, tol,
                       outdir, cg_log);
    if (c_spec->parsed())
      return cmd_spectrum(which, domain, k_max, n_max, h, levels, count, tol, robin_h, outdir);
    if (c_ext->parsed()) return cmd_exterior(config_path, outdir);
    if (c_geo->parsed()) return cmd_geometry_check(seed, outdir);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const json::parse_error& e) {
    std::fprintf(stderr, "config parse error: %s\n", e.what());
    return 2;
  } catch (const solve::CompatibilityError& e) {
    std::fprintf(stderr, "%s (defect %.6g)\n", e.what(), e.defect);
    return 3;
  } catch (const solve::NoConvergence& e) {
    std::fprintf(stderr, "%s", e.what());
    if (!e.history.empty())
      std::fprintf(stderr, " (last residual %.3g after %zu iterations)", e.history.back(),
                   e.history.size() - 1);
    std::fprintf(stderr, "\n");
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
