// ellfem command-line driver.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "bench.hpp"
#include "ellfem/assembly.hpp"
#include "ellfem/errors.hpp"
#include "ellfem/geomflow.hpp"
#include "ellfem/implicit_surface.hpp"
#include "ellfem/mesh.hpp"
#include "ellfem/problems.hpp"
#include "expression.hpp"

namespace fs = std::filesystem;
using namespace ellfem;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

/// Usage problems detected after parsing (bad combinations, unknown ids).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ImplicitSurface named_surface(const std::string& name, double radius, double minor) {
  if (name == "sphere") return ImplicitSurface::sphere(radius);
  if (name == "torus") return ImplicitSurface::torus(radius, minor);
  throw UsageError("unknown surface '" + name + "'");
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_output(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

void write_solution(const Mesh& mesh, const Eigen::VectorXd& u, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "node";
  for (int k = 0; k < mesh.ambient; ++k) out << ",x" << k + 1;
  out << ",u\n";
  out.precision(17);
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    out << i;
    for (int k = 0; k < mesh.ambient; ++k) out << ',' << mesh.nodes(i, k);
    out << ',' << u(i) << '\n';
  }
}

// ---------------------------------------------------------------------------

struct MeshGenArgs {
  std::string shape;
  int refine = 2;
  int segments = 16;
  double h = 0.1;
  int order = 1;
  double jitter = 0.0;
  fs::path output;
};

struct MeshFileArgs {
  fs::path input;
  fs::path output;
  int order = 2;
  std::string surface = "sphere";
  double radius = 1.0;
  double minor = 0.25;
  bool lift = false;
};

struct SolveArgs {
  std::vector<fs::path> meshes;
  std::string problem;
  std::string f;
  std::string g;
  double mu = 10.0;
  std::string load = "quadrature";
  std::string errors = "quadrature";
  fs::path output;
  fs::path convergence;
};

struct FlowArgs {
  fs::path mesh;
  double tau = 0.002;
  double final_time = 1.0;
  int bdf = 2;
  int snap_every = 0;
  bool exact_start = false;
  fs::path snapshots;
  fs::path log;
};

struct BenchArgs {
  std::vector<fs::path> meshes;
  std::string generator = "sphere";
  std::vector<int> levels{3, 4, 5};
  std::vector<double> sizes{0.05, 0.035, 0.025};
  int order = 2;
  std::vector<std::string> backends{"batched"};
  int repeats = 3;
  Index batch_size = AssemblyOptions{}.batch_size;
  bool dimensions = false;
  fs::path output;
};

Mesh generate(const std::string& shape, int refine, int segments, double h, int order) {
  if (shape == "sphere") return generate_sphere(refine, order);
  if (shape == "circle") return generate_circle(segments, order);
  if (shape == "disk" || shape == "ball") {
    const Mesh p1 = shape == "disk" ? generate_disk(h) : generate_ball(h);
    if (order == 1) return p1;
    const ImplicitSurface boundary = ImplicitSurface::sphere(1.0);
    return mesh_preprocess(p1, order, &boundary).mesh;
  }
  if (shape == "half-disk") return half_disk_example();
  throw UsageError("unknown generator '" + shape + "'");
}

int cmd_mesh_gen(const MeshGenArgs& a, std::uint64_t seed) {
  Mesh mesh = generate(a.shape, a.refine, a.segments, a.h, a.order);
  if (a.jitter > 0.0) mesh = jitter_nodes(mesh, a.jitter, seed);
  ensure_parent(a.output);
  write_mesh(mesh, a.output);
  std::cout << a.output.string() << ": " << mesh.num_elements() << " elements, " << mesh.num_nodes()
            << " nodes\n";
  return 0;
}

fs::path default_output(const fs::path& input, const std::string& suffix) {
  return input.parent_path() / (input.stem().string() + suffix + input.extension().string());
}

int cmd_mesh_preprocess(const MeshFileArgs& a) {
  const Mesh mesh = read_mesh(a.input);
  std::optional<ImplicitSurface> surface;
  if (a.lift) surface = named_surface(a.surface, a.radius, a.minor);
  const PreprocessResult res = mesh_preprocess(mesh, a.order, surface ? &*surface : nullptr);
  const fs::path out = a.output.empty() ? default_output(a.input, "_p" + std::to_string(a.order)) : a.output;
  ensure_parent(out);
  write_mesh(res.mesh, out);
  std::cout << out.string() << ": " << res.mesh.num_nodes() << " nodes\n";
  return 0;
}

int cmd_mesh_lift(const MeshFileArgs& a) {
  Mesh mesh = read_mesh(a.input);
  const LiftResult res = lift_nodes(mesh.nodes, named_surface(a.surface, a.radius, a.minor));
  for (const LiftFailure& f : res.failures)
    std::cerr << "node " << f.point << ": lift residual " << f.residual << '\n';
  if (!res.ok()) return kNumerical;
  mesh.nodes = res.points;
  const fs::path out = a.output.empty() ? default_output(a.input, "_lifted") : a.output;
  ensure_parent(out);
  write_mesh(mesh, out);
  std::cout << out.string() << '\n';
  return 0;
}

int cmd_mesh_validate(const MeshFileArgs& a) {
  const ValidationReport report = validate(read_mesh(a.input));
  for (const Violation& v : report.violations) {
    std::cout << (v.severity == Violation::Severity::Error ? "error" : "warning") << ' ' << v.code;
    if (v.element >= 0) std::cout << " element " << v.element;
    std::cout << ": " << v.message << '\n';
  }
  if (report.ok()) std::cout << "ok\n";
  return report.ok() ? 0 : kData;
}

// ---------------------------------------------------------------------------

int cmd_solve(const SolveArgs& a, MeshKind kind) {
  if (a.problem.empty() == a.f.empty()) throw UsageError("give exactly one of --problem and --f");
  const LoadMode load = a.load == "nodal" ? LoadMode::Nodal : LoadMode::Quadrature;

  std::vector<Mesh> meshes;
  for (const fs::path& p : a.meshes) meshes.push_back(read_mesh(p));

  if (!a.problem.empty()) {
    Problem problem;
    try {
      problem = builtin_problem(a.problem, a.mu);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    if (problem.kind != kind) throw UsageError("problem '" + a.problem + "' is posed on another domain kind");
    if (meshes.size() >= 2) {
      const auto rows = convergence_study(
          problem, meshes, a.errors == "interpolant" ? ErrorMode::Interpolant : ErrorMode::Quadrature);
      std::ofstream csv;
      std::ostream* out = &std::cout;
      if (!a.convergence.empty()) {
        csv = open_output(a.convergence);
        out = &csv;
      }
      write_convergence_csv(rows, *out);
    }
    const Mesh& finest = meshes.back();
    const ScalarFunction g = problem.exact;
    const Solution sol = kind == MeshKind::Surface
                             ? solve_surface_poisson(finest, problem.f, load)
                             : solve_bulk_reaction_diffusion(finest, problem.f, problem.mu, &g, load);
    if (!a.output.empty()) write_solution(finest, sol.u.values, a.output);
    const ErrorNorms err = compute_errors_quadrature(sol.u, problem.exact, problem.gradient);
    std::cout << "dofs " << finest.num_nodes() << " cg_iterations " << sol.stats.iterations << " err_L2 "
              << err.l2 << " err_H1 " << err.h1 << '\n';
    return 0;
  }

  const ScalarFunction f = cli::parse_polynomial(a.f);
  const Mesh& mesh = meshes.back();
  Solution sol;
  if (kind == MeshKind::Surface) {
    sol = solve_surface_poisson(mesh, f, load);
  } else {
    const ScalarFunction g = a.g.empty() ? ScalarFunction([](const auto&) { return 0.0; })
                                         : cli::parse_polynomial(a.g);
    sol = solve_bulk_reaction_diffusion(mesh, f, a.mu, &g, load);
  }
  if (!a.output.empty()) write_solution(mesh, sol.u.values, a.output);
  std::cout << "dofs " << mesh.num_nodes() << " cg_iterations " << sol.stats.iterations << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_flow(const FlowArgs& a, FlowAlgorithm algorithm) {
  const Mesh mesh = read_mesh(a.mesh);
  FlowOptions opt;
  opt.algorithm = algorithm;
  opt.tau = a.tau;
  opt.final_time = a.final_time;
  opt.bdf_order = a.bdf;
  opt.exact_sphere_start = a.exact_start;
  opt.snap_every = a.snap_every;
  opt.snapshot_dir = a.snapshots;
  const FlowResult res = flow_driver(mesh, opt);

  std::ofstream csv;
  std::ostream* out = &std::cout;
  if (!a.log.empty()) {
    csv = open_output(a.log);
    out = &csv;
  }
  write_flow_log(res.log, *out);
  std::cerr << "steps " << res.log.size() - 1 << " assembly_fraction " << res.assembly_fraction() << '\n';
  if (!res.completed) {
    std::cerr << res.stop_reason << '\n';
    return kNumerical;
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_bench(const BenchArgs& a) {
  std::vector<Mesh> meshes;
  if (!a.meshes.empty()) {
    for (const fs::path& p : a.meshes) meshes.push_back(read_mesh(p));
  } else if (a.dimensions) {
    // P2 sweep over every element type at comparable element counts
    for (double h : a.sizes) {
      meshes.push_back(generate("disk", 0, 0, h, 2));
      meshes.push_back(generate("ball", 0, 0, 2.0 * h, 2));
    }
    for (int level : a.levels) meshes.push_back(generate_sphere(level, 2));
    for (int level : a.levels) meshes.push_back(generate_circle(20 << (2 * level), 2));
  } else if (a.generator == "sphere" || a.generator == "circle") {
    for (int level : a.levels)
      meshes.push_back(a.generator == "sphere" ? generate_sphere(level, a.order)
                                               : generate_circle(20 << (2 * level), a.order));
  } else {
    for (double h : a.sizes) meshes.push_back(generate(a.generator, 0, 0, h, a.order));
  }

  std::vector<cli::Backend> backends;
  for (const std::string& b : a.backends) {
    try {
      backends.push_back(cli::parse_backend(b));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }

  std::ofstream csv;
  std::ostream* out = &std::cout;
  if (!a.output.empty()) {
    csv = open_output(a.output);
    out = &csv;
  }
  cli::write_bench_header(*out);
  for (const Mesh& mesh : meshes)
    for (cli::Backend b : backends) {
      if (b == cli::Backend::P1Fast && mesh.order != 1) continue;
      cli::write_bench_row(cli::bench_assembly(mesh, b, a.repeats, a.batch_size), *out);
      out->flush();
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched isoparametric finite elements on bulk domains and surfaces", "ellfem"};
  app.require_subcommand(1);
  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Seed for randomized node placement");

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh generation and preprocessing");
  mesh_cmd->require_subcommand(1);
  MeshGenArgs gen;
  auto* gen_cmd = mesh_cmd->add_subcommand("gen", "Generate a mesh");
  gen_cmd->add_option("shape", gen.shape, "sphere | circle | disk | ball | half-disk")->required();
  gen_cmd->add_option("--refine", gen.refine, "Icosphere refinements")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--segments", gen.segments, "Circle segments")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--mesh-size", gen.h, "Disk and ball mesh size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--order", gen.order)->check(CLI::Range(1, 2));
  gen_cmd->add_option("--jitter", gen.jitter, "Random node offset amplitude")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("-o,--output", gen.output)->required();

  MeshFileArgs file;
  auto* pre_cmd = mesh_cmd->add_subcommand("preprocess", "Insert edge nodes (P1 to P2)");
  pre_cmd->add_option("input", file.input)->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--order", file.order)->check(CLI::Range(2, 2));
  pre_cmd->add_option("--lift", file.surface, "Project new nodes onto sphere | torus")
      ->each([&](const std::string&) { file.lift = true; });
  pre_cmd->add_option("--radius", file.radius);
  pre_cmd->add_option("--minor-radius", file.minor);
  pre_cmd->add_option("-o,--output", file.output);

  auto* lift_cmd = mesh_cmd->add_subcommand("lift", "Project all nodes onto a surface");
  lift_cmd->add_option("input", file.input)->required()->check(CLI::ExistingFile);
  lift_cmd->add_option("--surface", file.surface, "sphere | torus");
  lift_cmd->add_option("--radius", file.radius);
  lift_cmd->add_option("--minor-radius", file.minor);
  lift_cmd->add_option("-o,--output", file.output);

  auto* val_cmd = mesh_cmd->add_subcommand("validate", "Check mesh invariants");
  val_cmd->add_option("input", file.input)->required()->check(CLI::ExistingFile);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Stationary problems");
  solve_cmd->require_subcommand(1);
  SolveArgs solve;
  auto add_solve = [&](const std::string& name, const std::string& help) {
    auto* c = solve_cmd->add_subcommand(name, help);
    c->add_option("meshes", solve.meshes, "One mesh, or a refinement sequence")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--problem", solve.problem, "sphere-x1x2 | disk-radial");
    c->add_option("--f", solve.f, "Polynomial right-hand side, e.g. '6*x1*x2'");
    c->add_option("--mu", solve.mu, "Reaction coefficient");
    c->add_option("--load", solve.load)->check(CLI::IsMember({"quadrature", "nodal"}));
    c->add_option("--errors", solve.errors)->check(CLI::IsMember({"quadrature", "interpolant"}));
    c->add_option("-o,--output", solve.output, "Solution CSV");
    c->add_option("--convergence", solve.convergence, "Convergence CSV");
    return c;
  };
  auto* ps_cmd = add_solve("poisson-surface", "-Laplace-Beltrami u = f on a closed surface");
  auto* pb_cmd = add_solve("poisson-bulk", "-Laplace u + mu u = f with Dirichlet data");
  pb_cmd->add_option("--g", solve.g, "Polynomial boundary value (default 0)");

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "Mean curvature flow");
  flow_cmd->require_subcommand(1);
  FlowArgs flow;
  auto add_flow = [&](const std::string& name, const std::string& help) {
    auto* c = flow_cmd->add_subcommand(name, help);
    c->add_option("mesh", flow.mesh)->required()->check(CLI::ExistingFile);
    c->add_option("--tau", flow.tau)->check(CLI::PositiveNumber);
    c->add_option("--T", flow.final_time)->check(CLI::NonNegativeNumber);
    c->add_option("--bdf", flow.bdf)->check(CLI::Range(1, 2));
    c->add_option("--snap-every", flow.snap_every)->check(CLI::NonNegativeNumber);
    c->add_option("--snapshots", flow.snapshots, "Directory for mesh snapshots");
    c->add_option("--log", flow.log, "Timing CSV");
    c->add_flag("--exact-sphere-start", flow.exact_start, "Start from exact unit sphere data");
    return c;
  };
  auto* dz_cmd = add_flow("dziuk", "Linearly implicit parametric scheme");
  auto* kll_cmd = add_flow("kll", "Normal and curvature evolution with BDF");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  BenchArgs bench;
  auto* ba_cmd = bench_cmd->add_subcommand("assembly", "Time mass and stiffness assembly");
  ba_cmd->add_option("--mesh", bench.meshes, "Mesh files (overrides the generator)")->check(CLI::ExistingFile);
  ba_cmd->add_option("--generator", bench.generator, "sphere | circle | disk | ball");
  ba_cmd->add_option("--levels", bench.levels, "Refinement levels for sphere and circle");
  ba_cmd->add_option("--sizes", bench.sizes, "Mesh sizes for disk and ball");
  ba_cmd->add_option("--order", bench.order)->check(CLI::Range(1, 2));
  ba_cmd->add_option("--backends", bench.backends)->delimiter(',');
  ba_cmd->add_option("--repeats", bench.repeats)->check(CLI::Range(3, 1000));
  ba_cmd->add_option("--batch-size", bench.batch_size)->check(CLI::PositiveNumber);
  ba_cmd->add_flag("--dimensions", bench.dimensions, "Sweep every P2 element type");
  ba_cmd->add_option("-o,--output", bench.output, "CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*gen_cmd) return cmd_mesh_gen(gen, seed);
    if (*pre_cmd) return cmd_mesh_preprocess(file);
    if (*lift_cmd) return cmd_mesh_lift(file);
    if (*val_cmd) return cmd_mesh_validate(file);
    if (*ps_cmd) return cmd_solve(solve, MeshKind::Surface);
    if (*pb_cmd) return cmd_solve(solve, MeshKind::Bulk);
    if (*dz_cmd) return cmd_flow(flow, FlowAlgorithm::Dziuk);
    if (*kll_cmd) return cmd_flow(flow, FlowAlgorithm::Kll);
    if (*ba_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SingularElement& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const EvaluationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
