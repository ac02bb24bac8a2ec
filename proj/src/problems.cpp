#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <tuple>

#include "ellfem/problems.hpp"

namespace ellfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

NodalField interpolate(const Mesh& mesh, const ScalarFunction& f) {
  NodalField u{&mesh, Eigen::VectorXd(mesh.num_nodes())};
  for (Index i = 0; i < mesh.num_nodes(); ++i) u.values(i) = f(mesh.nodes.row(i).transpose());
  return u;
}

Solution solve_surface_poisson(const Mesh& mesh, const ScalarFunction& f, LoadMode load) {
  if (!mesh.is_surface() || !is_closed_surface(mesh))
    throw PreconditionError("surface Poisson problem needs a closed surface mesh");
  Solution sol;
  auto start = Clock::now();
  const AssemblyOutput out = assemble_batched(mesh);
  std::tie(sol.mass, sol.stiffness) = out.matrices();
  const Eigen::VectorXd b = load == LoadMode::Nodal
                                ? spmv(sol.mass, interpolate(mesh, f).values)
                                : assemble_load(mesh, f, LoadMode::Quadrature);
  sol.stats.t_assembly_s = seconds_since(start);

  start = Clock::now();
  CgResult cg = cg_solve_meanfree(sol.stiffness, b, sol.mass);
  sol.stats.t_solve_s = seconds_since(start);
  if (!cg.converged)
    throw SolverError("mean-free CG did not converge (relative residual " +
                      std::to_string(cg.relative_residual) + ")");
  sol.stats.iterations = cg.iterations;
  sol.stats.relative_residual = cg.relative_residual;
  sol.u = {&mesh, std::move(cg.x)};
  return sol;
}

Solution solve_bulk_reaction_diffusion(const Mesh& mesh, const ScalarFunction& f, double mu,
                                       const ScalarFunction* boundary_value, LoadMode load) {
  if (mesh.kind != MeshKind::Bulk) throw PreconditionError("bulk problem needs a bulk mesh");
  if (mesh.boundary.empty()) throw PreconditionError("bulk mesh has no boundary node list");
  if (!(mu >= 0.0)) throw DomainError("reaction coefficient must be non-negative");
  Solution sol;
  auto start = Clock::now();
  const AssemblyOutput out = assemble_batched(mesh);
  std::tie(sol.mass, sol.stiffness) = out.matrices();
  const Eigen::VectorXd b = load == LoadMode::Nodal
                                ? spmv(sol.mass, interpolate(mesh, f).values)
                                : assemble_load(mesh, f, LoadMode::Quadrature);
  const CsrMatrix system = add_scaled(sol.stiffness, sol.mass, mu);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.boundary.size()));
  if (boundary_value != nullptr)
    for (std::size_t k = 0; k < mesh.boundary.size(); ++k)
      g(static_cast<Eigen::Index>(k)) = (*boundary_value)(mesh.nodes.row(mesh.boundary[k]).transpose());
  const DirichletSystem constrained = apply_dirichlet(system, b, mesh.boundary, g);
  sol.stats.t_assembly_s = seconds_since(start);

  start = Clock::now();
  Eigen::VectorXd guess = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k)
    guess(mesh.boundary[k]) = g(static_cast<Eigen::Index>(k));
  CgResult cg = cg_solve(constrained.matrix, constrained.rhs, {}, &guess);
  sol.stats.t_solve_s = seconds_since(start);
  if (!cg.converged)
    throw SolverError("CG did not converge (relative residual " +
                      std::to_string(cg.relative_residual) + ")");
  sol.stats.iterations = cg.iterations;
  sol.stats.relative_residual = cg.relative_residual;
  sol.u = {&mesh, std::move(cg.x)};
  return sol;
}

ErrorNorms compute_errors(const NodalField& u, const ScalarFunction& exact, const CsrMatrix& mass,
                          const CsrMatrix& stiffness) {
  const Eigen::VectorXd e = u.values - interpolate(*u.mesh, exact).values;
  return {std::sqrt(std::max(0.0, e.dot(spmv(mass, e)))),
          std::sqrt(std::max(0.0, e.dot(spmv(stiffness, e))))};
}

ErrorNorms compute_errors(const NodalField& u, const ScalarFunction& exact) {
  const AssemblyOutput out = assemble_batched(*u.mesh);
  const auto [mass, stiffness] = out.matrices();
  return compute_errors(u, exact, mass, stiffness);
}

ErrorNorms compute_errors_quadrature(const NodalField& u, const ScalarFunction& exact,
                                     const VectorFunction& exact_gradient) {
  const Mesh& mesh = *u.mesh;
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const int Q = pack.num_points();
  const int d = mesh.dim;
  const int m = mesh.ambient;
  double l2 = 0.0;
  double h1 = 0.0;
  const Index chunk = 4096;
  for (Index first = 0; first < mesh.num_elements(); first += chunk) {
    const Index count = std::min(chunk, mesh.num_elements() - first);
    const ElementBatch batch = element_geometry(mesh, first, count);
    for (Index k = 0; k < count; ++k) {
      Eigen::VectorXd local(pack.dofs);
      for (int j = 0; j < pack.dofs; ++j) local(j) = u.values(mesh.elements(first + k, j));
      const Eigen::MatrixXd x = batch.node_page(k).transpose() * pack.values;
      for (int q = 0; q < Q; ++q) {
        const double wdet = pack.weights(q) * batch.det(q, k);
        const double diff = local.dot(pack.values.col(q)) - exact(x.col(q));
        const Eigen::MatrixXd C = batch.inverse_page(k, q);
        const Eigen::VectorXd grad_h = C.topRows(d).transpose() * (pack.gradient_page(q) * local);
        Eigen::VectorXd grad = exact_gradient(x.col(q));
        if (m > d) {
          const Eigen::VectorXd nu = batch.jacobian_page(k, q).col(m - 1).normalized();
          grad -= grad.dot(nu) * nu;
        }
        l2 += wdet * diff * diff;
        h1 += wdet * (grad_h - grad).squaredNorm();
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

Problem sphere_x1x2() {
  Problem p;
  p.id = "sphere-x1x2";
  p.kind = MeshKind::Surface;
  p.exact = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return x(0) * x(1) / x.squaredNorm(); };
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return 6.0 * x(0) * x(1) / x.squaredNorm(); };
  p.gradient = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double r2 = x.squaredNorm();
    const double u = x(0) * x(1) / r2;
    Eigen::VectorXd g = -2.0 * u / r2 * x;
    g(0) += x(1) / r2;
    g(1) += x(0) / r2;
    return g;
  };
  return p;
}

Problem disk_radial(double mu) {
  Problem p;
  p.id = "disk-radial";
  p.kind = MeshKind::Bulk;
  p.mu = mu;
  p.exact = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double r2 = x.squaredNorm();
    return 1.0 - r2 * r2;
  };
  p.f = [mu](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double r2 = x.squaredNorm();
    return 16.0 * r2 + mu * (1.0 - r2 * r2);
  };
  p.gradient = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return Eigen::VectorXd(-4.0 * x.squaredNorm() * x);
  };
  return p;
}

Problem builtin_problem(const std::string& id, double mu) {
  if (id == "sphere-x1x2") return sphere_x1x2();
  if (id == "disk-radial") return disk_radial(mu);
  throw DomainError("unknown problem '" + id + "'");
}

std::vector<ConvergenceRow> convergence_study(const Problem& problem, const std::vector<Mesh>& meshes,
                                              ErrorMode mode) {
  if (meshes.size() < 2) throw PreconditionError("a convergence study needs at least 2 meshes");
  std::vector<ConvergenceRow> rows;
  for (const Mesh& mesh : meshes) {
    if (mesh.kind != problem.kind) throw PreconditionError("mesh kind does not match the problem");
    const Solution sol = problem.kind == MeshKind::Surface
                             ? solve_surface_poisson(mesh, problem.f)
                             : solve_bulk_reaction_diffusion(mesh, problem.f, problem.mu);
    ErrorNorms err;
    if (mode == ErrorMode::Quadrature) {
      err = compute_errors_quadrature(sol.u, problem.exact, problem.gradient);
    } else {
      err = compute_errors(sol.u, problem.exact, sol.mass, sol.stiffness);
    }
    ConvergenceRow row;
    row.h = mesh_size(mesh);
    row.dofs = mesh.num_nodes();
    row.err_l2 = err.l2;
    row.err_h1 = err.h1;
    row.eoc_l2 = std::numeric_limits<double>::quiet_NaN();
    row.eoc_h1 = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      const double ratio = std::log(prev.h / row.h);
      row.eoc_l2 = std::log(prev.err_l2 / row.err_l2) / ratio;
      row.eoc_h1 = std::log(prev.err_h1 / row.err_h1) / ratio;
    }
    row.t_assembly_s = sol.stats.t_assembly_s;
    row.t_solve_s = sol.stats.t_solve_s;
    rows.push_back(row);
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out) {
  out << "h,dofs,err_L2,err_H1,eoc_L2,eoc_H1,t_assembly_s,t_solve_s\n";
  out << std::setprecision(10);
  for (const auto& r : rows)
    out << r.h << ',' << r.dofs << ',' << r.err_l2 << ',' << r.err_h1 << ',' << r.eoc_l2 << ','
        << r.eoc_h1 << ',' << r.t_assembly_s << ',' << r.t_solve_s << '\n';
}

}  // namespace ellfem
