#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ellfem/assembly.hpp"
#include "ellfem/mesh.hpp"
#include "ellfem/sparse.hpp"

namespace ellfem {

/// Coefficients of u_h = sum_j u_j phi_j on a mesh. Does not own the mesh.
struct NodalField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd values;
};

/// Nodal interpolant of f.
NodalField interpolate(const Mesh& mesh, const ScalarFunction& f);

struct SolveStats {
  double t_assembly_s = 0.0;
  double t_solve_s = 0.0;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct Solution {
  NodalField u;
  SolveStats stats;
  /// Assembled matrices, kept for error evaluation.
  CsrMatrix mass;
  CsrMatrix stiffness;
};

/// Mean-free solution of the Laplace-Beltrami problem -Delta u = f on a closed surface.
Solution solve_surface_poisson(const Mesh& mesh, const ScalarFunction& f,
                               LoadMode load = LoadMode::Quadrature);

/// -Delta u + mu u = f on a bulk domain with u = g on the boundary list
/// (g = 0 when boundary_value is null).
Solution solve_bulk_reaction_diffusion(const Mesh& mesh, const ScalarFunction& f, double mu,
                                       const ScalarFunction* boundary_value = nullptr,
                                       LoadMode load = LoadMode::Quadrature);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// e = u_h - I_h u: (sqrt(e^T M e), sqrt(e^T A e)).
ErrorNorms compute_errors(const NodalField& u, const ScalarFunction& exact);
ErrorNorms compute_errors(const NodalField& u, const ScalarFunction& exact, const CsrMatrix& mass,
                          const CsrMatrix& stiffness);

/// Errors of u_h against u itself at the quadrature points of the discrete
/// domain. The exact gradient is projected onto the discrete tangent space.
ErrorNorms compute_errors_quadrature(const NodalField& u, const ScalarFunction& exact,
                                     const VectorFunction& exact_gradient);

/// A manufactured problem with known solution.
struct Problem {
  std::string id;
  MeshKind kind = MeshKind::Surface;
  ScalarFunction f;
  ScalarFunction exact;
  VectorFunction gradient;
  double mu = 0.0;
};

/// u = x1 x2 on the unit sphere, f = 6 u (both extended 0-homogeneously).
Problem sphere_x1x2();
/// u = 1 - |x|^4 on the unit disk with -Delta u + mu u = f.
Problem disk_radial(double mu = 10.0);
/// Looks up "sphere-x1x2" or "disk-radial"; throws DomainError otherwise.
Problem builtin_problem(const std::string& id, double mu = 10.0);

enum class ErrorMode { Interpolant, Quadrature };

struct ConvergenceRow {
  double h = 0.0;
  Index dofs = 0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  /// NaN on the first row.
  double eoc_l2 = 0.0;
  double eoc_h1 = 0.0;
  double t_assembly_s = 0.0;
  double t_solve_s = 0.0;
};

std::vector<ConvergenceRow> convergence_study(const Problem& problem, const std::vector<Mesh>& meshes,
                                              ErrorMode mode = ErrorMode::Quadrature);

/// h,dofs,err_L2,err_H1,eoc_L2,eoc_H1,t_assembly_s,t_solve_s
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& out);

}  // namespace ellfem
