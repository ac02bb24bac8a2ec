#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ellfem/assembly.hpp"
#include "ellfem/mesh.hpp"

namespace ellfem {

/// BDF weights: xdot^n ~ (1/tau) sum_j delta[j] x^{n-j}; extrapolation
/// x~^n = sum_j gamma[j] x^{n-1-j}.
struct BdfScheme {
  int order = 2;
  std::vector<double> delta;
  std::vector<double> gamma;

  static BdfScheme make(int order);
};

/// Nodal state of an evolving closed surface. Rows are nodes.
struct FlowState {
  double t = 0.0;
  NodeArray x;
  /// approximate unit normals (KLL only; empty for Dziuk)
  NodeArray n;
  /// mean curvature, sum of principal curvatures (KLL only)
  Eigen::VectorXd H;
  NodeArray v;
};

struct StepTiming {
  double assembly_s = 0.0;
  double solve_s = 0.0;
};

/// Copy of the mesh topology with new node positions.
Mesh with_nodes(const Mesh& topology, const NodeArray& x);

/// One linearly implicit Euler step (M + tau A) x^n = M x^{n-1} on the current surface.
NodeArray dziuk_step(const Mesh& mesh, double tau, StepTiming* timing = nullptr);

/// Nonlinear KLL term on the surface given by mesh. u is N x 4 with columns
/// (n1, n2, n3, H); the result has the same layout:
///   column k < 3:  int |grad n_h|^2 (n_h)_k phi_j
///   column 3:      int |grad n_h|^2 H_h phi_j
Eigen::MatrixXd kll_nonlinear_rhs(const Mesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& u);

/// One KLL step. history[0] is the most recent state; scheme.order states needed.
FlowState kll_step(const Mesh& topology, std::span<const FlowState> history, double tau,
                   const BdfScheme& scheme, StepTiming* timing = nullptr);

/// Exact states of the shrinking unit sphere at t = 0, tau, ..., (count - 1) tau,
/// most recent first: x = R(t) x0 / |x0|, n = x0 / |x0|, H = 2 / R(t),
/// R(t) = sqrt(1 - 4 t).
std::vector<FlowState> sphere_exact_history(const Mesh& mesh, int count, double tau);

/// Initial KLL data for a general closed surface: angle-weighted nodal normals and
/// H from the weak identity A x = M (H n).
FlowState initial_state(const Mesh& mesh);

/// Sum of element measures.
double surface_area(const Mesh& mesh);

enum class FlowAlgorithm { Dziuk, Kll };

struct FlowOptions {
  FlowAlgorithm algorithm = FlowAlgorithm::Kll;
  double tau = 0.002;
  double final_time = 1.0;
  int bdf_order = 2;
  /// Start from the exact sphere history instead of initial_state().
  bool exact_sphere_start = false;
  /// Keep (and write, when snapshot_dir is set) every snap_every-th state; 0 keeps
  /// only the first and last.
  int snap_every = 0;
  std::filesystem::path snapshot_dir;
};

struct FlowLogRow {
  int step = 0;
  double t = 0.0;
  double assembly_s = 0.0;
  double solve_s = 0.0;
  /// wall time of the whole step
  double total_s = 0.0;
  double area = 0.0;
  double mean_radius = 0.0;
  double normal_drift = 0.0;
};

struct FlowResult {
  std::vector<FlowLogRow> log;
  std::vector<FlowState> trajectory;
  FlowState final_state;
  bool completed = true;
  std::string stop_reason;

  double assembly_fraction() const;
};

FlowResult flow_driver(const Mesh& initial, const FlowOptions& options);

/// step,t,assembly_s,solve_s,area,mean_radius,normal_drift
void write_flow_log(const std::vector<FlowLogRow>& log, std::ostream& out);

}  // namespace ellfem
