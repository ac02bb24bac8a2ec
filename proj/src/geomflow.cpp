#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "ellfem/geomflow.hpp"
#include "kernels.hpp"

namespace ellfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Packs (n, H) into the N x (m + 1) unknown layout.
Eigen::MatrixXd pack_unknowns(const FlowState& s) {
  Eigen::MatrixXd u(s.n.rows(), s.n.cols() + 1);
  u.leftCols(s.n.cols()) = s.n;
  u.col(s.n.cols()) = s.H;
  return u;
}

void require_closed_surface(const Mesh& mesh) {
  if (!mesh.is_surface() || !is_closed_surface(mesh))
    throw PreconditionError("curvature flow needs a closed surface mesh");
}

}  // namespace

BdfScheme BdfScheme::make(int order) {
  switch (order) {
    case 1: return {1, {1.0, -1.0}, {1.0}};
    case 2: return {2, {1.5, -2.0, 0.5}, {2.0, -1.0}};
    default: throw DomainError("BDF order must be 1 or 2");
  }
}

Mesh with_nodes(const Mesh& topology, const NodeArray& x) {
  if (x.rows() != topology.nodes.rows() || x.cols() != topology.nodes.cols())
    throw DimensionMismatch("node array does not match the mesh");
  Mesh mesh = topology;
  mesh.nodes = x;
  return mesh;
}

double surface_area(const Mesh& mesh) {
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  double area = 0.0;
  const Index chunk = 8192;
  for (Index first = 0; first < mesh.num_elements(); first += chunk) {
    const Index count = std::min(chunk, mesh.num_elements() - first);
    const ElementBatch batch = element_geometry(mesh, first, count);
    area += (pack.weights.transpose() * batch.det).sum();
  }
  return area;
}

NodeArray dziuk_step(const Mesh& mesh, double tau, StepTiming* timing) {
  require_closed_surface(mesh);
  if (tau < 0.0) throw DomainError("time step must be non-negative");
  if (tau == 0.0) return mesh.nodes;

  auto start = Clock::now();
  const AssemblyOutput out = assemble_batched(mesh);
  const auto [mass, stiffness] = out.matrices();
  const CsrMatrix system = add_scaled(mass, stiffness, tau);
  if (timing != nullptr) timing->assembly_s = seconds_since(start);

  start = Clock::now();
  NodeArray x(mesh.nodes.rows(), mesh.nodes.cols());
  for (Eigen::Index k = 0; k < mesh.nodes.cols(); ++k) {
    const Eigen::VectorXd xk = mesh.nodes.col(k);
    const CgResult cg = cg_solve(system, spmv(mass, xk), {}, &xk);
    if (!cg.converged) throw SolverError("Dziuk step: CG did not converge");
    x.col(k) = cg.x;
  }
  if (timing != nullptr) timing->solve_s = seconds_since(start);
  return x;
}

namespace {

// Local nonlinear vectors of batch element b into out (N x (M + 1), column-major).
template <typename K>
void nonlinear_local(const Mesh& mesh, const ReferencePack& pack, const ElementBatch& batch,
                     Index b, const Eigen::Ref<const Eigen::MatrixXd>& u, double* out) {
  constexpr int D = K::GradPage::RowsAtCompileTime;
  constexpr int M = K::Square::RowsAtCompileTime;
  constexpr int N = K::N;
  using Values = Eigen::Matrix<double, N, M + 1>;
  const int Q = pack.num_points();
  const Index e = batch.first + b;
  Values ul;
  for (int j = 0; j < N; ++j) ul.row(j) = u.row(mesh.elements(e, j));
  Eigen::Map<Values> f(out);
  f.setZero();
  for (int q = 0; q < Q; ++q) {
    const std::ptrdiff_t page = (static_cast<std::ptrdiff_t>(b) * Q + q) * M * M;
    Eigen::Map<const typename K::Square> C(batch.C.data() + page);
    Eigen::Map<const typename K::GradPage> G(pack.gradients.data() +
                                             static_cast<std::ptrdiff_t>(q) * D * N);
    const Eigen::Matrix<double, M, M> J =
        C.template topRows<D>().transpose() * (G * ul.template leftCols<M>());
    const Eigen::Matrix<double, N, 1> phi = pack.values.col(q);
    const double s = pack.weights(q) * batch.det(q, b) * J.squaredNorm();
    f.noalias() += (s * phi) * (phi.transpose() * ul);
  }
}

Eigen::MatrixXd scatter_local(const Mesh& mesh, const Eigen::MatrixXd& local) {
  const int N = mesh.dofs_per_element();
  const int m = mesh.ambient;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(mesh.num_nodes(), m + 1);
  for (Index e = 0; e < mesh.num_elements(); ++e)
    for (int k = 0; k <= m; ++k)
      for (int j = 0; j < N; ++j) f(mesh.elements(e, j), k) += local(k * N + j, e);
  return f;
}

void check_unknowns(const Mesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& u) {
  if (!mesh.is_surface()) throw PreconditionError("nonlinear term needs a surface mesh");
  if (u.rows() != mesh.num_nodes() || u.cols() != mesh.ambient + 1)
    throw DimensionMismatch("unknowns must be N x " + std::to_string(mesh.ambient + 1));
}

// Mass, stiffness and nonlinear term from one pass over the element geometry.
AssemblyOutput assemble_with_nonlinear(const Mesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& u,
                                       Eigen::MatrixXd& f) {
  check_unknowns(mesh, u);
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  Eigen::MatrixXd local(pack.dofs * (mesh.ambient + 1), mesh.num_elements());
  AssemblyOutput out = detail::dispatch(mesh, [&](auto kernel) {
    using K = decltype(kernel);
    return detail::assemble_batched(mesh, {}, [&](const ElementBatch& batch, Index b) {
      nonlinear_local<K>(mesh, pack, batch, b, u, local.col(batch.first + b).data());
    });
  });
  f = scatter_local(mesh, local);
  return out;
}

}  // namespace

Eigen::MatrixXd kll_nonlinear_rhs(const Mesh& mesh, const Eigen::Ref<const Eigen::MatrixXd>& u) {
  check_unknowns(mesh, u);
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const Index ne = mesh.num_elements();
  Eigen::MatrixXd local(pack.dofs * (mesh.ambient + 1), ne);

  detail::dispatch(mesh, [&](auto kernel) {
    using K = decltype(kernel);
    ElementBatch batch;
    const Index chunk = 65536;
    for (Index first = 0; first < ne; first += chunk) {
      const Index count = std::min(chunk, ne - first);
      if (batch.count != count) detail::reserve_batch(batch, mesh, first, count);
      batch.first = first;
      K::geometry(mesh, pack, first, count, batch);
#pragma omp parallel for schedule(static)
      for (Index b = 0; b < count; ++b)
        nonlinear_local<K>(mesh, pack, batch, b, u, local.col(first + b).data());
    }
  });
  return scatter_local(mesh, local);
}

FlowState kll_step(const Mesh& topology, std::span<const FlowState> history, double tau,
                   const BdfScheme& scheme, StepTiming* timing) {
  const int q = scheme.order;
  if (static_cast<int>(history.size()) < q)
    throw PreconditionError("KLL step needs " + std::to_string(q) + " previous states");
  if (!(tau > 0.0)) throw DomainError("time step must be positive");

  NodeArray x_ext = NodeArray::Zero(topology.nodes.rows(), topology.nodes.cols());
  Eigen::MatrixXd u_ext = Eigen::MatrixXd::Zero(topology.nodes.rows(), topology.nodes.cols() + 1);
  for (int j = 0; j < q; ++j) {
    x_ext += scheme.gamma[j] * history[j].x;
    u_ext += scheme.gamma[j] * pack_unknowns(history[j]);
  }

  auto start = Clock::now();
  const Mesh surface = with_nodes(topology, x_ext);
  Eigen::MatrixXd f;
  const AssemblyOutput out = assemble_with_nonlinear(surface, u_ext, f);
  const auto [mass, stiffness] = out.matrices();
  const CsrMatrix system = add_scaled(stiffness, mass, scheme.delta[0] / tau);
  if (timing != nullptr) timing->assembly_s = seconds_since(start);

  start = Clock::now();
  Eigen::MatrixXd past = Eigen::MatrixXd::Zero(u_ext.rows(), u_ext.cols());
  NodeArray x_past = NodeArray::Zero(x_ext.rows(), x_ext.cols());
  for (int j = 1; j <= q; ++j) {
    past += scheme.delta[j] * pack_unknowns(history[j - 1]);
    x_past += scheme.delta[j] * history[j - 1].x;
  }
  Eigen::MatrixXd u(u_ext.rows(), u_ext.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    const Eigen::VectorXd rhs = f.col(k) - spmv(mass, past.col(k)) / tau;
    const Eigen::VectorXd guess = u_ext.col(k);
    const CgResult cg = cg_solve(system, rhs, {}, &guess);
    if (!cg.converged) throw SolverError("KLL step: CG did not converge");
    u.col(k) = cg.x;
  }
  if (timing != nullptr) timing->solve_s = seconds_since(start);

  FlowState next;
  const int m = topology.ambient;
  next.t = history[0].t + tau;
  next.n = u.leftCols(m);
  next.H = u.col(m);
  next.v = -(next.n.array().colwise() * next.H.array());
  next.x = (tau * next.v - x_past) / scheme.delta[0];
  return next;
}

std::vector<FlowState> sphere_exact_history(const Mesh& mesh, int count, double tau) {
  if (count < 1) throw DomainError("history needs at least one state");
  NodeArray unit = mesh.nodes;
  unit.rowwise().normalize();
  std::vector<FlowState> states;
  for (int k = count - 1; k >= 0; --k) {
    const double t = k * tau;
    const double radius_sq = 1.0 - 4.0 * t;
    if (!(radius_sq > 0.0)) throw DomainError("sphere has collapsed before the requested time");
    const double radius = std::sqrt(radius_sq);
    FlowState s;
    s.t = t;
    s.x = radius * unit;
    s.n = unit;
    s.H = Eigen::VectorXd::Constant(mesh.num_nodes(), 2.0 / radius);
    s.v = -(2.0 / radius) * unit;
    states.push_back(std::move(s));
  }
  return states;
}

FlowState initial_state(const Mesh& mesh) {
  require_closed_surface(mesh);
  const int d = mesh.dim;
  const int m = mesh.ambient;
  const ReferenceElement ref = reference_element(d, mesh.order);
  NodeArray normals = NodeArray::Zero(mesh.num_nodes(), m);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Eigen::MatrixXd X(ref.dofs, m);
    for (int j = 0; j < ref.dofs; ++j) X.row(j) = mesh.nodes.row(mesh.elements(e, j));
    for (int j = 0; j < ref.dofs; ++j) {
      const Eigen::MatrixXd tangents = X.transpose() * basis_grad(d, mesh.order, ref.nodes.col(j)).transpose();
      Eigen::VectorXd normal(m);
      if (d == 2) {
        normal = Eigen::Vector3d(tangents.col(0)).cross(Eigen::Vector3d(tangents.col(1)));
      } else {
        normal << -tangents(1, 0), tangents(0, 0);
      }
      double weight = 1.0;
      if (d == 2 && j <= d) {
        const Eigen::VectorXd a = X.row((j + 1) % 3) - X.row(j);
        const Eigen::VectorXd b = X.row((j + 2) % 3) - X.row(j);
        weight = std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
      }
      normals.row(mesh.elements(e, j)) += weight * normal.normalized().transpose();
    }
  }
  normals.rowwise().normalize();

  const AssemblyOutput out = assemble_batched(mesh);
  const auto [mass, stiffness] = out.matrices();
  Eigen::VectorXd H = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int k = 0; k < m; ++k) {
    const CgResult cg = cg_solve(mass, spmv(stiffness, mesh.nodes.col(k)));
    if (!cg.converged) throw SolverError("initial curvature: CG did not converge");
    H += cg.x.cwiseProduct(normals.col(k));
  }

  FlowState s;
  s.x = mesh.nodes;
  s.n = normals;
  s.H = H;
  s.v = -(normals.array().colwise() * H.array());
  return s;
}

double FlowResult::assembly_fraction() const {
  double assembly = 0.0;
  double total = 0.0;
  for (const auto& row : log) {
    assembly += row.assembly_s;
    total += row.total_s;
  }
  return total > 0.0 ? assembly / total : 0.0;
}

namespace {

FlowLogRow diagnostics(const Mesh& topology, const FlowState& s, int step, const StepTiming& timing,
                       double total_s) {
  FlowLogRow row;
  row.step = step;
  row.t = s.t;
  row.assembly_s = timing.assembly_s;
  row.solve_s = timing.solve_s;
  row.total_s = total_s;
  row.area = surface_area(with_nodes(topology, s.x));
  row.mean_radius = s.x.rowwise().norm().mean();
  row.normal_drift = s.n.size() > 0 ? (s.n.rowwise().norm().array() - 1.0).abs().maxCoeff() : 0.0;
  return row;
}

}  // namespace

FlowResult flow_driver(const Mesh& initial, const FlowOptions& options) {
  require_closed_surface(initial);
  if (options.final_time < 0.0) throw DomainError("final time must be non-negative");
  if (options.final_time > 0.0 && !(options.tau > 0.0)) throw DomainError("time step must be positive");
  const int steps = options.final_time > 0.0
                        ? static_cast<int>(std::llround(options.final_time / options.tau))
                        : 0;
  if (!options.snapshot_dir.empty()) std::filesystem::create_directories(options.snapshot_dir);

  FlowResult result;
  auto keep = [&](const FlowState& s, int step) {
    result.trajectory.push_back(s);
    if (!options.snapshot_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06d.ellmesh", step);
      write_mesh(with_nodes(initial, s.x), options.snapshot_dir / name);
    }
  };

  std::vector<FlowState> history;
  int step = 0;
  if (options.algorithm == FlowAlgorithm::Dziuk) {
    FlowState s;
    s.x = initial.nodes;
    history.push_back(s);
  } else if (options.exact_sphere_start) {
    history = sphere_exact_history(initial, std::min(options.bdf_order, steps + 1), options.tau);
  } else {
    history.push_back(initial_state(initial));
  }
  // exact startup states count as already computed steps
  for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
    result.log.push_back(diagnostics(initial, history[k], step, {}, 0.0));
    if (step == 0 || (options.snap_every > 0 && step % options.snap_every == 0)) keep(history[k], step);
    if (k > 0) ++step;
  }

  const BdfScheme scheme = BdfScheme::make(options.bdf_order);
  try {
    while (step < steps) {
      StepTiming timing;
      const auto start = Clock::now();
      FlowState next;
      if (options.algorithm == FlowAlgorithm::Dziuk) {
        next.t = history[0].t + options.tau;
        next.x = dziuk_step(with_nodes(initial, history[0].x), options.tau, &timing);
      } else {
        const int q = std::min(scheme.order, static_cast<int>(history.size()));
        next = kll_step(initial, history, options.tau, q == scheme.order ? scheme : BdfScheme::make(q),
                        &timing);
      }
      const double total = seconds_since(start);
      ++step;
      history.insert(history.begin(), std::move(next));
      if (static_cast<int>(history.size()) > scheme.order) history.pop_back();
      result.log.push_back(diagnostics(initial, history[0], step, timing, total));
      if (options.snap_every > 0 && step % options.snap_every == 0) keep(history[0], step);
    }
  } catch (const SingularElement& e) {
    result.completed = false;
    result.stop_reason = "mesh degenerated after step " + std::to_string(step) + ": " + e.what();
  } catch (const SolverError& e) {
    result.completed = false;
    result.stop_reason = "solver failed after step " + std::to_string(step) + ": " + e.what();
  }
  result.final_state = history[0];
  if (result.trajectory.empty() || result.trajectory.back().t != history[0].t) keep(history[0], step);
  return result;
}

void write_flow_log(const std::vector<FlowLogRow>& log, std::ostream& out) {
  out << "step,t,assembly_s,solve_s,area,mean_radius,normal_drift\n";
  out << std::setprecision(10);
  for (const auto& r : log)
    out << r.step << ',' << r.t << ',' << r.assembly_s << ',' << r.solve_s << ',' << r.area << ','
        << r.mean_radius << ',' << r.normal_drift << '\n';
}

}  // namespace ellfem
