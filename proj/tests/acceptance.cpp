// Acceptance checks. Prints one PASS/FAIL line per criterion, preceded by
// indented detail lines; exits non-zero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bench.hpp"
#include "corpus.hpp"
#include "ellfem/assembly.hpp"
#include "ellfem/geomflow.hpp"
#include "ellfem/problems.hpp"

using namespace ellfem;

namespace {

// -- pinned tolerances -------------------------------------------------------
constexpr double kOracleTol = 1e-12;
constexpr double kP1FastTol = 1e-13;
constexpr int kCorpusMin = 12;
constexpr double kQuadratureTol = 1e-13;
constexpr int kStatedDegree[] = {0, 10, 8, 7};
constexpr double kAreaOrder[] = {0.0, 2.0, 3.0};
// an observed order is accepted down to this much below the nominal order
constexpr double kOrderSlack = 0.05;
constexpr double kKernelTol = 1e-12;
constexpr double kEocL2P2[] = {2.7, 3.3};
constexpr double kEocH1P2[] = {1.7, 2.3};
constexpr double kEocL2P1[] = {1.8, 2.2};
constexpr double kEocH1P1[] = {0.8, 1.2};
constexpr double kDziukRadiusTol = 0.02;
constexpr double kKllRadiusTol = 0.01;
constexpr double kDriftTol = 0.05;
constexpr double kNonlinearNaiveTol = 1e-12;
constexpr double kNonlinearSphereTol = 0.02;
constexpr double kSpeedupMin = 5.0;
constexpr double kDoublingMax = 2.5;
constexpr double kFractionBand[] = {0.40, 0.80};
constexpr double kDimensionRatioMax = 1.5;
constexpr Index kBenchBatch = 4096;
constexpr int kRepeats = 3;

int failures = 0;

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

void verdict(int id, const char* name, bool ok, const std::string& summary) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name, summary.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool in(double x, const double band[2]) { return x >= band[0] && x <= band[1]; }

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  const auto corpus = fixtures::corpus();
  double worst = 0.0, worst_fast = 0.0;
  bool cells[2][4][3] = {};
  for (const auto& [name, mesh] : corpus) {
    cells[mesh.is_surface()][mesh.dim][mesh.order] = true;
    const auto [Mb, Ab] = assemble_batched(mesh).matrices();
    const auto [Mn, An] = assemble_naive(mesh).matrices();
    const double d = std::max(fixtures::relative_difference(Mb, Mn), fixtures::relative_difference(Ab, An));
    worst = std::max(worst, d);
    double df = 0.0;
    if (mesh.order == 1) {
      const auto [Mf, Af] = assemble_p1_fast(mesh).matrices();
      df = std::max(fixtures::relative_difference(Mb, Mf), fixtures::relative_difference(Ab, Af));
      worst_fast = std::max(worst_fast, df);
    }
    detail("%-18s |E|=%5d  naive %.2e  p1fast %.2e", name.c_str(), mesh.num_elements(), d, df);
  }
  bool covered = true;
  for (int d = 2; d <= 3; ++d)
    for (int p = 1; p <= 2; ++p) covered = covered && cells[0][d][p];
  for (int d = 1; d <= 2; ++d)
    for (int p = 1; p <= 2; ++p) covered = covered && cells[1][d][p];
  const bool ok = static_cast<int>(corpus.size()) >= kCorpusMin && covered && worst <= kOracleTol &&
                  worst_fast <= kP1FastTol;
  verdict(1, "oracle equivalence", ok,
          fmt("%zu meshes, all 8 cells %s, max rel diff naive %.2e (tol %.0e), p1fast %.2e (tol %.0e)", corpus.size(),
              covered ? "covered" : "NOT covered", worst, kOracleTol, worst_fast, kP1FastTol));
}

void quadrature_exactness() {
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const QuadratureRule& rule = quadrature_rule(d);
    const int degree = kStatedDegree[d];
    double worst_d = 0.0;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; b <= (d >= 2 ? degree - a : 0); ++b)
        for (int c = 0; c <= (d == 3 ? degree - a - b : 0); ++c) {
          double sum = 0.0;
          for (int q = 0; q < rule.size(); ++q) {
            double v = std::pow(rule.points(0, q), a);
            if (d >= 2) v *= std::pow(rule.points(1, q), b);
            if (d == 3) v *= std::pow(rule.points(2, q), c);
            sum += rule.weights(q) * v;
          }
          const double exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + d);
          worst_d = std::max(worst_d, std::abs(sum - exact) / exact);
        }
    detail("dim %d: %2d points, shipped degree %2d, checked up to %2d, max rel err %.2e", d, rule.size(),
           rule.degree, degree, worst_d);
    worst = std::max(worst, worst_d);
    if (rule.degree < degree) worst = std::numeric_limits<double>::infinity();
  }
  verdict(2, "quadrature exactness", worst <= kQuadratureTol,
          fmt("max rel err %.2e over all monomials (tol %.0e)", worst, kQuadratureTol));
}

void geometric_consistency() {
  bool ok = true;
  for (int p = 1; p <= 2; ++p) {
    std::vector<double> err, h;
    for (int r = 2; r <= 5; ++r) {
      const Mesh mesh = generate_sphere(r, p);
      h.push_back(mesh_size(mesh));
      const CsrMatrix M = assemble_batched(mesh).mass_matrix();
      double total = 0.0;
      for (double v : M.vals) total += v;
      err.push_back(std::abs(total - 4 * std::numbers::pi));
    }
    double min_order = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < err.size(); ++k)
      min_order = std::min(min_order, std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]));
    detail("P%d: |1'M1 - 4pi| = %.2e %.2e %.2e %.2e, min observed order %.3f (need %.1f - %.2f)", p, err[0], err[1],
           err[2], err[3], min_order, kAreaOrder[p], kOrderSlack);
    ok = ok && min_order >= kAreaOrder[p] - kOrderSlack;
  }
  double worst = 0.0;
  std::vector<Mesh> closed;
  for (const auto& [name, mesh] : fixtures::corpus())
    if (is_closed_surface(mesh)) closed.push_back(mesh);
  for (int r = 2; r <= 5; ++r)
    for (int p = 1; p <= 2; ++p) closed.push_back(generate_sphere(r, p));
  for (const Mesh& mesh : closed) {
    const CsrMatrix A = assemble_batched(mesh).stiffness_matrix();
    const Eigen::VectorXd a1 = spmv(A, Eigen::VectorXd::Ones(mesh.num_nodes()));
    worst = std::max(worst, a1.cwiseAbs().maxCoeff() / max_abs(A));
  }
  detail("max |A 1| / max|A| over %zu closed meshes: %.2e", closed.size(), worst);
  ok = ok && worst <= kKernelTol;
  verdict(3, "geometric consistency", ok, fmt("area orders and A 1 = 0 (%.2e, tol %.0e)", worst, kKernelTol));
}

void convergence_orders() {
  std::vector<Mesh> spheres;
  for (int r = 2; r <= 5; ++r) spheres.push_back(generate_sphere(r, 2));
  const auto s = convergence_study(sphere_x1x2(), spheres);
  std::vector<Mesh> disks;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) disks.push_back(generate_disk(h));
  const auto d = convergence_study(disk_radial(10.0), disks);

  bool ok = true;
  auto report = [&](const char* label, const std::vector<ConvergenceRow>& rows, const double l2[2],
                    const double h1[2]) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const bool judged = k >= 2;  // EOCs among the last 3 levels
      detail("%s h=%.4f dofs=%6d L2=%.3e H1=%.3e eoc_L2=%5.2f eoc_H1=%5.2f%s", label, rows[k].h, rows[k].dofs,
             rows[k].err_l2, rows[k].err_h1, rows[k].eoc_l2, rows[k].eoc_h1, judged ? "" : "  (not judged)");
      if (judged) ok = ok && in(rows[k].eoc_l2, l2) && in(rows[k].eoc_h1, h1);
    }
  };
  report("sphere P2", s, kEocL2P2, kEocH1P2);
  report("disk   P1", d, kEocL2P1, kEocH1P1);
  verdict(4, "convergence orders", ok,
          fmt("sphere P2 eoc (%.2f, %.2f), disk P1 eoc (%.2f, %.2f) at the finest pair", s.back().eoc_l2,
              s.back().eoc_h1, d.back().eoc_l2, d.back().eoc_h1));
}

// R' = -2 / R, R(0) = 1, classical RK4 with a fine fixed step.
double ode_radius(double t) {
  const int n = std::max(1, static_cast<int>(std::ceil(t / 1e-5)));
  const double h = t / n;
  double R = 1.0;
  auto f = [](double r) { return -2.0 / r; };
  for (int i = 0; i < n; ++i) {
    const double k1 = f(R), k2 = f(R + 0.5 * h * k1), k3 = f(R + 0.5 * h * k2), k4 = f(R + h * k3);
    R += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return R;
}

struct FlowCheck {
  double radius_err = 0.0;
  double drift = 0.0;
  bool decreasing = true;
};

FlowCheck check_flow(const FlowResult& r) {
  FlowCheck c;
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    const double R = ode_radius(r.log[k].t);
    c.radius_err = std::max(c.radius_err, std::abs(r.log[k].mean_radius - R) / R);
    c.drift = std::max(c.drift, r.log[k].normal_drift);
    if (k > 0 && !(r.log[k].area < r.log[k - 1].area)) c.decreasing = false;
  }
  return c;
}

double kll_fraction = 0.0;

void mcf_sphere() {
  detail("ODE oracle R(0.1) = %.10f, closed form %.10f", ode_radius(0.1), std::sqrt(0.6));
  FlowOptions dz;
  dz.algorithm = FlowAlgorithm::Dziuk;
  dz.tau = 1e-4;
  dz.final_time = 0.01;
  const Mesh fine = generate_sphere(5, 1);
  const FlowResult rd = flow_driver(fine, dz);
  const FlowCheck cd = check_flow(rd);
  detail("Dziuk P1 |E|=%d, %zu steps: max rel radius err %.2e, area decreasing %s", fine.num_elements(),
         rd.log.size() - 1, cd.radius_err, cd.decreasing ? "yes" : "no");

  FlowOptions kll;
  kll.tau = 0.002;
  kll.final_time = 0.1;
  kll.exact_sphere_start = true;
  const Mesh p2 = generate_sphere(3, 2);
  const FlowResult rk = flow_driver(p2, kll);
  const FlowCheck ck = check_flow(rk);
  kll_fraction = rk.assembly_fraction();
  detail("KLL P2 |E|=%d, %zu steps: max rel radius err %.2e, normal drift %.2e, area decreasing %s",
         p2.num_elements(), rk.log.size() - 1, ck.radius_err, ck.drift, ck.decreasing ? "yes" : "no");

  const bool ok = rd.completed && rk.completed && cd.radius_err <= kDziukRadiusTol &&
                  ck.radius_err <= kKllRadiusTol && ck.drift <= kDriftTol && cd.decreasing && ck.decreasing;
  verdict(5, "MCF sphere oracle", ok,
          fmt("Dziuk radius %.1e (tol %.0e), KLL radius %.1e (tol %.0e), drift %.1e (tol %.2f)", cd.radius_err,
              kDziukRadiusTol, ck.radius_err, kKllRadiusTol, ck.drift, kDriftTol));
}

// Surface gradient through DF (DF^T DF)^{-1}, dynamic matrices, no shared code
// with the library kernels beyond the reference basis.
Eigen::MatrixXd naive_nonlinear(const Mesh& mesh, const Eigen::MatrixXd& u) {
  const int d = mesh.dim, m = mesh.ambient, N = mesh.dofs_per_element();
  const QuadratureRule& rule = quadrature_rule(d);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(mesh.num_nodes(), m + 1);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Eigen::MatrixXd X(N, m), U(N, m + 1);
    for (int j = 0; j < N; ++j) {
      X.row(j) = mesh.nodes.row(mesh.elements(e, j));
      U.row(j) = u.row(mesh.elements(e, j));
    }
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd xi = rule.points.col(q);
      const Eigen::VectorXd phi = basis_eval(d, mesh.order, xi);
      const Eigen::MatrixXd G = basis_grad(d, mesh.order, xi);
      const Eigen::MatrixXd DF = X.transpose() * G.transpose();
      const Eigen::MatrixXd g = DF.transpose() * DF;
      const Eigen::MatrixXd sg = DF * g.inverse() * G;
      double norm2 = 0.0;
      for (int k = 0; k < m; ++k) norm2 += (sg * U.col(k)).squaredNorm();
      const Eigen::RowVectorXd uq = phi.transpose() * U;
      for (int j = 0; j < N; ++j)
        f.row(mesh.elements(e, j)) += rule.weights(q) * std::sqrt(g.determinant()) * norm2 * phi(j) * uq;
    }
  }
  return f;
}

void nonlinear_term() {
  const Mesh meshes[] = {jitter_nodes(generate_sphere(2, 2), 0.02, 21), jitter_nodes(generate_sphere(2, 1), 0.03, 22),
                         jitter_nodes(generate_sphere(1, 2), 0.05, 23), jitter_nodes(generate_circle(17, 2), 0.03, 24),
                         jitter_nodes(generate_circle(23, 1), 0.03, 25)};
  double worst = 0.0;
  std::srand(2024);
  for (const Mesh& mesh : meshes) {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Random(mesh.num_nodes(), mesh.ambient + 1);
    const Eigen::MatrixXd a = kll_nonlinear_rhs(mesh, u);
    const Eigen::MatrixXd b = naive_nonlinear(mesh, u);
    const double rel = (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
    detail("random mesh dim %d P%d |E|=%4d: rel diff %.2e", mesh.dim, mesh.order, mesh.num_elements(), rel);
    worst = std::max(worst, rel);
  }
  const Mesh sphere = generate_sphere(5, 2);
  Eigen::MatrixXd u(sphere.num_nodes(), 4);
  u.leftCols(3) = sphere.nodes;
  u.col(3).setConstant(2.0);
  const Eigen::VectorXd f2 = kll_nonlinear_rhs(sphere, u).col(3);
  const Eigen::VectorXd expected = 4.0 * spmv(assemble_batched(sphere).mass_matrix(), Eigen::VectorXd::Ones(sphere.num_nodes()));
  const double sphere_rel = (f2 - expected).norm() / expected.norm();
  detail("exact-data sphere |E|=%d: |f - 4 M 1| / |4 M 1| = %.2e", sphere.num_elements(), sphere_rel);
  verdict(6, "KLL nonlinear term", worst <= kNonlinearNaiveTol && sphere_rel <= kNonlinearSphereTol,
          fmt("naive %.2e (tol %.0e), analytic %.2e (tol %.2f)", worst, kNonlinearNaiveTol, sphere_rel,
              kNonlinearSphereTol));
}

Mesh disk_p2(int rings) { return fixtures::lifted_p2(generate_disk(1.0 / rings)); }

void runtime_claims() {
  bool ok = true;
  // speed-up at |E| >= 1e5
  const Mesh big = generate_sphere(7, 2);
  const auto naive = cli::bench_assembly(big, cli::Backend::Naive, kRepeats, kBenchBatch);
  const auto batched = cli::bench_assembly(big, cli::Backend::Batched, kRepeats, kBenchBatch);
  const auto batched_default = cli::bench_assembly(big, cli::Backend::Batched, kRepeats, AssemblyOptions{}.batch_size);
  const double speedup = naive.t_median_s / batched.t_median_s;
  detail("P2 sphere |E|=%d: naive %.3f s, batched(B=%d) %.3f s, speed-up %.2fx", big.num_elements(), naive.t_median_s,
         kBenchBatch, batched.t_median_s, speedup);
  detail("  batched with default B=%d: %.3f s, speed-up %.2fx (informational)", AssemblyOptions{}.batch_size,
         batched_default.t_median_s, naive.t_median_s / batched_default.t_median_s);
  ok = ok && speedup >= kSpeedupMin;

  // doubling |E|: P2 disks with rings k, k sqrt(2), 2k, ...
  const int rings[] = {58, 82, 116, 164};
  double prev_t = 0.0, worst_ratio = 0.0;
  Index prev_e = 0;
  for (int k : rings) {
    const Mesh mesh = disk_p2(k);
    const double t = cli::bench_assembly(mesh, cli::Backend::Batched, kRepeats, kBenchBatch).t_median_s;
    if (prev_t > 0.0) {
      const double ratio = t / prev_t;
      worst_ratio = std::max(worst_ratio, ratio);
      detail("P2 disk |E| %6d -> %6d (x%.3f): time %.4f -> %.4f s, ratio %.2f", prev_e, mesh.num_elements(),
             static_cast<double>(mesh.num_elements()) / prev_e, prev_t, t, ratio);
    }
    prev_t = t;
    prev_e = mesh.num_elements();
  }
  ok = ok && worst_ratio <= kDoublingMax;

  // batch-size independence
  const Mesh mid = jitter_nodes(generate_sphere(5, 2), 0.002, 99);
  const auto [M0, A0] = assemble_batched(mid).matrices();
  bool bitwise = true;
  for (Index bs : {1, 1000, 4096, 20479}) {
    const auto [M1, A1] = assemble_batched(mid, {.batch_size = bs}).matrices();
    bitwise = bitwise && fixtures::same_bits(M0, M1) && fixtures::same_bits(A0, A1);
  }
  detail("batch sizes 1, 1000, 4096, 20479 vs 1e6 on |E|=%d: %s", mid.num_elements(),
         bitwise ? "bitwise identical" : "DIFFERENT");
  ok = ok && bitwise;

  // KLL assembly fraction
  FlowOptions kll;
  kll.tau = 0.002;
  kll.final_time = 0.1;
  kll.exact_sphere_start = true;
  const Mesh s4 = generate_sphere(4, 2);
  const double f4 = flow_driver(s4, kll).assembly_fraction();
  detail("KLL assembly fraction: |E|=1280 %.2f, |E|=%d %.2f (band %.2f-%.2f)", kll_fraction, s4.num_elements(), f4,
         kFractionBand[0], kFractionBand[1]);
  ok = ok && in(kll_fraction, kFractionBand) && in(f4, kFractionBand);

  verdict(7, "runtime claims", ok,
          fmt("speed-up %.2fx (min %.0fx), worst doubling ratio %.2f (max %.1f), bitwise %s, KLL fraction %.2f/%.2f",
              speedup, kSpeedupMin, worst_ratio, kDoublingMax, bitwise ? "yes" : "no", kll_fraction, f4));
}

void dimension_independence() {
  const Mesh surface = generate_sphere(6, 2);
  const Mesh bulk = disk_p2(117);
  const auto ts = cli::bench_assembly(surface, cli::Backend::Batched, kRepeats, kBenchBatch);
  const auto tb = cli::bench_assembly(bulk, cli::Backend::Batched, kRepeats, kBenchBatch);
  const double per_s = ts.t_median_s / surface.num_elements();
  const double per_b = tb.t_median_s / bulk.num_elements();
  const double ratio = std::max(per_s, per_b) / std::min(per_s, per_b);
  detail("P2 surface |E|=%d: %.4f s; P2 bulk |E|=%d: %.4f s; per-element ratio %.2f", surface.num_elements(),
         ts.t_median_s, bulk.num_elements(), tb.t_median_s, ratio);
  verdict(8, "dimension independence", ratio <= kDimensionRatioMax,
          fmt("bulk/surface time ratio %.2f (max %.1f)", ratio, kDimensionRatioMax));
}

}  // namespace

int main() {
  oracle_equivalence();
  quadrature_exactness();
  geometric_consistency();
  convergence_orders();
  mcf_sphere();
  nonlinear_term();
  runtime_claims();
  dimension_independence();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
