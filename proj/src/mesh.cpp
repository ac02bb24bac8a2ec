#include "ellfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace ellfem {

std::string_view to_string(MeshKind kind) {
  return kind == MeshKind::Bulk ? "bulk" : "surface";
}

MeshKind parse_mesh_kind(std::string_view text) {
  if (text == "bulk") return MeshKind::Bulk;
  if (text == "surface") return MeshKind::Surface;
  throw DomainError("unknown mesh kind '" + std::string(text) + "'");
}

bool operator==(const Mesh& a, const Mesh& b) {
  return a.kind == b.kind && a.dim == b.dim && a.order == b.order && a.ambient == b.ambient &&
         a.nodes.rows() == b.nodes.rows() && a.nodes.cols() == b.nodes.cols() &&
         a.elements.rows() == b.elements.rows() && a.elements.cols() == b.elements.cols() &&
         a.nodes == b.nodes && a.elements == b.elements && a.boundary == b.boundary;
}

bool is_supported_mesh_type(MeshKind kind, int dim, int order) {
  if (order < 1 || order > 2) return false;
  return kind == MeshKind::Surface ? (dim == 1 || dim == 2) : (dim == 2 || dim == 3);
}

Mesh make_mesh(MeshKind kind, int dim, int order, NodeArray nodes, ElementArray elements,
               std::vector<Index> boundary) {
  if (!is_supported_mesh_type(kind, dim, order))
    throw ValidationError("unsupported mesh type: " + std::string(to_string(kind)) + " dim " +
                          std::to_string(dim) + " order " + std::to_string(order));
  Mesh mesh;
  mesh.kind = kind;
  mesh.dim = dim;
  mesh.order = order;
  mesh.ambient = kind == MeshKind::Bulk ? dim : dim + 1;
  if (nodes.cols() != mesh.ambient)
    throw ValidationError("node table must have " + std::to_string(mesh.ambient) + " columns");
  if (elements.cols() != mesh.dofs_per_element())
    throw ValidationError("element table must have " + std::to_string(mesh.dofs_per_element()) +
                          " columns");
  if (nodes.rows() >= std::numeric_limits<Index>::max())
    throw ResourceError("too many nodes for 32-bit indices");
  if (elements.size() > 0 &&
      (elements.minCoeff() < 0 || elements.maxCoeff() >= static_cast<Index>(nodes.rows())))
    throw ValidationError("element connectivity references a missing node");
  for (Index b : boundary)
    if (b < 0 || b >= nodes.rows()) throw ValidationError("boundary index out of range");
  mesh.nodes = std::move(nodes);
  mesh.elements = std::move(elements);
  mesh.boundary = std::move(boundary);
  return mesh;
}

bool ValidationReport::ok() const {
  return std::none_of(violations.begin(), violations.end(), [](const Violation& v) {
    return v.severity == Violation::Severity::Error;
  });
}

std::vector<Violation> ValidationReport::with_code(std::string_view code) const {
  std::vector<Violation> out;
  for (const auto& v : violations)
    if (v.code == code) out.push_back(v);
  return out;
}

namespace {

struct FacetUse {
  Index element;
  int sign;
};

// Facets of the corner simplex with a traversal sign: directed edges for
// triangles, start (+1) / end (-1) vertices for segments.
std::map<std::vector<Index>, std::vector<FacetUse>> surface_facets(const Mesh& mesh) {
  std::map<std::vector<Index>, std::vector<FacetUse>> facets;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.dim == 1) {
      facets[{mesh.elements(e, 0)}].push_back({e, +1});
      facets[{mesh.elements(e, 1)}].push_back({e, -1});
    } else {
      for (int k = 0; k < 3; ++k) {
        const Index a = mesh.elements(e, k);
        const Index b = mesh.elements(e, (k + 1) % 3);
        facets[{std::min(a, b), std::max(a, b)}].push_back({e, a < b ? +1 : -1});
      }
    }
  }
  return facets;
}

void add(ValidationReport& report, Violation::Severity severity, std::string code,
         std::ptrdiff_t element, std::string message) {
  report.violations.push_back({severity, std::move(code), element, std::move(message)});
}

constexpr auto kError = Violation::Severity::Error;
constexpr auto kWarning = Violation::Severity::Warning;

void check_orientation(const Mesh& mesh, ValidationReport& report) {
  const auto facets = surface_facets(mesh);
  const Index ne = mesh.num_elements();
  std::vector<std::vector<std::pair<Index, bool>>> neighbours(ne);
  for (const auto& [key, uses] : facets) {
    if (uses.size() > 2) {
      std::ostringstream msg;
      msg << "facet shared by " << uses.size() << " elements";
      add(report, kError, "non-manifold", uses.front().element, msg.str());
      continue;
    }
    if (uses.size() == 2) {
      const bool flip = uses[0].sign == uses[1].sign;
      neighbours[uses[0].element].push_back({uses[1].element, flip});
      neighbours[uses[1].element].push_back({uses[0].element, flip});
    }
  }
  std::vector<int> state(ne, -1);
  for (Index seed = 0; seed < ne; ++seed) {
    if (state[seed] >= 0) continue;
    std::vector<Index> component;
    std::queue<Index> queue;
    state[seed] = 0;
    queue.push(seed);
    bool orientable = true;
    while (!queue.empty()) {
      const Index e = queue.front();
      queue.pop();
      component.push_back(e);
      for (const auto& [f, flip] : neighbours[e]) {
        const int want = state[e] ^ static_cast<int>(flip);
        if (state[f] < 0) {
          state[f] = want;
          queue.push(f);
        } else if (state[f] != want) {
          orientable = false;
        }
      }
    }
    if (!orientable) {
      add(report, kError, "non-orientable", seed, "connected component cannot be oriented");
      continue;
    }
    const auto flipped = std::count_if(component.begin(), component.end(),
                                       [&](Index e) { return state[e] == 1; });
    const int minority = 2 * flipped <= static_cast<std::ptrdiff_t>(component.size()) ? 1 : 0;
    for (Index e : component)
      if (state[e] == minority)
        add(report, kError, "orientation", e, "element orientation disagrees with its neighbours");
  }
}

void check_measure(const Mesh& mesh, ValidationReport& report) {
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const int n = pack.dofs;
  Eigen::MatrixXd x(n, mesh.ambient);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    for (int j = 0; j < n; ++j) x.row(j) = mesh.nodes.row(mesh.elements(e, j));
    double scale = 0.0;
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b) scale = std::max(scale, (x.row(a) - x.row(b)).norm());
    const double floor = 1e-14 * std::pow(scale, mesh.dim);
    for (int q = 0; q < pack.num_points(); ++q) {
      const Eigen::MatrixXd tangents = x.transpose() * pack.gradient_page(q).transpose();
      double measure = 0.0;
      if (mesh.kind == MeshKind::Bulk) {
        measure = tangents.determinant();
      } else if (mesh.dim == 1) {
        measure = tangents.col(0).norm();
      } else {
        measure = Eigen::Vector3d(tangents.col(0)).cross(Eigen::Vector3d(tangents.col(1))).norm();
      }
      if (!(measure > floor)) {
        add(report, kError, measure < 0.0 ? "orientation" : "measure", e,
            measure < 0.0 ? "negative Jacobian determinant (inverted element)"
                          : "non-positive element measure at a quadrature point");
        break;
      }
    }
  }
}

}  // namespace

ValidationReport validate(const Mesh& mesh) {
  ValidationReport report;
  if (!is_supported_mesh_type(mesh.kind, mesh.dim, mesh.order)) {
    add(report, kError, "element-type", -1, "unsupported mesh type");
    return report;
  }
  const int expected_ambient = mesh.kind == MeshKind::Bulk ? mesh.dim : mesh.dim + 1;
  if (mesh.ambient != expected_ambient || mesh.nodes.cols() != mesh.ambient) {
    add(report, kError, "ambient", -1, "node coordinates do not match the ambient dimension");
    return report;
  }
  if (mesh.num_elements() == 0) {
    add(report, kError, "empty", -1, "mesh has no elements");
    return report;
  }
  if (mesh.elements.cols() != mesh.dofs_per_element()) {
    add(report, kError, "columns", -1, "element rows have the wrong number of nodes");
    return report;
  }
  const Index nn = mesh.num_nodes();
  bool indices_ok = true;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    for (Eigen::Index j = 0; j < mesh.elements.cols(); ++j) {
      if (mesh.elements(e, j) < 0 || mesh.elements(e, j) >= nn) {
        add(report, kError, "index-range", e, "node index out of range");
        indices_ok = false;
        break;
      }
    }
  }
  if (!indices_ok) return report;

  std::vector<int> role(nn, 0);  // bit 0: corner, bit 1: edge node
  const int corners = mesh.dim + 1;
  for (Index e = 0; e < mesh.num_elements(); ++e)
    for (Eigen::Index j = 0; j < mesh.elements.cols(); ++j)
      role[mesh.elements(e, j)] |= j < corners ? 1 : 2;
  const auto unreferenced = std::count(role.begin(), role.end(), 0);
  if (unreferenced > 0) {
    const auto first = std::find(role.begin(), role.end(), 0) - role.begin();
    add(report, kError, "unreferenced-node", -1,
        std::to_string(unreferenced) + " node(s) not used by any element, first is " +
            std::to_string(first + 1));
  }
  if (std::count(role.begin(), role.end(), 3) > 0)
    add(report, kError, "node-ordering", -1, "a node is used both as corner and as edge node");

  std::map<std::vector<Index>, Index> seen;
  bool degenerate = false;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    std::vector<Index> key(mesh.elements.row(e).begin(), mesh.elements.row(e).end());
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end()) {
      add(report, kError, "repeated-node", e, "element lists the same node twice");
      degenerate = true;
      continue;
    }
    auto [it, inserted] = seen.emplace(std::move(key), e);
    if (!inserted)
      add(report, kWarning, "duplicate-element", e,
          "duplicates element " + std::to_string(it->second + 1));
  }

  for (Index b : mesh.boundary)
    if (b < 0 || b >= nn) add(report, kError, "boundary-range", -1, "boundary index out of range");
  if (mesh.kind == MeshKind::Surface && !mesh.boundary.empty())
    add(report, kWarning, "boundary-on-surface", -1, "boundary list ignored for surface meshes");

  if (mesh.kind == MeshKind::Surface) check_orientation(mesh, report);
  if (!degenerate) check_measure(mesh, report);
  return report;
}

bool is_closed_surface(const Mesh& mesh) {
  if (mesh.kind != MeshKind::Surface || mesh.num_elements() == 0) return false;
  const auto facets = surface_facets(mesh);
  return std::all_of(facets.begin(), facets.end(),
                     [](const auto& kv) { return kv.second.size() == 2; });
}

double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e)
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b)
        h = std::max(h, (mesh.nodes.row(mesh.elements(e, a)) - mesh.nodes.row(mesh.elements(e, b)))
                            .norm());
  return h;
}

Mesh corner_mesh(const Mesh& mesh) {
  if (mesh.order == 1) return mesh;
  // Corner nodes keep their relative order; for meshes from mesh_preprocess
  // this is the identity on the leading node block.
  ElementArray corners = mesh.elements.leftCols(mesh.dim + 1);
  std::vector<Index> renumber(mesh.num_nodes(), -1);
  for (Index v : corners.reshaped()) renumber[v] = 0;
  Index used = 0;
  for (auto& r : renumber)
    if (r == 0) r = used++;
  NodeArray nodes(used, mesh.ambient);
  for (Index v = 0; v < mesh.num_nodes(); ++v)
    if (renumber[v] >= 0) nodes.row(renumber[v]) = mesh.nodes.row(v);
  for (auto& v : corners.reshaped()) v = renumber[v];
  std::vector<Index> boundary;
  for (Index b : mesh.boundary)
    if (renumber[b] >= 0) boundary.push_back(renumber[b]);
  return make_mesh(mesh.kind, mesh.dim, 1, std::move(nodes), std::move(corners),
                   std::move(boundary));
}

Mesh jitter_nodes(const Mesh& mesh, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Mesh out = mesh;
  for (Eigen::Index i = 0; i < out.nodes.rows(); ++i)
    for (Eigen::Index k = 0; k < out.nodes.cols(); ++k) out.nodes(i, k) += dist(rng);
  return out;
}

Mesh transform_nodes(const Mesh& mesh, const Eigen::MatrixXd& rotation,
                     const Eigen::VectorXd& translation) {
  if (rotation.rows() != mesh.ambient || rotation.cols() != mesh.ambient ||
      translation.size() != mesh.ambient)
    throw DimensionMismatch("transform does not match the ambient dimension");
  Mesh out = mesh;
  out.nodes = (mesh.nodes * rotation.transpose()).rowwise() + translation.transpose();
  return out;
}

}  // namespace ellfem
