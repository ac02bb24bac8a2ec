#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <unordered_map>

#include <Eigen/Dense>

#include "ellfem/mesh.hpp"

namespace ellfem {

namespace {

// Sub-simplices of the quadratic element in local node numbering.
std::vector<std::vector<int>> plot_pattern(int dim) {
  switch (dim) {
    case 1: return {{0, 2}, {2, 1}};
    case 2: return {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
    default:
      // corner tets, then the inner octahedron split along the (4, 9) diagonal
      return {{0, 4, 6, 7}, {4, 1, 5, 8}, {6, 5, 2, 9}, {7, 8, 9, 3},
              {4, 9, 5, 6}, {4, 9, 6, 7}, {4, 9, 7, 8}, {4, 9, 8, 5}};
  }
}

double signed_measure(const NodeArray& nodes, const std::vector<Index>& simplex) {
  const int d = static_cast<int>(simplex.size()) - 1;
  Eigen::MatrixXd t(nodes.cols(), d);
  for (int k = 0; k < d; ++k) t.col(k) = (nodes.row(simplex[k + 1]) - nodes.row(simplex[0])).transpose();
  return t.rows() == t.cols() ? t.determinant() : 1.0;
}

}  // namespace

PreprocessResult mesh_preprocess(const Mesh& mesh, int order, const ImplicitSurface* lift,
                                 const LiftOptions& options) {
  if (mesh.order != 1) throw PreconditionError("mesh_preprocess expects a P1 mesh");
  if (order == 1) return {mesh, mesh.elements};
  if (order != 2) throw UnsupportedElement(mesh.dim, order);

  const auto edges = edge_table(mesh.dim);
  const Index ne = mesh.num_elements();
  const int corners = mesh.dim + 1;
  const int nref = dof_count(mesh.dim, 2);

  ElementArray elements(ne, nref);
  elements.leftCols(corners) = mesh.elements;
  std::unordered_map<std::uint64_t, Index> edge_node;
  edge_node.reserve(static_cast<std::size_t>(ne) * edges.size());
  std::vector<std::array<Index, 2>> new_edges;
  Index next = mesh.num_nodes();
  for (Index e = 0; e < ne; ++e) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Index a = mesh.elements(e, edges[k][0]);
      const Index b = mesh.elements(e, edges[k][1]);
      const auto [lo, hi] = std::minmax(a, b);
      const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
      auto [it, inserted] = edge_node.try_emplace(key, next);
      if (inserted) {
        new_edges.push_back({lo, hi});
        ++next;
      }
      elements(e, corners + static_cast<int>(k)) = it->second;
    }
  }

  NodeArray nodes(next, mesh.ambient);
  nodes.topRows(mesh.num_nodes()) = mesh.nodes;
  for (std::size_t k = 0; k < new_edges.size(); ++k)
    nodes.row(mesh.num_nodes() + static_cast<Index>(k)) =
        0.5 * (mesh.nodes.row(new_edges[k][0]) + mesh.nodes.row(new_edges[k][1]));

  std::vector<Index> boundary = mesh.boundary;
  if (mesh.kind == MeshKind::Bulk && !mesh.boundary.empty()) {
    // an edge is on the boundary when both ends are boundary nodes and it
    // belongs to the boundary facets; for 2D that is "used by one element"
    std::set<Index> on_boundary(mesh.boundary.begin(), mesh.boundary.end());
    std::map<std::vector<Index>, int> facet_count;
    for (Index e = 0; e < ne; ++e)
      for (int skip = 0; skip < corners; ++skip) {
        std::vector<Index> f;
        for (int c = 0; c < corners; ++c)
          if (c != skip) f.push_back(mesh.elements(e, c));
        std::sort(f.begin(), f.end());
        ++facet_count[f];
      }
    std::set<std::pair<Index, Index>> boundary_edges;
    for (const auto& [f, count] : facet_count) {
      if (count != 1) continue;
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j) boundary_edges.insert({f[i], f[j]});
    }
    for (std::size_t k = 0; k < new_edges.size(); ++k)
      if (boundary_edges.count({new_edges[k][0], new_edges[k][1]}) &&
          on_boundary.count(new_edges[k][0]) && on_boundary.count(new_edges[k][1]))
        boundary.push_back(mesh.num_nodes() + static_cast<Index>(k));
  }

  if (lift != nullptr) {
    std::vector<Index> targets;
    if (mesh.kind == MeshKind::Surface) {
      for (Index v = mesh.num_nodes(); v < next; ++v) targets.push_back(v);
    } else {
      for (Index v : boundary)
        if (v >= mesh.num_nodes()) targets.push_back(v);
    }
    NodeArray pts(static_cast<Eigen::Index>(targets.size()), mesh.ambient);
    for (std::size_t i = 0; i < targets.size(); ++i) pts.row(i) = nodes.row(targets[i]);
    LiftResult lifted = lift_nodes(pts, *lift, options);
    if (!lifted.ok())
      throw Error("lift failed for " + std::to_string(lifted.failures.size()) +
                  " node(s), worst residual " +
                  std::to_string(std::max_element(lifted.failures.begin(), lifted.failures.end(),
                                                  [](const auto& a, const auto& b) {
                                                    return a.residual < b.residual;
                                                  })->residual));
    for (std::size_t i = 0; i < targets.size(); ++i) nodes.row(targets[i]) = lifted.points.row(i);
  }

  const auto pattern = plot_pattern(mesh.dim);
  ElementArray plot(ne * static_cast<Index>(pattern.size()), corners);
  for (Index e = 0; e < ne; ++e) {
    const double parent = mesh.kind == MeshKind::Bulk
                              ? signed_measure(nodes, {elements.row(e).begin(),
                                                       elements.row(e).begin() + corners})
                              : 1.0;
    for (std::size_t s = 0; s < pattern.size(); ++s) {
      std::vector<Index> simplex;
      for (int local : pattern[s]) simplex.push_back(elements(e, local));
      if (mesh.kind == MeshKind::Bulk && signed_measure(nodes, simplex) * parent < 0)
        std::swap(simplex[1], simplex[2]);
      for (int c = 0; c < corners; ++c) plot(e * static_cast<Index>(pattern.size()) + static_cast<Index>(s), c) = simplex[c];
    }
  }

  PreprocessResult result{make_mesh(mesh.kind, mesh.dim, 2, std::move(nodes), std::move(elements),
                                    std::move(boundary)),
                          std::move(plot)};
  return result;
}

}  // namespace ellfem
