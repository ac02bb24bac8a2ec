#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "ellfem/mesh.hpp"

namespace ellfem {

namespace {

NodeArray to_node_array(const std::vector<Eigen::Vector3d>& pts, int cols) {
  NodeArray nodes(static_cast<Eigen::Index>(pts.size()), cols);
  for (std::size_t i = 0; i < pts.size(); ++i) nodes.row(i) = pts[i].head(cols).transpose();
  return nodes;
}

ElementArray to_element_array(const std::vector<std::array<Index, 4>>& rows, int cols) {
  ElementArray elements(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t e = 0; e < rows.size(); ++e)
    for (int j = 0; j < cols; ++j) elements(e, j) = rows[e][j];
  return elements;
}

Mesh elevate(Mesh p1, int order, const ImplicitSurface& surface) {
  if (order == 1) return p1;
  if (order != 2) throw UnsupportedElement(p1.dim, order);
  return mesh_preprocess(p1, 2, &surface).mesh;
}

}  // namespace

Mesh generate_sphere(int refinements, int order) {
  if (refinements < 0) throw DomainError("refinements must be non-negative");
  if (order != 1 && order != 2) throw UnsupportedElement(2, order);

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> pts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
      {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : pts) p.normalize();
  std::vector<std::array<Index, 4>> tris = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  // outward orientation: (x2 - x1) x (x3 - x1) points away from the origin
  for (auto& t : tris) {
    const Eigen::Vector3d n = (pts[t[1]] - pts[t[0]]).cross(pts[t[2]] - pts[t[0]]);
    if (n.dot(pts[t[0]] + pts[t[1]] + pts[t[2]]) < 0) std::swap(t[1], t[2]);
  }

  for (int level = 0; level < refinements; ++level) {
    std::map<std::pair<Index, Index>, Index> midpoint;
    auto mid = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, 0);
      if (inserted) {
        it->second = static_cast<Index>(pts.size());
        pts.push_back((pts[a] + pts[b]).normalized());
      }
      return it->second;
    };
    std::vector<std::array<Index, 4>> refined;
    refined.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const Index ab = mid(t[0], t[1]);
      const Index bc = mid(t[1], t[2]);
      const Index ca = mid(t[2], t[0]);
      refined.push_back({t[0], ab, ca, 0});
      refined.push_back({ab, t[1], bc, 0});
      refined.push_back({ca, bc, t[2], 0});
      refined.push_back({ab, bc, ca, 0});
    }
    tris = std::move(refined);
  }
  Mesh p1 = make_mesh(MeshKind::Surface, 2, 1, to_node_array(pts, 3), to_element_array(tris, 3));
  return elevate(std::move(p1), order, ImplicitSurface::sphere());
}

Mesh generate_circle(int segments, int order) {
  if (segments < 3) throw DomainError("a circle needs at least 3 segments");
  if (order != 1 && order != 2) throw UnsupportedElement(1, order);
  NodeArray nodes(segments, 2);
  ElementArray elements(segments, 2);
  for (int k = 0; k < segments; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / segments;
    nodes(k, 0) = std::cos(theta);
    nodes(k, 1) = std::sin(theta);
    elements(k, 0) = k;
    elements(k, 1) = (k + 1) % segments;
  }
  Mesh p1 = make_mesh(MeshKind::Surface, 1, 1, std::move(nodes), std::move(elements));
  return elevate(std::move(p1), order, ImplicitSurface::sphere());
}

namespace {

// Rough memory guard for the generators: refuse meshes beyond ~2^26 elements.
void check_budget(double elements) {
  if (elements > 6.7e7) throw ResourceError("requested mesh is too fine for the memory budget");
}

}  // namespace

Mesh generate_disk(double h) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  const double rings_d = std::ceil(1.0 / h);
  check_budget(6.0 * rings_d * rings_d);
  const int rings = std::max(1, static_cast<int>(rings_d));

  std::vector<Eigen::Vector3d> pts = {Eigen::Vector3d::Zero()};
  std::vector<Index> ring_start = {0};
  for (int k = 1; k <= rings; ++k) {
    ring_start.push_back(static_cast<Index>(pts.size()));
    const int count = 6 * k;
    const double radius = static_cast<double>(k) / rings;
    for (int i = 0; i < count; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / count;
      pts.emplace_back(radius * std::cos(theta), radius * std::sin(theta), 0.0);
    }
  }
  // exact unit radius on the boundary ring
  for (std::size_t i = ring_start[rings]; i < pts.size(); ++i) pts[i].head<2>().normalize();

  std::vector<std::array<Index, 4>> tris;
  auto push = [&](Index a, Index b, Index c) {
    const Eigen::Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (n.z() < 0) std::swap(b, c);
    tris.push_back({a, b, c, 0});
  };
  for (int k = 1; k <= rings; ++k) {
    const int n_in = k == 1 ? 1 : 6 * (k - 1);
    const int n_out = 6 * k;
    const Index in0 = ring_start[k - 1];
    const Index out0 = ring_start[k];
    if (k == 1) {
      for (int j = 0; j < n_out; ++j) push(in0, out0 + j, out0 + (j + 1) % n_out);
      continue;
    }
    int i = 0;
    int j = 0;
    while (i < n_in || j < n_out) {
      const double next_in = static_cast<double>(i + 1) / n_in;
      const double next_out = static_cast<double>(j + 1) / n_out;
      if (j < n_out && (i == n_in || next_out <= next_in)) {
        push(in0 + i % n_in, out0 + j, out0 + (j + 1) % n_out);
        ++j;
      } else {
        push(in0 + i % n_in, out0 + j % n_out, in0 + (i + 1) % n_in);
        ++i;
      }
    }
  }
  std::vector<Index> boundary;
  for (Index i = ring_start[rings]; i < static_cast<Index>(pts.size()); ++i) boundary.push_back(i);
  return make_mesh(MeshKind::Bulk, 2, 1, to_node_array(pts, 2), to_element_array(tris, 3),
                   std::move(boundary));
}

Mesh generate_ball(double h) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  const double half_d = std::ceil(1.0 / h);
  check_budget(6.0 * std::pow(2.0 * half_d, 3));
  const int n = 2 * std::max(1, static_cast<int>(half_d));

  auto id = [n](int i, int j, int k) { return static_cast<Index>((k * (n + 1) + j) * (n + 1) + i); };
  std::vector<Eigen::Vector3d> pts;
  std::vector<Index> boundary;
  pts.reserve(static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1));
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        Eigen::Vector3d x(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n);
        const double inf = x.cwiseAbs().maxCoeff();
        const bool on_boundary = i == 0 || j == 0 || k == 0 || i == n || j == n || k == n;
        if (inf > 0.0) x *= inf / x.norm();
        if (on_boundary) {
          x.normalize();
          boundary.push_back(static_cast<Index>(pts.size()));
        }
        pts.push_back(x);
      }

  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<Index, 4>> tets;
  tets.reserve(static_cast<std::size_t>(6) * n * n * n);
  // Kuhn split mirrored at the mid planes; cell diagonals start at the vertex
  // nearest the centre.
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          const std::array<int, 3> cell{i, j, k};
          std::array<int, 3> base{}, step{};
          for (int a = 0; a < 3; ++a) {
            const bool upper = 2 * cell[a] >= n;
            base[a] = cell[a] + (upper ? 1 : 0);
            step[a] = upper ? -1 : 1;
          }
          std::array<int, 3> at = base;
          std::array<Index, 4> tet{};
          tet[0] = id(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            at[p[s]] += step[p[s]];
            tet[s + 1] = id(at[0], at[1], at[2]);
          }
          const double vol = (pts[tet[1]] - pts[tet[0]])
                                 .cross(pts[tet[2]] - pts[tet[0]])
                                 .dot(pts[tet[3]] - pts[tet[0]]);
          if (vol < 0) std::swap(tet[1], tet[2]);
          tets.push_back(tet);
        }
  return make_mesh(MeshKind::Bulk, 3, 1, to_node_array(pts, 3), to_element_array(tets, 4),
                   std::move(boundary));
}

Mesh half_disk_example() {
  const double s = std::sqrt(2.0) / 2.0;
  NodeArray nodes(9, 2);
  nodes << -1, 0, 0, 0, 0, 1, -0.5, 0, 0, 0.5, -s, s, 1, 0, 0.5, 0, s, s;
  ElementArray elements(2, 6);
  elements << 1, 2, 3, 4, 5, 6, 2, 7, 3, 8, 9, 5;
  elements.array() -= 1;
  return make_mesh(MeshKind::Bulk, 2, 2, std::move(nodes), std::move(elements),
                   {0, 1, 2, 3, 5, 6, 7, 8});
}

}  // namespace ellfem
