#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ellfem/implicit_surface.hpp"
#include "ellfem/reference.hpp"
#include "ellfem/types.hpp"

namespace ellfem {

enum class MeshKind { Bulk, Surface };

std::string_view to_string(MeshKind kind);
MeshKind parse_mesh_kind(std::string_view text);

/// Simplicial isoparametric mesh.
///
/// Rows of `elements` list corner nodes first (anti-clockwise / positively
/// oriented), then edge nodes in edge_table(dim) order. Indices are 0-based;
/// the ellmesh file format stores them 1-based.
struct Mesh {
  MeshKind kind = MeshKind::Surface;
  int dim = 2;
  int order = 1;
  /// Ambient dimension: dim for bulk meshes, dim + 1 for surfaces.
  int ambient = 3;
  NodeArray nodes;
  ElementArray elements;
  /// Boundary node indices (bulk meshes only).
  std::vector<Index> boundary;

  Index num_nodes() const { return static_cast<Index>(nodes.rows()); }
  Index num_elements() const { return static_cast<Index>(elements.rows()); }
  int dofs_per_element() const { return dof_count(dim, order); }
  bool is_surface() const { return kind == MeshKind::Surface; }

  friend bool operator==(const Mesh& a, const Mesh& b);
};

/// Builds a mesh and checks the shape invariants (column counts, index range,
/// supported element type). Throws ValidationError.
Mesh make_mesh(MeshKind kind, int dim, int order, NodeArray nodes, ElementArray elements,
               std::vector<Index> boundary = {});

/// Element types with an assembly kernel: surfaces of dimension 1 and 2, bulk
/// domains of dimension 2 and 3, each with order 1 and 2.
bool is_supported_mesh_type(MeshKind kind, int dim, int order);

// ---------------------------------------------------------------------------
// ellmesh text format

Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// validation

struct Violation {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  /// Short machine-readable tag, e.g. "orientation", "duplicate-element".
  std::string code;
  /// Offending element, or -1 when the violation is not element-specific.
  std::ptrdiff_t element = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  /// True when no violation of severity Error is present.
  bool ok() const;
  std::vector<Violation> with_code(std::string_view code) const;
};

/// Checks every mesh invariant; never throws on invalid data.
ValidationReport validate(const Mesh& mesh);

/// True when every facet (edge for triangles, vertex for segments) of a surface
/// mesh is shared by exactly two elements.
bool is_closed_surface(const Mesh& mesh);

/// Maximum Euclidean distance between two corners of one element.
double mesh_size(const Mesh& mesh);

/// Drops the edge nodes of a P2 mesh, returning its P1 corner mesh.
Mesh corner_mesh(const Mesh& mesh);

// ---------------------------------------------------------------------------
// generators

/// Icosahedron refined `refinements` times, nodes projected onto the unit sphere.
Mesh generate_sphere(int refinements, int order);
/// Unit circle split into `segments` equal arcs.
Mesh generate_circle(int segments, int order);
/// Unit disk, P1, concentric rings of spacing about h; boundary nodes on |x| = 1.
Mesh generate_disk(double h);
/// Unit ball, P1, Kuhn-split cube grid mapped radially; boundary nodes on |x| = 1.
Mesh generate_ball(double h);
/// The two-element quadratic half-disk mesh used as the data-structure example.
Mesh half_disk_example();

/// Moves every node by a uniform random offset of at most `amplitude` per
/// coordinate. Deterministic for a given seed.
Mesh jitter_nodes(const Mesh& mesh, double amplitude, std::uint64_t seed);

/// Applies x -> R x + t to every node.
Mesh transform_nodes(const Mesh& mesh, const Eigen::MatrixXd& rotation,
                     const Eigen::VectorXd& translation);

// ---------------------------------------------------------------------------
// P1 -> P2

struct PreprocessResult {
  /// Quadratic mesh: input nodes first, then one node per unique edge.
  Mesh mesh;
  /// Simplicial P1 refinement of every quadratic element, for plotting.
  ElementArray plot_elements;
};

/// Inserts one node per unique edge at its midpoint. When `lift` is given the
/// new nodes are projected onto it: all of them for surface meshes, only those
/// on boundary edges for bulk meshes. Throws PreconditionError for non-P1 input.
PreprocessResult mesh_preprocess(const Mesh& mesh, int order = 2,
                                 const ImplicitSurface* lift = nullptr,
                                 const LiftOptions& options = {});

}  // namespace ellfem
