#include <gtest/gtest.h>

#include <sstream>

#include "corpus.hpp"
#include "ellfem/errors.hpp"
#include "ellfem/implicit_surface.hpp"
#include "ellfem/mesh.hpp"

using namespace ellfem;

namespace {

Mesh reference_triangle() {
  NodeArray x(3, 2);
  x << 0, 0, 1, 0, 0, 1;
  ElementArray e(1, 3);
  e << 0, 1, 2;
  return make_mesh(MeshKind::Bulk, 2, 1, x, e, {0, 1, 2});
}

Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return read_mesh(in);
}

}  // namespace

TEST(MeshIo, RoundTripIsExact) {
  for (const auto& [name, mesh] : fixtures::corpus()) {
    std::stringstream buf;
    write_mesh(mesh, buf);
    EXPECT_TRUE(read_mesh(buf) == mesh) << name;
  }
}

TEST(MeshIo, IndicesAreOneBasedOnDisk) {
  std::stringstream buf;
  write_mesh(reference_triangle(), buf);
  EXPECT_NE(buf.str().find("elements 1\n1 2 3\n"), std::string::npos);
}

TEST(MeshIo, CommentsAndBlankLines) {
  const Mesh m = parse(
      "# header comment\nellmesh 1\nkind bulk\n\ndim 2 order 1 ambient 2\nnodes 3\n0 0\n1 0 # x\n0 1\n"
      "elements 1\n1 2 3\n");
  EXPECT_EQ(m.num_elements(), 1);
  EXPECT_EQ(m.elements(0, 2), 2);
}

TEST(MeshIo, ParseErrorsCarryLineNumbers) {
  try {
    parse("ellmesh 1\nkind bulk\ndim 2 order 1 ambient 2\nnodes 3\n0 0\n1 zero\n0 1\nelements 1\n1 2 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 6u);
  }
  EXPECT_THROW(parse("ellmesh 2\n"), ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind volume\n"), ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind bulk\ndim 2 order 3 ambient 2\n"), ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind surface\ndim 2 order 1 ambient 2\n"), ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind bulk\ndim 2 order 1 ambient 2\nnodes 3\n0 0\n1 0\n0 1\n"
                     "elements 1\n1 2 4\n"),
               ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind bulk\ndim 2 order 1 ambient 2\nnodes 3\n0 0\n1 0\n0 1\n"
                     "elements 1\n1 2\n"),
               ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind bulk\ndim 2 order 1 ambient 2\nnodes 3\n0 0\n1 0\n0 1\n"
                     "elements 1\n1 2 3\nextra\n"),
               ParseError);
  EXPECT_THROW(parse("ellmesh 1\nkind bulk\ndim 2 order 1 ambient 2\nnodes 0\nelements 0\n"), ValidationError);
}

TEST(MeshIo, HalfDiskSampleFile) {
  const Mesh m = read_mesh(std::filesystem::path(ELLFEM_SOURCE_DIR) / "data" / "half_disk_p2.ellmesh");
  EXPECT_TRUE(m == half_disk_example());
}

TEST(MakeMesh, RejectsBadShapes) {
  NodeArray x(3, 2);
  x << 0, 0, 1, 0, 0, 1;
  ElementArray e(1, 3);
  e << 0, 1, 3;
  EXPECT_THROW(make_mesh(MeshKind::Bulk, 2, 1, x, e), ValidationError);
  ElementArray e4(1, 4);
  e4 << 0, 1, 2, 2;
  EXPECT_THROW(make_mesh(MeshKind::Bulk, 2, 1, x, e4), ValidationError);
  EXPECT_THROW(make_mesh(MeshKind::Bulk, 2, 3, x, e), ValidationError);
}

TEST(Validate, CleanCorpus) {
  for (const auto& [name, mesh] : fixtures::corpus()) {
    const ValidationReport r = validate(mesh);
    EXPECT_TRUE(r.ok()) << name << ": " << (r.empty() ? "" : r.violations[0].message);
  }
}

TEST(Validate, InvertedElement) {
  Mesh m = reference_triangle();
  std::swap(m.elements(0, 1), m.elements(0, 2));
  const ValidationReport r = validate(m);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.with_code("orientation").size(), 1u);
  EXPECT_EQ(r.with_code("orientation")[0].element, 0);
}

TEST(Validate, DegenerateElement) {
  Mesh m = reference_triangle();
  m.nodes.row(2) << 0.5, 0.0;
  EXPECT_EQ(validate(m).with_code("measure").size(), 1u);
}

TEST(Validate, DuplicatesAndUnreferenced) {
  Mesh m = reference_triangle();
  m.elements.conservativeResize(2, 3);
  m.elements.row(1) << 1, 2, 0;
  m.nodes.conservativeResize(4, 2);
  m.nodes.row(3) << 5, 5;
  const ValidationReport r = validate(m);
  EXPECT_EQ(r.with_code("duplicate-element").size(), 1u);
  EXPECT_EQ(r.with_code("unreferenced-node").size(), 1u);
  EXPECT_FALSE(r.ok());
}

TEST(Validate, RepeatedNodeAndRange) {
  Mesh m = reference_triangle();
  m.elements(0, 2) = 0;
  EXPECT_EQ(validate(m).with_code("repeated-node").size(), 1u);
  m.elements(0, 2) = 7;
  EXPECT_EQ(validate(m).with_code("index-range").size(), 1u);
}

TEST(Validate, InconsistentSurfaceOrientation) {
  Mesh m = generate_sphere(1, 1);
  std::swap(m.elements(5, 0), m.elements(5, 1));
  EXPECT_FALSE(validate(m).with_code("orientation").empty());
}

TEST(Validate, MixedNodeRoles) {
  Mesh m = half_disk_example();
  std::swap(m.elements(1, 0), m.elements(1, 3));
  EXPECT_FALSE(validate(m).with_code("node-ordering").empty());
}

TEST(Generators, SphereCounts) {
  for (int r = 0; r <= 3; ++r) {
    const Mesh p1 = generate_sphere(r, 1);
    const Mesh p2 = generate_sphere(r, 2);
    const int faces = 20 << (2 * r);
    EXPECT_EQ(p1.num_elements(), faces);
    EXPECT_EQ(p1.num_nodes(), faces / 2 + 2);
    EXPECT_EQ(p2.num_nodes(), faces / 2 + 2 + 3 * faces / 2);
    EXPECT_LT((p2.nodes.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_TRUE(is_closed_surface(p2));
  }
}

TEST(Generators, CircleAndDisk) {
  const Mesh c = generate_circle(8, 2);
  EXPECT_EQ(c.num_elements(), 8);
  EXPECT_EQ(c.num_nodes(), 16);
  EXPECT_TRUE(is_closed_surface(c));
  const Mesh d = generate_disk(0.2);
  EXPECT_FALSE(is_closed_surface(d));
  for (Index b : d.boundary) EXPECT_NEAR(d.nodes.row(b).norm(), 1.0, 1e-15);
  EXPECT_TRUE(validate(generate_ball(0.4)).ok());
}

TEST(Generators, JitterIsSeeded) {
  const Mesh s = generate_sphere(2, 1);
  EXPECT_TRUE(jitter_nodes(s, 0.01, 42) == jitter_nodes(s, 0.01, 42));
  EXPECT_FALSE(jitter_nodes(s, 0.01, 42) == jitter_nodes(s, 0.01, 43));
  EXPECT_LE((jitter_nodes(s, 0.01, 1).nodes - s.nodes).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Preprocess, AddsOneNodePerEdge) {
  const Mesh p1 = generate_sphere(2, 1);
  const PreprocessResult res = mesh_preprocess(p1);
  const Index edges = 3 * p1.num_elements() / 2;
  EXPECT_EQ(res.mesh.num_nodes(), p1.num_nodes() + edges);
  EXPECT_EQ(res.mesh.order, 2);
  EXPECT_EQ(res.plot_elements.rows(), 4 * p1.num_elements());
  // unlifted edge nodes sit at midpoints; input nodes keep their indices
  EXPECT_TRUE(res.mesh.nodes.topRows(p1.num_nodes()) == p1.nodes);
  for (Index e = 0; e < p1.num_elements(); ++e) {
    const auto row = res.mesh.elements.row(e);
    EXPECT_LT((res.mesh.nodes.row(row(3)) - 0.5 * (p1.nodes.row(row(0)) + p1.nodes.row(row(1)))).norm(), 1e-15);
  }
  EXPECT_THROW(mesh_preprocess(res.mesh), PreconditionError);
}

TEST(Preprocess, LiftSurfaceAndBulkBoundary) {
  const ImplicitSurface sphere = ImplicitSurface::sphere();
  const Mesh s = mesh_preprocess(generate_sphere(2, 1), 2, &sphere).mesh;
  EXPECT_LT((s.nodes.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_TRUE(validate(s).ok());

  const Mesh d1 = generate_disk(0.3);
  const Mesh d2 = mesh_preprocess(d1, 2, &sphere).mesh;
  EXPECT_EQ(d2.boundary.size(), 2 * d1.boundary.size());
  for (Index b : d2.boundary) EXPECT_NEAR(d2.nodes.row(b).norm(), 1.0, 1e-12);
  // interior edge nodes stay at midpoints, so they remain strictly inside
  int interior = 0;
  std::vector<bool> on_boundary(d2.num_nodes(), false);
  for (Index b : d2.boundary) on_boundary[b] = true;
  for (Index i = d1.num_nodes(); i < d2.num_nodes(); ++i)
    if (!on_boundary[i]) {
      ++interior;
      EXPECT_LT(d2.nodes.row(i).norm(), 1.0 - 1e-6);
    }
  EXPECT_GT(interior, 0);
}

TEST(Lift, SphereAndTorus) {
  NodeArray x(3, 3);
  x << 2, 0, 0, 0.1, 0.2, -0.3, 0.5, 0.5, 0.5;
  const LiftResult r = lift_nodes(x, ImplicitSurface::sphere());
  ASSERT_TRUE(r.ok());
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.points.row(i).norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.points.row(i).normalized().dot(x.row(i).normalized()), 1.0, 1e-12);
  }
  const ImplicitSurface torus = ImplicitSurface::torus(1.0, 0.3);
  NodeArray y(2, 3);
  y << 1.5, 0, 0.1, 0.2, 0.9, 0.2;
  const LiftResult t = lift_nodes(y, torus);
  ASSERT_TRUE(t.ok());
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(torus.distance(t.points.row(i).transpose()), 0.0, 1e-12);
}

TEST(Lift, ReportsFailures) {
  NodeArray x(1, 3);
  x << 0, 0, 0;
  LiftOptions opt;
  opt.max_iter = 3;
  const LiftResult r = lift_nodes(x, ImplicitSurface::sphere(), opt);
  EXPECT_FALSE(r.ok());
}

TEST(Mesh, CornerMeshAndSize) {
  const Mesh p2 = generate_sphere(1, 2);
  const Mesh p1 = corner_mesh(p2);
  EXPECT_TRUE(p1 == generate_sphere(1, 1));
  EXPECT_NEAR(mesh_size(generate_sphere(0, 1)), 1.0514622242382672, 1e-12);
}
