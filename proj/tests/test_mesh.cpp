#include "smoothfem/geometry.hpp"
#include "smoothfem/mesh.hpp"
#include "smoothfem/mesh_io.hpp"
#include "smoothfem/subdivision.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace smoothfem;

namespace {

Index count_dirichlet_edges(const Mesh& mesh) {
  Index n = 0;
  for (const auto& b : mesh.boundary_edges()) n += b.tag == BoundaryTag::Dirichlet ? 1 : 0;
  return n;
}

}  // namespace

TEST(Mesh, RegularTriangleCounts) {
  for (TriPattern pattern : {TriPattern::slash, TriPattern::backslash, TriPattern::union_jack})
    for (int n : {1, 2, 5}) {
      const Mesh mesh = generate_regular_tri(n, pattern);
      EXPECT_EQ(mesh.n_vertices(), (n + 1) * (n + 1));
      EXPECT_EQ(mesh.n_elements(), 2 * n * n);
      EXPECT_EQ(static_cast<Index>(mesh.edges().size()), 3 * n * n + 2 * n);
      // Euler characteristic of a disk
      EXPECT_EQ(mesh.n_vertices() - static_cast<Index>(mesh.edges().size()) + mesh.n_elements(), 1);
      EXPECT_EQ(static_cast<Index>(mesh.boundary_edges().size()), 4 * n);
      EXPECT_EQ(count_dirichlet_edges(mesh), n);
      EXPECT_NEAR(mesh.total_area(), 1.0, 1e-14);
    }
}

TEST(Mesh, RegularQuadCounts) {
  const Rect domain{-1, 0, 2, 0.5};
  const Mesh mesh = generate_regular_quad(4, domain);
  EXPECT_EQ(mesh.n_vertices(), 25);
  EXPECT_EQ(mesh.n_elements(), 16);
  EXPECT_EQ(mesh.edges().size(), 40u);
  EXPECT_NEAR(mesh.total_area(), domain.area(), 1e-14);
  EXPECT_NEAR(mesh.max_diameter(), std::hypot(0.75, 0.125), 1e-14);
  // far sides are pinned exactly
  EXPECT_EQ(mesh.vertices().row(0).maxCoeff(), 2.0);
  EXPECT_EQ(mesh.vertices().row(1).maxCoeff(), 0.5);

  const auto dirichlet = mesh.dirichlet_vertices();
  for (Index v = 0; v < mesh.n_vertices(); ++v) EXPECT_EQ(dirichlet[v], mesh.vertex(v).y() == 0.0);
}

TEST(Mesh, Q9Layout) {
  const Mesh mesh = generate_regular_q9(2);
  EXPECT_EQ(mesh.n_vertices(), 25);
  EXPECT_EQ(mesh.n_elements(), 4);
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto xy = mesh.element_coords(e);
    for (int k = 0; k < 4; ++k)
      EXPECT_TRUE(xy.col(4 + k).isApprox(0.5 * (xy.col(k) + xy.col((k + 1) % 4))));
    EXPECT_TRUE(xy.col(8).isApprox(xy.leftCols(4).rowwise().mean()));
  }
}

TEST(Mesh, EdgeAdjacency) {
  const Mesh mesh = generate_regular_tri(3, TriPattern::union_jack);
  for (Index e = 0; e < mesh.n_elements(); ++e)
    for (int k = 0; k < 3; ++k) {
      const Edge& edge = mesh.edges()[mesh.element_edge(e, k)];
      const Index nb = mesh.neighbor(e, k);
      if (nb < 0) {
        EXPECT_TRUE(edge.on_boundary());
        continue;
      }
      // the neighbor sees the same edge, traversed the other way
      bool found = false;
      for (int j = 0; j < 3; ++j)
        if (mesh.element_edge(nb, j) == mesh.element_edge(e, k)) {
          found = true;
          EXPECT_EQ(mesh.node(nb, j), mesh.node(e, (k + 1) % 3));
          EXPECT_EQ(mesh.node(nb, (j + 1) % 3), mesh.node(e, k));
        }
      EXPECT_TRUE(found);
    }
}

TEST(Mesh, ConstructorRejectsInvalidInput) {
  Points v(2, 4);
  v << 0, 1, 1, 0,
       0, 0, 1, 1;
  Mesh::Connectivity ok(3, 2), clockwise(3, 2);
  ok << 0, 0, 1, 2, 2, 3;
  clockwise << 0, 0, 2, 2, 1, 3;
  const std::vector<BoundaryEdge> boundary = {{0, 1, BoundaryTag::Dirichlet},
                                              {1, 2, BoundaryTag::Neumann},
                                              {2, 3, BoundaryTag::Neumann},
                                              {3, 0, BoundaryTag::Neumann}};
  EXPECT_NO_THROW(Mesh(ElementKind::T3, v, ok, boundary));
  EXPECT_THROW(Mesh(ElementKind::T3, v, clockwise, boundary), MeshError);

  auto missing = boundary;
  missing.pop_back();
  EXPECT_THROW(Mesh(ElementKind::T3, v, ok, missing), MeshError);

  // nonconvex quadrilateral
  Points dart(2, 4);
  dart << 0, 1, 0.2, 0,
          0, 0, 0.2, 1;
  Mesh::Connectivity quad(4, 1);
  quad << 0, 1, 2, 3;
  EXPECT_THROW(Mesh(ElementKind::Q4, dart, quad, boundary), MeshError);

  EXPECT_THROW(generate_regular_quad(0), MeshError);
}

TEST(Mesh, DistortionIsDeterministicAndValid) {
  for (ElementKind kind : {ElementKind::T3, ElementKind::Q4}) {
    const Mesh base = kind == ElementKind::T3 ? generate_regular_tri(8) : generate_regular_quad(8);
    const Mesh a = distort_mesh(base, 0.4, 42);
    const Mesh b = distort_mesh(base, 0.4, 42);
    const Mesh c = distort_mesh(base, 0.4, 43);
    EXPECT_EQ(a.vertices(), b.vertices());
    EXPECT_NE(a.vertices(), c.vertices());
    EXPECT_NEAR(a.total_area(), 1.0, 1e-13);

    const auto boundary = base.boundary_vertices();
    for (Index v = 0; v < base.n_vertices(); ++v)
      if (boundary[v]) EXPECT_EQ(a.vertex(v), base.vertex(v));
    for (Index e = 0; e < a.n_elements(); ++e)
      EXPECT_TRUE(geometry::is_convex_ccw(a.element_corners(e)));
    // auxiliary cells stay convex
    for (const auto& cell : build_edge_subdivision(a).cells) EXPECT_TRUE(geometry::is_convex_ccw(cell));
    for (const auto& cell : build_interior_subdivision(a).cells) EXPECT_TRUE(geometry::is_convex_ccw(cell));
  }
  EXPECT_EQ(distort_mesh(generate_regular_quad(3), 0.0, 1).vertices(), generate_regular_quad(3).vertices());
  EXPECT_THROW(distort_mesh(generate_regular_quad(3), 0.5, 1), MeshError);
  EXPECT_THROW(distort_mesh(generate_regular_q9(2), 0.1, 1), MeshError);
}

TEST(Mesh, RotateLocalNumberingKeepsGeometry) {
  const Mesh q9 = generate_regular_q9(2);
  const Mesh rotated = rotate_local_numbering(q9, 1);
  for (Index e = 0; e < q9.n_elements(); ++e) {
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(rotated.node(e, k), q9.node(e, (k + 1) % 4));
      EXPECT_EQ(rotated.node(e, 4 + k), q9.node(e, 4 + (k + 1) % 4));
    }
    EXPECT_EQ(rotated.node(e, 8), q9.node(e, 8));
  }
}

TEST(MeshIO, RoundTripIsExact) {
  for (const Mesh& mesh : {distort_mesh(generate_regular_tri(4, TriPattern::union_jack), 0.3, 5),
                           distort_mesh(generate_regular_quad(3), 0.3, 6), generate_regular_q9(2)}) {
    std::stringstream buffer;
    write_mesh(buffer, mesh);
    const Mesh back = read_mesh(buffer);
    EXPECT_EQ(back.kind(), mesh.kind());
    EXPECT_EQ(back.vertices(), mesh.vertices());
    EXPECT_EQ(back.connectivity(), mesh.connectivity());
    ASSERT_EQ(back.boundary_edges().size(), mesh.boundary_edges().size());
    for (std::size_t i = 0; i < back.boundary_edges().size(); ++i)
      EXPECT_EQ(back.boundary_edges()[i].tag, mesh.boundary_edges()[i].tag);
  }
}

TEST(MeshIO, ErrorsCarryLineNumbers) {
  const std::string text =
      "# two triangles\n"
      "mesh T3 4 2 4\n"
      "v 0 0 0\n"
      "v 1 1 zero\n";
  std::istringstream in(text);
  try {
    read_mesh(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  std::istringstream empty("");
  EXPECT_THROW(read_mesh(empty), ParseError);
}

TEST(PointLocation, MatchesGridArithmetic) {
  const int n = 7;
  const Mesh mesh = generate_regular_quad(n);
  const PointLocator locator(mesh);
  for (double x : {0.01, 0.33, 0.5, 0.99})
    for (double y : {0.02, 0.61, 0.97}) {
      const auto loc = locator.locate(Vec2(x, y));
      const int i = static_cast<int>(x * n), j = static_cast<int>(y * n);
      EXPECT_EQ(loc.element, static_cast<Index>(j) * n + i);
      EXPECT_NEAR(loc.natural.x(), 2 * (x * n - i) - 1, 1e-12);
      EXPECT_NEAR(loc.natural.y(), 2 * (y * n - j) - 1, 1e-12);
    }
  EXPECT_THROW(locator.locate(Vec2(1.5, 0.5)), MeshError);
}

TEST(PointLocation, TrianglesContainThePoint) {
  const Mesh mesh = distort_mesh(generate_regular_tri(6, TriPattern::union_jack), 0.3, 9);
  for (double x : {0.0, 0.123, 0.5, 0.876, 1.0})
    for (double y : {0.0, 0.31, 0.77, 1.0}) {
      const Vec2 p(x, y);
      const auto loc = locate_point(mesh, p);
      const auto xy = mesh.element_corners(loc.element);
      const Vec2 back = xy.col(0) + loc.natural.x() * (xy.col(1) - xy.col(0)) +
                        loc.natural.y() * (xy.col(2) - xy.col(0));
      EXPECT_LT((back - p).norm(), 1e-12);
      EXPECT_GE(loc.natural.minCoeff(), -1e-10);
      EXPECT_LE(loc.natural.sum(), 1 + 1e-10);
    }
}
