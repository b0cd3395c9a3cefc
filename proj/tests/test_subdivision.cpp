#include "smoothfem/geometry.hpp"
#include "smoothfem/subdivision.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace smoothfem;

namespace {

std::vector<Mesh> sample_meshes() {
  return {generate_regular_tri(3), distort_mesh(generate_regular_tri(4, TriPattern::union_jack), 0.35, 3),
          generate_regular_quad(3), distort_mesh(generate_regular_quad(4), 0.35, 4)};
}

}  // namespace

TEST(Subdivision, AllKindsPartitionTheDomain) {
  for (const Mesh& mesh : sample_meshes()) {
    std::vector<Subdivision> subs = {build_elementwise_subdivision(mesh), build_edge_subdivision(mesh),
                                     build_interior_subdivision(mesh), build_node_subdivision(mesh)};
    if (mesh.kind() == ElementKind::Q4) subs.push_back(build_quad_subtriangles(mesh));
    for (const auto& sub : subs) {
      EXPECT_NEAR(sub.total_area(), mesh.total_area(), 1e-13) << to_string(sub.kind);
      for (Index c = 0; c < sub.size(); ++c) {
        EXPECT_NEAR(sub.areas(c), geometry::signed_area(sub.cells[c]), 1e-15);
        EXPECT_GT(sub.areas(c), 0.0);
        if (sub.kind != SubdivisionKind::node_based) EXPECT_TRUE(geometry::is_convex_ccw(sub.cells[c]));
      }
    }
    EXPECT_EQ(build_edge_subdivision(mesh).size(), static_cast<Index>(mesh.edges().size()));
    EXPECT_EQ(build_interior_subdivision(mesh).size(), mesh.n_elements() * mesh.corners_per_element());
    EXPECT_EQ(build_node_subdivision(mesh).size(), mesh.n_vertices());
  }
}

TEST(Subdivision, TriangleCellAreasAreThirds) {
  const Mesh mesh = distort_mesh(generate_regular_tri(5, TriPattern::backslash), 0.3, 11);
  const Subdivision edges = build_edge_subdivision(mesh);
  for (Index c = 0; c < edges.size(); ++c) {
    const auto& p = edges.parents[c];
    double expected = mesh.element_area(p.element) / 3;
    if (p.other_element >= 0) expected += mesh.element_area(p.other_element) / 3;
    EXPECT_NEAR(edges.areas(c), expected, 1e-15);
  }
  const Subdivision interior = build_interior_subdivision(mesh);
  for (Index c = 0; c < interior.size(); ++c)
    EXPECT_NEAR(interior.areas(c), mesh.element_area(interior.parents[c].element) / 3, 1e-15);

  const Subdivision nodes = build_node_subdivision(mesh);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (Index e = 0; e < mesh.n_elements(); ++e)
    for (int k = 0; k < 3; ++k) expected(mesh.node(e, k)) += mesh.element_area(e) / 3;
  EXPECT_LT((nodes.areas - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Subdivision, ReferencePoints) {
  Eigen::Matrix2Xd tri(2, 3), quad(2, 4);
  tri << 0, 3, 0,
         0, 0, 3;
  quad << 0, 4, 3, 0,
          0, 0, 2, 2;
  EXPECT_TRUE(element_reference_point(tri).isApprox(Vec2(1, 1)));
  EXPECT_TRUE(element_reference_point(quad).isApprox(Vec2(1.75, 1)));
}

TEST(Overlaps, TriangleProofValues) {
  // Inside element T: each edge cell covers |T|/3 of T, and each interior cell
  // meets the two edge cells at its corner in |T|/6 each.
  const Mesh mesh = distort_mesh(generate_regular_tri(4), 0.3, 2);
  const Subdivision elements = build_elementwise_subdivision(mesh);
  const Subdivision edges = build_edge_subdivision(mesh);
  const Subdivision interior = build_interior_subdivision(mesh);
  const OverlapTable edge_elem = compute_overlaps(edges, elements);
  const OverlapTable int_edge = compute_overlaps(interior, edges);

  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const double area = mesh.element_area(e);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(edge_elem.entry(mesh.element_edge(e, k), e), area / 3, 1e-15);
  }
  for (Index c = 0; c < interior.size(); ++c) {
    const Index e = interior.parents[c].element;
    const int k = interior.parents[c].local;
    const double area = mesh.element_area(e);
    EXPECT_NEAR(int_edge.entry(c, mesh.element_edge(e, k)), area / 6, 1e-15);
    EXPECT_NEAR(int_edge.entry(c, mesh.element_edge(e, (k + 2) % 3)), area / 6, 1e-15);
    double row = 0;
    for (RowSparseMatrix::InnerIterator it(int_edge.areas, c); it; ++it) row += it.value();
    EXPECT_NEAR(row, area / 3, 1e-15);
  }
}

TEST(Overlaps, MarginalsMatchAreas) {
  for (const Mesh& mesh : sample_meshes()) {
    const Subdivision fine = *test_support::common_refinement(mesh);
    const Subdivision edges = build_edge_subdivision(mesh);
    const OverlapTable table = compute_overlaps(fine, edges);
    const Eigen::VectorXd rows = table.areas * Eigen::VectorXd::Ones(table.cols());
    const Eigen::VectorXd cols = table.areas.transpose() * Eigen::VectorXd::Ones(table.rows());
    EXPECT_LT((rows - fine.areas).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((cols - edges.areas).cwiseAbs().maxCoeff(), 1e-14);
    // each refinement piece lies in exactly one edge cell
    for (Index i = 0; i < table.rows(); ++i) EXPECT_EQ(table.areas.row(i).nonZeros(), 1);
  }
}

TEST(Overlaps, RegularQuadInteriorCellsAreTheFinerElements) {
  for (int n : {1, 2, 4}) {
    const Subdivision interior = build_interior_subdivision(generate_regular_quad(n));
    const Subdivision finer = build_elementwise_subdivision(generate_regular_quad(2 * n));
    const OverlapTable table = compute_overlaps(interior, finer);
    ASSERT_EQ(table.rows(), table.cols());
    for (Index i = 0; i < table.rows(); ++i) {
      ASSERT_EQ(table.areas.row(i).nonZeros(), 1);
      RowSparseMatrix::InnerIterator it(table.areas, i);
      EXPECT_NEAR(it.value(), interior.areas(i), 1e-15);
      EXPECT_NEAR(it.value(), finer.areas(it.col()), 1e-15);
    }
  }
}

TEST(Overlaps, RejectsMismatchedDomains) {
  const Subdivision a = build_elementwise_subdivision(generate_regular_quad(2));
  const Subdivision b = build_elementwise_subdivision(generate_regular_quad(2, Rect{0, 0, 2, 1}));
  EXPECT_THROW(compute_overlaps(a, b), Error);
}
