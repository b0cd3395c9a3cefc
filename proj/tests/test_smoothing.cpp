#include "smoothfem/material.hpp"
#include "smoothfem/smoothing.hpp"

#include "test_support.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace smoothfem;

namespace {

SubdivisionPtr share(Subdivision sub) { return std::make_shared<const Subdivision>(std::move(sub)); }

struct Spaces {
  SubdivisionPtr fine;
  std::vector<SubdivisionPtr> coarse;
};

Spaces spaces_of(const Mesh& mesh) {
  Spaces s;
  s.fine = test_support::common_refinement(mesh);
  s.coarse = {share(build_elementwise_subdivision(mesh)), share(build_edge_subdivision(mesh)),
              share(build_interior_subdivision(mesh))};
  if (mesh.kind() == ElementKind::Q4) s.coarse.push_back(share(build_quad_subtriangles(mesh)));
  return s;
}

// Projection onto piecewise constants on `coarse`, seen as an operator on
// fields over `fine`: average, then copy back.
struct FineProjection {
  SmoothingOperator down;
  SmoothingOperator up;
  StrainField operator()(const StrainField& f) const { return apply_projection(up, apply_projection(down, f)); }
};

std::vector<Mesh> sample_meshes() {
  return {generate_regular_tri(3, TriPattern::union_jack), distort_mesh(generate_regular_tri(4), 0.35, 21),
          generate_regular_quad(3), distort_mesh(generate_regular_quad(3), 0.35, 22)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Projection, OperatorLaws) {
  std::mt19937_64 rng(7);
  for (const Mesh& mesh : sample_meshes()) {
    const Spaces s = spaces_of(mesh);
    for (const auto& coarse : s.coarse) {
      const FineProjection P{build_projection(s.fine, coarse), build_projection(coarse, s.fine)};
      for (int trial = 0; trial < 20; ++trial) {
        const StrainField f(s.fine, test_support::random_field(s.fine->size(), rng));
        const StrainField g(s.fine, test_support::random_field(s.fine->size(), rng));
        const StrainField pf = P(f);
        EXPECT_LT((P(pf).values - pf.values).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT(rel(l2_inner(pf, g), l2_inner(f, P(g))), 1e-13);

        const Eigen::Matrix3d A = Eigen::Matrix3d::Random();
        EXPECT_LT((P(transform(A, f)).values - transform(A, pf).values).cwiseAbs().maxCoeff(), 1e-13);
        // non-expansive
        EXPECT_LE(l2_inner(pf, pf), l2_inner(f, f) * (1 + 1e-14));
      }
      const Vec3 c(0.3, -1.2, 2.5);
      const StrainField constant(s.fine, c.replicate(1, s.fine->size()));
      EXPECT_LT((P(constant).values.colwise() - c).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Projection, MatchesDenseLeastSquares) {
  std::mt19937_64 rng(3);
  const Mesh mesh = distort_mesh(generate_regular_quad(3), 0.3, 8);
  const Spaces s = spaces_of(mesh);
  for (const auto& coarse : s.coarse) {
    const OverlapTable table = compute_overlaps(*s.fine, *coarse);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(s.fine->size(), coarse->size());
    for (Index i = 0; i < table.rows(); ++i)
      for (RowSparseMatrix::InnerIterator it(table.areas, i); it; ++it) E(i, it.col()) = 1.0;
    const Eigen::VectorXd sqrt_area = s.fine->areas.cwiseSqrt();
    const Eigen::MatrixXd A = sqrt_area.asDiagonal() * E;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);

    const StrainField f(s.fine, test_support::random_field(s.fine->size(), rng));
    const StrainField pf = apply_projection(build_projection(s.fine, coarse), f);
    for (int c = 0; c < 3; ++c) {
      const Eigen::VectorXd b = sqrt_area.cwiseProduct(f.values.row(c).transpose());
      const Eigen::VectorXd x = qr.solve(b);
      EXPECT_LT((x - pf.values.row(c).transpose()).cwiseAbs().maxCoeff(), 1e-10) << to_string(coarse->kind);
    }
  }
}

TEST(Projection, ComposeMatchesSequentialApplication) {
  std::mt19937_64 rng(4);
  const Mesh mesh = distort_mesh(generate_regular_tri(4), 0.3, 1);
  auto elements = share(build_elementwise_subdivision(mesh));
  auto edges = share(build_edge_subdivision(mesh));
  auto interior = share(build_interior_subdivision(mesh));
  const SmoothingOperator p1 = build_projection(elements, edges);
  const SmoothingOperator p2 = build_projection(edges, interior);
  const SmoothingOperator p21 = compose(p2, p1);
  const StrainField f(elements, test_support::random_field(elements->size(), rng));
  EXPECT_LT((apply_projection(p21, f).values - apply_projection(p2, apply_projection(p1, f)).values)
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
  EXPECT_THROW(compose(p1, p1), GeometryError);
}

TEST(Projection, NodeProjectionAverages) {
  std::mt19937_64 rng(5);
  const Mesh mesh = distort_mesh(generate_regular_tri(4), 0.3, 2);
  auto elements = share(build_elementwise_subdivision(mesh));
  auto nodes = share(build_node_subdivision(mesh));
  const SmoothingOperator P = build_node_projection(mesh, elements, nodes);
  const StrainField f(elements, test_support::random_field(elements->size(), rng));
  // node cells are not convex in general; compare with the incident-area rule
  const StrainField pf = apply_projection(P, f);
  for (Index c = 0; c < nodes->size(); ++c) {
    Vec3 sum = Vec3::Zero();
    double area = 0;
    for (Index e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 3; ++k)
        if (mesh.node(e, k) == nodes->parents[c].vertex) {
          sum += mesh.element_area(e) / 3 * f.values.col(e);
          area += mesh.element_area(e) / 3;
        }
    EXPECT_LT((pf.values.col(c) - sum / area).norm(), 1e-13);
  }
}

TEST(Sse, TwoTriangleHandOracle) {
  // slash N=1: element 0 = (a, b, c), element 1 = (a, c, d); edge 2 of
  // element 0 is the shared diagonal.
  const Mesh mesh = generate_regular_tri(1);
  Eigen::Matrix3Xd field(3, 2);
  field << 1, 5,
           2, -2,
           0, 4;
  const auto smoothed = sse_smooth(mesh, field, mesh.element_areas());
  const Vec3 e0 = field.col(0), e1 = field.col(1);
  const Vec3 mixed = (3 * e0 + e1) / 4;
  EXPECT_LT((smoothed[0].gauss.col(0) - mixed).norm(), 1e-14);
  EXPECT_LT((smoothed[0].gauss.col(1) - e0).norm(), 1e-14);
  EXPECT_LT((smoothed[0].gauss.col(2) - mixed).norm(), 1e-14);
}

TEST(Sse, SquareQuadGaussValues) {
  // One square element: every edge is on the boundary, so the intermediate
  // strains are the subtriangle strains and Gauss point k averages
  // subtriangles k-1 and k with equal weights.
  const Mesh mesh = generate_regular_quad(1, Rect{0, 0, 2, 2});
  std::mt19937_64 rng(1);
  const Eigen::Matrix3Xd field = test_support::random_field(4, rng);
  const Subdivision sub = build_quad_subtriangles(mesh);
  const auto smoothed = sse_smooth(mesh, field, sub.areas);
  const Eigen::Matrix2Xd gauss = sse_gauss_points(ElementKind::Q4);
  for (int k = 0; k < 4; ++k) {
    const Vec3 expected = 0.5 * (field.col((k + 3) % 4) + field.col(k));
    EXPECT_LT((smoothed[0].gauss.col(k) - expected).norm(), 1e-14);
    EXPECT_LT((smoothed[0].evaluate(gauss.col(k)) - expected).norm(), 1e-14);
  }
}

TEST(Sse, InterpolationIsKroneckerAtGaussPoints) {
  for (ElementKind kind : {ElementKind::T3, ElementKind::Q4}) {
    const Eigen::Matrix2Xd gauss = sse_gauss_points(kind);
    for (Index k = 0; k < gauss.cols(); ++k) {
      const Eigen::VectorXd w = sse_interpolation_weights(kind, gauss.col(k));
      for (Index j = 0; j < w.size(); ++j) EXPECT_NEAR(w(j), j == k ? 1.0 : 0.0, 1e-14);
    }
    EXPECT_NEAR(sse_interpolation_weights(kind, Vec2(0.1, 0.2)).sum(), 1.0, 1e-14);
  }
}

TEST(Sse, ConstantsAndLinearity) {
  std::mt19937_64 rng(2);
  for (const Mesh& mesh : sample_meshes()) {
    const Eigen::VectorXd areas = mesh.kind() == ElementKind::T3 ? mesh.element_areas()
                                                                 : build_quad_subtriangles(mesh).areas;
    const Vec3 c(1.5, -0.5, 0.25);
    for (const auto& f : sse_smooth(mesh, c.replicate(1, areas.size()), areas))
      EXPECT_LT((f.gauss.colwise() - c).cwiseAbs().maxCoeff(), 1e-14);

    const Eigen::Matrix3Xd a = test_support::random_field(areas.size(), rng);
    const Eigen::Matrix3Xd b = test_support::random_field(areas.size(), rng);
    const auto sa = sse_smooth(mesh, a, areas), sb = sse_smooth(mesh, b, areas);
    const auto sab = sse_smooth(mesh, 2.0 * a - 3.0 * b, areas);
    for (std::size_t e = 0; e < sa.size(); ++e)
      EXPECT_LT((sab[e].coeffs - (2.0 * sa[e].coeffs - 3.0 * sb[e].coeffs)).cwiseAbs().maxCoeff(), 1e-13);

    // the matrix form agrees with the element-by-element pipeline
    const RowSparseMatrix S = sse_operator(mesh, areas);
    const Eigen::MatrixXd gauss = (S * a.transpose()).transpose();
    const Index ng = mesh.corners_per_element();
    for (Index e = 0; e < mesh.n_elements(); ++e)
      EXPECT_LT((gauss.middleCols(e * ng, ng) - sa[e].gauss).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Sse, GaussValuesEqualTwiceProjectedStrain) {
  std::mt19937_64 rng(6);
  for (const Mesh& mesh : sample_meshes()) {
    auto source = share(mesh.kind() == ElementKind::T3 ? build_elementwise_subdivision(mesh)
                                                       : build_quad_subtriangles(mesh));
    auto edges = share(build_edge_subdivision(mesh));
    auto interior = share(build_interior_subdivision(mesh));
    const SmoothingOperator p21 = compose(build_projection(edges, interior), build_projection(source, edges));
    const StrainField f(source, test_support::random_field(source->size(), rng));
    const StrainField twice = apply_projection(p21, f);
    const auto smoothed = sse_smooth(mesh, f.values, source->areas);
    for (Index c = 0; c < interior->size(); ++c) {
      const auto& p = interior->parents[c];
      EXPECT_LT((twice.values.col(c) - smoothed[p.element].gauss.col(p.local)).norm(), 1e-13);
    }
  }
}

TEST(Sse, DualFieldsAreConsistent) {
  const Mesh mesh = distort_mesh(generate_regular_tri(3), 0.3, 3);
  Eigen::VectorXd u(mesh.n_dofs());
  for (Index i = 0; i < u.size(); ++i) u(i) = std::sin(0.37 * double(i));
  const Mat3 D = dmatrix(1e3, 0.2).D;
  const DualFields f = sse_dual_fields(mesh, D, u);
  EXPECT_LT((f.stress2.values - D * f.strain2.values).cwiseAbs().maxCoeff(), 1e-10);
  // <σ1, ε1> on the edge cells equals <σ2, ε2> on the interior cells: P1
  // and P2 are adjoint to their reverse maps.
  EXPECT_LT(rel(l2_inner(f.stress1, f.strain1), l2_inner(f.stress2, f.strain2)), 1e-12);
}
