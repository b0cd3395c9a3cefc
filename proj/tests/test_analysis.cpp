#include "smoothfem/analysis.hpp"
#include "smoothfem/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace smoothfem;

namespace {

const ReferenceSolution& block_reference() {
  static const auto ref = solve_reference(block_problem(), 16);
  return *ref;
}

}  // namespace

TEST(Slope, ExactPowerLaws) {
  const std::vector<double> h = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e1, e2;
  for (double x : h) {
    e1.push_back(3 * x);
    e2.push_back(0.1 * x * x);
  }
  EXPECT_NEAR(convergence_slope(h, e1), 1.0, 1e-12);
  EXPECT_NEAR(convergence_slope(h, e2), 2.0, 1e-12);
  // a column of target data: 9.545e-4 ... 1.313e-4
  EXPECT_NEAR(convergence_slope(h, {9.545e-4, 5.080e-4, 2.601e-4, 1.313e-4}), 0.956, 0.01);
  EXPECT_THROW(convergence_slope({0.5, 0.25}, {1.0, 0.5}), Error);
  EXPECT_THROW(convergence_slope(h, {1.0, 0.5, 0.0, 0.1}), Error);
}

TEST(EnergyNorm, ClosedFormsAndDenseSum) {
  const Mat3 D = dmatrix(1e3, 0.2).D;
  EXPECT_EQ(energy_norm(Eigen::Matrix3Xd::Zero(3, 4), Eigen::VectorXd::Ones(4), D), 0.0);
  const Vec3 eps(1e-3, -2e-3, 5e-4);
  const Eigen::VectorXd quarter = Eigen::VectorXd::Constant(4, 0.25);
  EXPECT_NEAR(energy_norm(eps.replicate(1, 4), quarter, D), std::sqrt(eps.dot(D * eps)), 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Matrix3Xd values(3, 50);
  Eigen::VectorXd areas(50);
  double sum = 0;
  for (Index c = 0; c < 50; ++c) {
    values.col(c) = Vec3(u(rng), u(rng), u(rng));
    areas(c) = u(rng);
    sum += areas(c) * values.col(c).dot(D * values.col(c));
  }
  EXPECT_NEAR(energy_norm(values, areas, D), std::sqrt(sum), 1e-12);
}

TEST(Quadrature, PolygonRuleIsExactForQuartics) {
  Eigen::Matrix2Xd poly(2, 5);
  poly << 0, 2, 2.5, 1, -0.5,
          0, 0, 1.5, 2.5, 1;
  auto f = [](const Vec2& p) { return std::pow(p.x(), 4) - 2 * p.x() * p.y() * p.y() * p.y() + p.y() * p.y(); };
  double coarse = 0, fine = 0;
  for (int refine : {0, 2}) {
    Eigen::Matrix2Xd pts;
    Eigen::VectorXd w;
    Index count = 0;
    append_polygon_quadrature(poly, refine, pts, w, count);
    double s = 0;
    for (Index q = 0; q < count; ++q) s += w(q) * f(pts.col(q));
    EXPECT_NEAR(w.head(count).sum(), geometry::signed_area(poly), 1e-14);
    (refine == 0 ? coarse : fine) = s;
  }
  EXPECT_NEAR(coarse, fine, 1e-12 * std::abs(fine));
}

TEST(Reference, ReproducesLinearFieldsExactly) {
  const Problem patch = default_patch_problem();
  const ReferenceSolution ref(patch, 4);
  EXPECT_LT(ref.relative_residual(), 1e-10);
  for (const Vec2 p : {Vec2(0.1, 0.2), Vec2(0.77, 0.51), Vec2(1.0, 1.0)}) {
    EXPECT_LT((ref.strain_at(p) - *patch.exact_strain).norm(), 1e-12);
    EXPECT_LT((ref.displacement_at(p) - patch.exact_displacement(p)).norm(), 1e-14);
  }
}

TEST(Reference, SelfConvergence) {
  const ReferenceSolution coarse(block_problem(), 8);
  const ReferenceSolution& fine = block_reference();
  EXPECT_LT(fine.relative_residual(), 1e-10);
  EXPECT_LT(std::abs(coarse.energy_norm() - fine.energy_norm()) / fine.energy_norm(), 0.01);
}

TEST(EnergyError, PatchProblemIsReproducedByEveryMethod) {
  const Problem patch = default_patch_problem();
  const ReferenceSolution ref(patch, 4);
  const Mesh tri = distort_mesh(generate_regular_tri(3), 0.3, 4);
  const Mesh quad = generate_regular_quad(3);
  for (Method m : {Method::fem_t3, Method::nsfem, Method::esfem, Method::sse}) {
    const Solution sol = solve_problem(tri, patch, m);
    EXPECT_LE(energy_error(tri, m, sol.u, ref).relative, 1e-9) << to_string(m);
  }
  for (Method m : {Method::fem_plq4, Method::fem_blq4, Method::csfem, Method::esfem, Method::sse}) {
    const Solution sol = solve_problem(quad, patch, m);
    EXPECT_LE(energy_error(quad, m, sol.u, ref).relative, 1e-9) << to_string(m);
  }
}

TEST(EnergyError, ReferenceAgainstItselfIsZero) {
  const ReferenceSolution& ref = block_reference();
  const EnergyError err = energy_error(ref.mesh(), Method::fem_q9, ref.displacement(), ref);
  EXPECT_LT(err.relative, 1e-12);
  EXPECT_NEAR(err.reference, ref.energy_norm(), 1e-12 * ref.energy_norm());
}

TEST(EnergyError, DecreasesUnderRefinementAndBoundsProjection) {
  const ReferenceSolution& ref = block_reference();
  const Problem block = block_problem();
  double previous = 1e300;
  for (int n : {2, 4}) {
    const Mesh mesh = generate_regular_tri(n);
    const Solution sol = solve_problem(mesh, block, Method::fem_t3);
    const EnergyError err = energy_error(mesh, Method::fem_t3, sol.u, ref);
    EXPECT_LT(err.relative, previous);
    previous = err.relative;
    // Galerkin solution vs best piecewise constant on the elements
    EXPECT_GE(err.absolute, projection_error(ref, ProjectionSpace::W_h, mesh) * (1 - 1e-9));
  }
}

TEST(ProjectionError, ConstantStrainIsExact) {
  const ReferenceSolution ref(default_patch_problem(), 4);
  for (const Mesh& mesh : {distort_mesh(generate_regular_tri(3), 0.3, 1), generate_regular_quad(2)})
    for (ProjectionSpace s : {ProjectionSpace::W_h, ProjectionSpace::W_1h, ProjectionSpace::W_2h})
      EXPECT_LT(projection_error(ref, s, mesh), 1e-12 * ref.energy_norm());
}

TEST(ProjectionError, NestedQuadSpaces) {
  const ReferenceSolution& ref = block_reference();
  for (int n : {1, 2, 4}) {
    const double w2 = projection_error(ref, ProjectionSpace::W_2h, generate_regular_quad(n));
    const double wh = projection_error(ref, ProjectionSpace::W_h, generate_regular_quad(n));
    const double finer = projection_error(ref, ProjectionSpace::W_h, generate_regular_quad(2 * n));
    EXPECT_LE(w2, wh);
    EXPECT_NEAR(w2, finer, 1e-12 * finer);
  }
}

TEST(Probe, VertexValuesAndLinearFields) {
  const Mesh mesh = distort_mesh(generate_regular_quad(3), 0.3, 2);
  Eigen::VectorXd u(mesh.n_dofs());
  for (Index i = 0; i < u.size(); ++i) u(i) = std::sin(double(i));
  for (Method m : {Method::fem_plq4, Method::fem_blq4, Method::sse}) {
    for (Index v : {Index(0), Index(5), Index(15)})
      EXPECT_LT((probe_displacement(mesh, m, u, mesh.vertex(v)) - u.segment<2>(2 * v)).norm(), 1e-12);
  }
  const Problem patch = default_patch_problem();
  const Mesh tri = distort_mesh(generate_regular_tri(3), 0.3, 2);
  const Solution sol = solve_problem(tri, patch, Method::sse);
  const Vec2 p(0.41, 0.63);
  EXPECT_LT((probe_displacement(tri, Method::sse, sol.u, p) - patch.exact_displacement(p)).norm(), 1e-12);
  EXPECT_THROW(probe_displacement(tri, Method::sse, sol.u, Vec2(2, 2)), MeshError);
}

TEST(Probe, BlockDisplacementConvergesMonotonically) {
  const ReferenceSolution& ref = block_reference();
  const Problem block = block_problem();
  const double target = ref.displacement_at(block.probe).x();
  double previous = 1e300;
  for (int n : {2, 4, 8}) {
    const Mesh mesh = generate_regular_tri(n);
    const Solution sol = solve_problem(mesh, block, Method::sse);
    const double err = std::abs(probe_displacement(mesh, Method::sse, sol.u, block.probe).x() - target);
    EXPECT_LT(err, previous);
    previous = err;
  }
}
