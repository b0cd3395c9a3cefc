#include "smoothfem/elements.hpp"

#include "smoothfem/quadrature.hpp"

#include <cmath>

namespace smoothfem::elements {

namespace {

struct NaturalBasis {
  Eigen::RowVectorXd values;
  Eigen::Matrix2Xd grads;
};

NaturalBasis natural_basis(Index n_nodes, const Vec2& rs) {
  if (n_nodes == 4) {
    const auto b = q4_shape(rs.x(), rs.y());
    return {b.values, b.grads};
  }
  if (n_nodes == 9) {
    const auto b = q9_shape(rs.x(), rs.y());
    return {b.values, b.grads};
  }
  throw GeometryError("isoparametric map needs 4 or 9 nodes, got " + std::to_string(n_nodes));
}

}  // namespace

ElementStrainMap t3_strain_map(const Eigen::Matrix<double, 2, 3>& xy) {
  ElementStrainMap map;
  map.B.emplace_back(t3_strain_matrix(xy));
  map.areas = Eigen::VectorXd::Constant(1, geometry::signed_area(xy));
  return map;
}

std::array<Eigen::Matrix<double, 2, 3>, 4> q4_subtriangles(const Eigen::Matrix<double, 2, 4>& xy) {
  const Vec2 center = xy.rowwise().mean();
  std::array<Eigen::Matrix<double, 2, 3>, 4> tris;
  for (int k = 0; k < 4; ++k) {
    tris[k].col(0) = xy.col(k);
    tris[k].col(1) = xy.col((k + 1) % 4);
    tris[k].col(2) = center;
  }
  return tris;
}

ElementStrainMap q4pl_strain_map(const Eigen::Matrix<double, 2, 4>& xy) {
  if (!geometry::is_convex_ccw(xy)) throw GeometryError("piecewise-linear Q4 requires a convex quadrilateral");
  ElementStrainMap map;
  map.areas.resize(4);
  const auto tris = q4_subtriangles(xy);
  for (int k = 0; k < 4; ++k) {
    const Eigen::Matrix<double, 3, 6> bt = t3_strain_matrix(tris[k]);
    StrainMatrix<double> B = StrainMatrix<double>::Zero(3, 8);
    const int a = k, b = (k + 1) % 4;
    B.middleCols<2>(2 * a) += bt.middleCols<2>(0);
    B.middleCols<2>(2 * b) += bt.middleCols<2>(2);
    // center displacement = average of the four corners
    for (int c = 0; c < 4; ++c) B.middleCols<2>(2 * c) += 0.25 * bt.middleCols<2>(4);
    map.B.push_back(std::move(B));
    map.areas(k) = geometry::signed_area(tris[k]);
  }
  return map;
}

ElementStrainMap q4bl_gauss_map(const Eigen::Matrix<double, 2, 4>& xy) {
  const QuadratureRule rule = quadrature(QuadratureKind::quad2x2);
  ElementStrainMap map;
  map.areas.resize(rule.size());
  for (Index q = 0; q < rule.size(); ++q) {
    auto iso = q4bl_strain_matrix(xy, rule.points(0, q), rule.points(1, q));
    map.B.push_back(std::move(iso.B));
    map.areas(q) = rule.weights(q) * iso.det_j;
  }
  return map;
}

Vec2 forward_map(const Eigen::Matrix2Xd& xy, const Vec2& natural) {
  const NaturalBasis b = natural_basis(xy.cols(), natural);
  return xy * b.values.transpose();
}

InverseMapResult inverse_map(const Eigen::Matrix2Xd& xy, const Vec2& p, double tol, int max_iterations) {
  const double size = (xy.rowwise().maxCoeff() - xy.rowwise().minCoeff()).norm();
  InverseMapResult result;
  Vec2 rs = Vec2::Zero();
  NaturalBasis b = natural_basis(xy.cols(), rs);
  Vec2 residual = p - xy * b.values.transpose();
  for (int it = 1; it <= max_iterations; ++it) {
    result.iterations = it;
    if (residual.norm() <= tol * size) {
      result.natural = rs;
      result.converged = true;
      return result;
    }
    const Eigen::Matrix2d dx_dxi = xy * b.grads.transpose();
    const double det = dx_dxi.determinant();
    if (!(std::abs(det) > 0.0)) break;
    const Vec2 step = dx_dxi.inverse() * residual;
    // Halve the step until the residual decreases.
    double damping = 1.0;
    for (int halvings = 0; halvings < 30; ++halvings, damping *= 0.5) {
      const Vec2 trial = rs + damping * step;
      const NaturalBasis bt = natural_basis(xy.cols(), trial);
      const Vec2 trial_residual = p - xy * bt.values.transpose();
      if (trial_residual.norm() < residual.norm() || halvings == 29) {
        rs = trial;
        b = bt;
        residual = trial_residual;
        break;
      }
    }
  }
  result.natural = rs;
  result.converged = residual.norm() <= tol * size;
  return result;
}

}  // namespace smoothfem::elements

namespace smoothfem::elements {

ElementStrainMap q4cs_strain_map(const Eigen::Matrix<double, 2, 4>& xy) {
  // Quadrant k in natural coordinates: corner, mid of edge k, center, mid of edge k-1.
  static constexpr double corner_r[4] = {-1, 1, 1, -1};
  static constexpr double corner_s[4] = {-1, -1, 1, 1};
  const QuadratureRule line = gauss_legendre(2);
  ElementStrainMap map;
  map.areas.resize(4);
  for (int k = 0; k < 4; ++k) {
    const int next = (k + 1) % 4, prev = (k + 3) % 4;
    Eigen::Matrix<double, 2, 4> nat;
    nat.col(0) << corner_r[k], corner_s[k];
    nat.col(1) << 0.5 * (corner_r[k] + corner_r[next]), 0.5 * (corner_s[k] + corner_s[next]);
    nat.col(2) << 0.0, 0.0;
    nat.col(3) << 0.5 * (corner_r[k] + corner_r[prev]), 0.5 * (corner_s[k] + corner_s[prev]);
    Eigen::Matrix<double, 2, 4> phys;
    for (int c = 0; c < 4; ++c) phys.col(c) = forward_map(xy, nat.col(c));
    const double area = geometry::signed_area(phys);
    if (!(area > 0.0)) throw GeometryError("degenerate smoothing cell");

    // ∫_cell ∂N/∂x dΩ = ∮ N n_x ds, each side straight in both coordinates.
    Eigen::Matrix<double, 2, 4> grad_integral = Eigen::Matrix<double, 2, 4>::Zero();
    for (int side = 0; side < 4; ++side) {
      const Vec2 a = nat.col(side), b = nat.col((side + 1) % 4);
      const Vec2 d = phys.col((side + 1) % 4) - phys.col(side);
      const Vec2 n_ds(d.y(), -d.x());  // outward normal times side length
      for (Index q = 0; q < line.size(); ++q) {
        const double t = 0.5 * (line.points(0, q) + 1.0);
        const Vec2 rs = a + t * (b - a);
        const auto N = q4_shape(rs.x(), rs.y()).values;
        grad_integral += 0.5 * line.weights(q) * n_ds * N;
      }
    }
    map.B.push_back(strain_from_gradients(grad_integral / area));
    map.areas(k) = area;
  }
  return map;
}

}  // namespace smoothfem::elements
