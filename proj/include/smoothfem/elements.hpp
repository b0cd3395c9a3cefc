#pragma once

// Shape functions and strain-displacement operators.
//
// Nodal displacement vectors are interleaved: (u1x, u1y, u2x, u2y, ...).
// Coordinates are passed as 2 x n_nodes matrices, one column per node, nodes
// counterclockwise. Q9 nodes: 4 corners, 4 midsides (edge k runs from corner k
// to corner k+1), center.

#include "smoothfem/core.hpp"
#include "smoothfem/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace smoothfem::elements {

template <class Scalar>
using StrainMatrix = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

// Voigt strain operator from physical shape-function gradients (2 x n).
template <class Derived>
StrainMatrix<typename Derived::Scalar> strain_from_gradients(const Eigen::MatrixBase<Derived>& grad) {
  using Scalar = typename Derived::Scalar;
  const Index n = grad.cols();
  StrainMatrix<Scalar> B = StrainMatrix<Scalar>::Zero(3, 2 * n);
  for (Index a = 0; a < n; ++a) {
    B(0, 2 * a) = grad(0, a);
    B(1, 2 * a + 1) = grad(1, a);
    B(2, 2 * a) = grad(1, a);
    B(2, 2 * a + 1) = grad(0, a);
  }
  return B;
}

// Constant-strain triangle, 3 x 6.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 6> t3_strain_matrix(const Eigen::MatrixBase<Derived>& xy) {
  using Scalar = typename Derived::Scalar;
  const Vec2T<Scalar> p0 = xy.col(0), p1 = xy.col(1), p2 = xy.col(2);
  const Scalar twice_area = geometry::orient<Scalar>(p0, p1, p2);
  if (!(twice_area > 0)) throw GeometryError("degenerate or clockwise triangle");
  Eigen::Matrix<Scalar, 2, 3> grad;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    grad(0, i) = (xy(1, j) - xy(1, k)) / twice_area;
    grad(1, i) = (xy(0, k) - xy(0, j)) / twice_area;
  }
  return strain_from_gradients(grad);
}

// Bilinear quadrilateral basis on [-1,1]^2.
template <class Scalar>
struct Q4Basis {
  Eigen::Matrix<Scalar, 1, 4> values;
  Eigen::Matrix<Scalar, 2, 4> grads;  // d/dr, d/ds
};

template <class Scalar>
Q4Basis<Scalar> q4_shape(Scalar r, Scalar s) {
  static constexpr int rn[4] = {-1, 1, 1, -1};
  static constexpr int sn[4] = {-1, -1, 1, 1};
  Q4Basis<Scalar> b;
  for (int a = 0; a < 4; ++a) {
    const Scalar fr = (1 + rn[a] * r), fs = (1 + sn[a] * s);
    b.values(a) = fr * fs / 4;
    b.grads(0, a) = rn[a] * fs / 4;
    b.grads(1, a) = sn[a] * fr / 4;
  }
  return b;
}

// Biquadratic Lagrange basis on [-1,1]^2.
template <class Scalar>
struct Q9Basis {
  Eigen::Matrix<Scalar, 1, 9> values;
  Eigen::Matrix<Scalar, 2, 9> grads;
};

inline constexpr std::array<int, 9> q9_node_r = {-1, 1, 1, -1, 0, 1, 0, -1, 0};
inline constexpr std::array<int, 9> q9_node_s = {-1, -1, 1, 1, -1, 0, 1, 0, 0};

template <class Scalar>
Q9Basis<Scalar> q9_shape(Scalar r, Scalar s) {
  auto lagrange = [](int node, Scalar t) -> std::pair<Scalar, Scalar> {
    switch (node) {
      case -1: return {t * (t - 1) / 2, t - Scalar(0.5)};
      case 0: return {1 - t * t, -2 * t};
      default: return {t * (t + 1) / 2, t + Scalar(0.5)};
    }
  };
  Q9Basis<Scalar> b;
  for (int a = 0; a < 9; ++a) {
    const auto [lr, dlr] = lagrange(q9_node_r[a], r);
    const auto [ls, dls] = lagrange(q9_node_s[a], s);
    b.values(a) = lr * ls;
    b.grads(0, a) = dlr * ls;
    b.grads(1, a) = lr * dls;
  }
  return b;
}

// Isoparametric strain operator and Jacobian determinant at a natural point.
template <class Scalar>
struct IsoStrain {
  StrainMatrix<Scalar> B;
  Scalar det_j;
};

template <class CoordDerived, class GradDerived>
IsoStrain<typename CoordDerived::Scalar> isoparametric_strain(const Eigen::MatrixBase<CoordDerived>& xy,
                                                              const Eigen::MatrixBase<GradDerived>& nat_grads) {
  using Scalar = typename CoordDerived::Scalar;
  // dx_i/dxi_j
  const Eigen::Matrix<Scalar, 2, 2> dx_dxi = xy * nat_grads.transpose();
  const Scalar det = dx_dxi.determinant();
  if (!(det > 0)) throw GeometryError("singular or inverted isoparametric Jacobian");
  const Eigen::Matrix<Scalar, 2, Eigen::Dynamic> grad = dx_dxi.transpose().inverse() * nat_grads;
  return {strain_from_gradients(grad), det};
}

template <class Derived>
IsoStrain<typename Derived::Scalar> q4bl_strain_matrix(const Eigen::MatrixBase<Derived>& xy,
                                                       typename Derived::Scalar r,
                                                       typename Derived::Scalar s) {
  return isoparametric_strain(xy, q4_shape(r, s).grads);
}

template <class Derived>
IsoStrain<typename Derived::Scalar> q9_strain_matrix(const Eigen::MatrixBase<Derived>& xy,
                                                     typename Derived::Scalar r,
                                                     typename Derived::Scalar s) {
  return isoparametric_strain(xy, q9_shape(r, s).grads);
}

// Piecewise-constant strain operators over the cells of one element.
struct ElementStrainMap {
  std::vector<StrainMatrix<double>> B;  // one 3 x (2 n_nodes) matrix per cell
  Eigen::VectorXd areas;                // cell areas
};

ElementStrainMap t3_strain_map(const Eigen::Matrix<double, 2, 3>& xy);

/// Piecewise-linear quadrilateral: four subtriangles (corner k, corner k+1,
/// center) with the center displacement tied to the average of the corners.
ElementStrainMap q4pl_strain_map(const Eigen::Matrix<double, 2, 4>& xy);

// Bilinear quadrilateral sampled at the 2x2 Gauss points; `areas` holds
// the quadrature weights times det J.
ElementStrainMap q4bl_gauss_map(const Eigen::Matrix<double, 2, 4>& xy);

/// Bilinear Q4 strain averaged over the four quadrant cells (corner k, mid k,
/// center, mid k-1), from boundary integrals of the shape functions with
/// 2-point Gauss rules on each cell side.
ElementStrainMap q4cs_strain_map(const Eigen::Matrix<double, 2, 4>& xy);

// The four subtriangles of a quadrilateral in the order used above.
std::array<Eigen::Matrix<double, 2, 3>, 4> q4_subtriangles(const Eigen::Matrix<double, 2, 4>& xy);

struct InverseMapResult {
  Vec2 natural = Vec2::Zero();
  bool converged = false;
  int iterations = 0;
};

/// Solves x(r, s) = p for a bilinear (4 columns) or biquadratic (9 columns)
/// element with damped Newton iterations.
InverseMapResult inverse_map(const Eigen::Matrix2Xd& xy, const Vec2& p, double tol = 1e-12,
                             int max_iterations = 50);

// x(r, s) for a bilinear or biquadratic element.
Vec2 forward_map(const Eigen::Matrix2Xd& xy, const Vec2& natural);

}  // namespace smoothfem::elements
