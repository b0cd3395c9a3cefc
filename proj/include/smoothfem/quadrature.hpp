#pragma once

#include "smoothfem/core.hpp"

#include <string_view>

namespace smoothfem {

enum class QuadratureKind { tri3, tri_deg4, quad2x2, quad3x3 };

// Points are natural coordinates. Triangle rules live on the reference
// triangle {(0,0), (1,0), (0,1)} (measure 1/2), with barycentric coordinates
// (1 - xi - eta, xi, eta); quadrilateral rules live on [-1, 1]^2 (measure 4).
struct QuadratureRule {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;
  int degree = 0;
  bool on_triangle = true;

  [[nodiscard]] Index size() const { return weights.size(); }
};

/// Returns the rule for `kind`.
///
/// tri3 is the interior degree-2 rule at barycentric (2/3, 1/6, 1/6); point k
/// sits next to node k, which is the Gauss-point layout the smoothed T3 element
/// assigns its values to. quad2x2 lists its points counterclockwise starting
/// from the (-,-) quadrant, again matching the nodes.
QuadratureRule quadrature(QuadratureKind kind);

// One-dimensional Gauss-Legendre rule on [-1, 1] with n = 1, 2 or 3 points.
QuadratureRule gauss_legendre(int n);

std::string_view to_string(QuadratureKind kind);

}  // namespace smoothfem
