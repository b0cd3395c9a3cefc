#include "smoothfem/quadrature.hpp"

#include <cmath>

namespace smoothfem {

namespace {

QuadratureRule tensor_rule(const QuadratureRule& line, int degree) {
  const Index n = line.size();
  QuadratureRule rule;
  rule.points.resize(2, n * n);
  rule.weights.resize(n * n);
  rule.degree = degree;
  rule.on_triangle = false;
  Index q = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i, ++q) {
      rule.points.col(q) << line.points(0, i), line.points(0, j);
      rule.weights(q) = line.weights(i) * line.weights(j);
    }
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule;
  rule.on_triangle = false;
  rule.points = Eigen::Matrix2Xd::Zero(2, n);
  rule.weights.resize(n);
  switch (n) {
    case 1:
      rule.weights << 2.0;
      rule.degree = 1;
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      rule.points.row(0) << -a, a;
      rule.weights << 1.0, 1.0;
      rule.degree = 3;
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      rule.points.row(0) << -a, 0.0, a;
      rule.weights << 5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0;
      rule.degree = 5;
      break;
    }
    default:
      throw Error("quadrature", "gauss_legendre supports 1 to 3 points, got " + std::to_string(n));
  }
  return rule;
}

QuadratureRule quadrature(QuadratureKind kind) {
  QuadratureRule rule;
  switch (kind) {
    case QuadratureKind::tri3: {
      rule.points.resize(2, 3);
      // Point k has barycentric weight 2/3 on node k.
      rule.points.col(0) << 1.0 / 6.0, 1.0 / 6.0;
      rule.points.col(1) << 2.0 / 3.0, 1.0 / 6.0;
      rule.points.col(2) << 1.0 / 6.0, 2.0 / 3.0;
      rule.weights = Eigen::VectorXd::Constant(3, 1.0 / 6.0);
      rule.degree = 2;
      return rule;
    }
    case QuadratureKind::tri_deg4: {
      // Six-point symmetric rule (Strang-Fix / Dunavant).
      constexpr double a = 0.445948490915964886318329253883;
      constexpr double wa = 0.223381589678011465944827232685;
      constexpr double b = 0.091576213509770743459571463402;
      constexpr double wb = 0.109951743655321867638506100649;
      rule.points.resize(2, 6);
      rule.weights.resize(6);
      const double bary[6][3] = {{1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
                                 {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b}};
      for (int q = 0; q < 6; ++q) {
        rule.points.col(q) << bary[q][1], bary[q][2];
        rule.weights(q) = 0.5 * (q < 3 ? wa : wb);
      }
      rule.degree = 4;
      return rule;
    }
    case QuadratureKind::quad2x2: {
      const double a = 1.0 / std::sqrt(3.0);
      rule.points.resize(2, 4);
      rule.points.col(0) << -a, -a;
      rule.points.col(1) << a, -a;
      rule.points.col(2) << a, a;
      rule.points.col(3) << -a, a;
      rule.weights = Eigen::VectorXd::Ones(4);
      rule.degree = 3;
      rule.on_triangle = false;
      return rule;
    }
    case QuadratureKind::quad3x3:
      return tensor_rule(gauss_legendre(3), 5);
  }
  throw Error("quadrature", "unknown quadrature kind");
}

std::string_view to_string(QuadratureKind kind) {
  switch (kind) {
    case QuadratureKind::tri3: return "tri3";
    case QuadratureKind::tri_deg4: return "tri_deg4";
    case QuadratureKind::quad2x2: return "quad2x2";
    case QuadratureKind::quad3x3: return "quad3x3";
  }
  return "?";
}

}  // namespace smoothfem
