#pragma once

// Planar polygon utilities. Polygons are 2xN column matrices, counterclockwise.

#include "smoothfem/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace smoothfem::geometry {

template <class Scalar>
using Polygon = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

template <class Scalar>
Scalar cross(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Twice the signed area of triangle (a, b, c); positive when counterclockwise.
template <class Scalar>
Scalar orient(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b, const Vec2T<Scalar>& c) {
  return cross<Scalar>(b - a, c - a);
}

// Shoelace formula.
template <class Derived>
typename Derived::Scalar signed_area(const Eigen::MatrixBase<Derived>& poly) {
  using Scalar = typename Derived::Scalar;
  const Index n = poly.cols();
  Scalar twice = 0;
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    twice += poly(0, i) * poly(1, j) - poly(0, j) * poly(1, i);
  }
  return twice / 2;
}

template <class Derived>
Vec2T<typename Derived::Scalar> vertex_average(const Eigen::MatrixBase<Derived>& poly) {
  return poly.rowwise().mean();
}

// Area centroid of a simple polygon.
template <class Derived>
Vec2T<typename Derived::Scalar> centroid(const Eigen::MatrixBase<Derived>& poly) {
  using Scalar = typename Derived::Scalar;
  const Index n = poly.cols();
  Scalar twice = 0;
  Vec2T<Scalar> acc = Vec2T<Scalar>::Zero();
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    const Scalar c = poly(0, i) * poly(1, j) - poly(0, j) * poly(1, i);
    twice += c;
    acc += c * (poly.col(i) + poly.col(j));
  }
  return acc / (3 * twice);
}

// True when every turn is a left turn (collinear turns within `tol` relative
// to the polygon extent are accepted).
template <class Derived>
bool is_convex_ccw(const Eigen::MatrixBase<Derived>& poly, double tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  const Index n = poly.cols();
  if (n < 3) return false;
  const Scalar extent = (poly.rowwise().maxCoeff() - poly.rowwise().minCoeff()).norm();
  const Scalar floor = -tol * extent * extent;
  bool any_positive = false;
  for (Index i = 0; i < n; ++i) {
    const Vec2T<Scalar> a = poly.col(i);
    const Vec2T<Scalar> b = poly.col((i + 1) % n);
    const Vec2T<Scalar> c = poly.col((i + 2) % n);
    const Scalar turn = orient<Scalar>(a, b, c);
    if (turn < floor) return false;
    if (turn > -floor) any_positive = true;
  }
  return any_positive;
}

template <class Scalar>
struct BoundingBox {
  Vec2T<Scalar> lo;
  Vec2T<Scalar> hi;

  [[nodiscard]] bool overlaps(const BoundingBox& o, Scalar pad = 0) const {
    return lo.x() <= o.hi.x() + pad && o.lo.x() <= hi.x() + pad && lo.y() <= o.hi.y() + pad &&
           o.lo.y() <= hi.y() + pad;
  }
  [[nodiscard]] bool contains(const Vec2T<Scalar>& p, Scalar pad = 0) const {
    return p.x() >= lo.x() - pad && p.x() <= hi.x() + pad && p.y() >= lo.y() - pad &&
           p.y() <= hi.y() + pad;
  }
};

template <class Derived>
BoundingBox<typename Derived::Scalar> bounding_box(const Eigen::MatrixBase<Derived>& poly) {
  return {poly.rowwise().minCoeff(), poly.rowwise().maxCoeff()};
}

// Sutherland-Hodgman clipping of `subject` against the convex counterclockwise
// polygon `clipper`. The result may be empty (zero columns).
template <class Scalar>
Polygon<Scalar> clip_convex(const Polygon<Scalar>& subject, const Polygon<Scalar>& clipper) {
  std::vector<Vec2T<Scalar>> output(subject.cols());
  for (Index i = 0; i < subject.cols(); ++i) output[i] = subject.col(i);

  const Index m = clipper.cols();
  std::vector<Vec2T<Scalar>> input;
  for (Index e = 0; e < m && !output.empty(); ++e) {
    const Vec2T<Scalar> a = clipper.col(e);
    const Vec2T<Scalar> b = clipper.col((e + 1) % m);
    input.swap(output);
    output.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2T<Scalar>& p = input[i];
      const Vec2T<Scalar>& q = input[(i + 1) % n];
      const Scalar dp = orient<Scalar>(a, b, p);
      const Scalar dq = orient<Scalar>(a, b, q);
      if (dp >= 0) output.push_back(p);
      if ((dp >= 0) != (dq >= 0)) {
        const Scalar t = dp / (dp - dq);
        output.push_back(p + t * (q - p));
      }
    }
  }
  Polygon<Scalar> result(2, static_cast<Index>(output.size()));
  for (std::size_t i = 0; i < output.size(); ++i) result.col(static_cast<Index>(i)) = output[i];
  return result;
}

// Barycentric coordinates of p in triangle (a, b, c).
template <class Scalar>
Vec3T<Scalar> barycentric(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b, const Vec2T<Scalar>& c,
                          const Vec2T<Scalar>& p) {
  const Scalar total = orient<Scalar>(a, b, c);
  Vec3T<Scalar> lambda;
  lambda(1) = orient<Scalar>(a, p, c) / total;
  lambda(2) = orient<Scalar>(a, b, p) / total;
  lambda(0) = Scalar(1) - lambda(1) - lambda(2);
  return lambda;
}

}  // namespace smoothfem::geometry
