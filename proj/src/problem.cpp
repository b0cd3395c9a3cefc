#include "smoothfem/problem.hpp"

namespace smoothfem {

Problem block_problem(const Rect& domain, double E, double nu, PlaneMode mode) {
  Problem p;
  p.name = "block";
  p.domain = domain;
  p.material = dmatrix(E, nu, mode);
  p.body_force = [](const Vec2& x) { return Vec2(-x.y() * x.y(), 1.0 - x.x() * x.x()); };
  p.traction = [](const Vec2&) { return Vec2::Zero().eval(); };
  p.prescribed = [](const Vec2&) { return Vec2::Zero().eval(); };
  p.probe = Vec2(domain.x1, domain.y1);
  return p;
}

Problem patch_problem(const Eigen::Matrix2d& A, const Vec2& c, const Rect& domain, double E, double nu,
                      PlaneMode mode) {
  Problem p;
  p.name = "patch";
  p.domain = domain;
  p.material = dmatrix(E, nu, mode);
  p.body_force = [](const Vec2&) { return Vec2::Zero().eval(); };
  p.traction = [](const Vec2&) { return Vec2::Zero().eval(); };
  p.exact_displacement = [A, c](const Vec2& x) { return (c + A * x).eval(); };
  p.prescribed = p.exact_displacement;
  p.clamp_entire_boundary = true;
  p.exact_strain = Vec3(A(0, 0), A(1, 1), A(0, 1) + A(1, 0));
  p.probe = Vec2(0.5 * (domain.x0 + domain.x1), 0.5 * (domain.y0 + domain.y1));
  return p;
}

Problem default_patch_problem(const Rect& domain) {
  Eigen::Matrix2d A;
  A << 1e-3, 4e-4, -2e-4, 2e-3;
  return patch_problem(A, Vec2(1e-3, -5e-4), domain);
}

}  // namespace smoothfem
