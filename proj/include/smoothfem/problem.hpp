#pragma once

#include "smoothfem/core.hpp"
#include "smoothfem/material.hpp"

#include <functional>
#include <optional>
#include <string>

namespace smoothfem {

using VectorField = std::function<Vec2(const Vec2&)>;

/// Boundary value problem data. Dirichlet and Neumann parts come from the
/// mesh's boundary tags; `prescribed` gives the displacement on Dirichlet
/// vertices and `traction` the load on Neumann edges.
struct Problem {
  std::string name;
  Rect domain;
  MaterialMatrix material;
  VectorField body_force;
  VectorField traction;
  VectorField prescribed;
  Vec2 probe = Vec2::Zero();
  // Tag every boundary edge Dirichlet instead of keeping the mesh's tags.
  bool clamp_entire_boundary = false;
  // Set when the exact solution is a linear field.
  std::optional<Vec3> exact_strain;
  VectorField exact_displacement;
};

// Body force (-y^2, 1 - x^2), zero traction, clamped where the mesh says so.
// The probe point defaults to the top-right corner of the domain.
Problem block_problem(const Rect& domain = {}, double E = 1e3, double nu = 0.2,
                      PlaneMode mode = PlaneMode::plane_stress);

// u(x) = c + A x with zero body force; meant for meshes tagged Dirichlet on
// the whole boundary.
Problem patch_problem(const Eigen::Matrix2d& A, const Vec2& c, const Rect& domain = {}, double E = 1e3,
                      double nu = 0.2, PlaneMode mode = PlaneMode::plane_stress);

// The patch field used by the verification suite.
Problem default_patch_problem(const Rect& domain = {});

}  // namespace smoothfem
