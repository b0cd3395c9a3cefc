#pragma once

// Global assembly. Every method is described by a strain sampling: a sparse
// operator G mapping nodal displacements to Voigt strains at sample cells or
// points, plus one weight (area or quadrature weight) per sample. Then
//
//   K = Σ_s w_s B_sᵀ D B_s,   B_s = rows 3s..3s+2 of G.

#include "smoothfem/core.hpp"
#include "smoothfem/material.hpp"
#include "smoothfem/mesh.hpp"
#include "smoothfem/problem.hpp"
#include "smoothfem/subdivision.hpp"

#include <string_view>
#include <vector>

namespace smoothfem {

enum class Method { fem_t3, fem_plq4, fem_blq4, esfem, nsfem, csfem, sse, fem_q9 };

// Interpolation of the nodal values inside an element.
enum class DisplacementSpace { linear_triangle, piecewise_linear_quad, bilinear_quad, biquadratic_quad };

// Stiffness route for SSE: Gauss points of the S_h interpolant, or the
// piecewise constants P2 P1 ε on the interior cells.
enum class SseRoute { gauss_points, projections };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
bool method_supports(Method method, ElementKind kind);
void require_supported(Method method, ElementKind kind);
DisplacementSpace displacement_space(Method method, ElementKind kind);
// User-facing label, e.g. "SSE T3" or "FEM BL-Q4".
std::string method_label(Method method, ElementKind kind);

struct StrainSampling {
  RowSparseMatrix G;  // (3 n_samples) x n_dofs, row 3s + c
  Eigen::VectorXd weights;

  [[nodiscard]] Index size() const { return weights.size(); }
};

// Per-element compatible strains: one sample per T3 element or per PL-Q4
// subtriangle (sample 4e + k).
StrainSampling compatible_sampling(const Mesh& mesh);
// Same as above, with the matching subdivision.
SubdivisionPtr compatible_subdivision(const Mesh& mesh);

// Applies a scalar cell-to-cell operator to every Voigt component of G.
RowSparseMatrix expand_voigt(const RowSparseMatrix& scalar_op);

StrainSampling method_sampling(const Mesh& mesh, Method method, SseRoute route = SseRoute::gauss_points);

struct DofMap {
  std::vector<bool> constrained;  // per global dof
  std::vector<Index> free_index;  // global dof -> free index or -1
  std::vector<Index> free_dofs;   // free index -> global dof

  [[nodiscard]] Index n_free() const { return static_cast<Index>(free_dofs.size()); }
  [[nodiscard]] Index n_dofs() const { return static_cast<Index>(constrained.size()); }
};

// Dofs of Dirichlet-tagged vertices are constrained.
DofMap make_dofmap(const Mesh& mesh);

struct LinearSystem {
  SparseMatrix K;
  Eigen::VectorXd F;
  Method method = Method::fem_t3;
};

SparseMatrix assemble_from_sampling(const StrainSampling& sampling, const Mat3& D, Index n_dofs);
LinearSystem assemble_stiffness(const Mesh& mesh, const MaterialMatrix& material, Method method,
                                SseRoute route = SseRoute::gauss_points);

// ∫ b·v dΩ + ∫_ΓN t·v dΓ in the method's displacement space.
Eigen::VectorXd assemble_load(const Mesh& mesh, const Problem& problem, Method method);

struct ReducedSystem {
  SparseMatrix K;
  Eigen::VectorXd F;
  Eigen::VectorXd prescribed;  // full-length vector holding the Dirichlet values
};

// Eliminates constrained dofs, moving prescribed values to the right-hand side.
ReducedSystem apply_dirichlet(const LinearSystem& system, const DofMap& dofs, const Eigen::VectorXd& prescribed);

struct SolveReport {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  double min_pivot = 0.0;
};

// Sparse LDLT with AMD ordering. Throws SolverError on a nonpositive pivot
// or a relative residual above `residual_tol`.
SolveReport solve(const SparseMatrix& K, const Eigen::VectorXd& F, double residual_tol = 1e-10);

// The mesh with boundary tags adjusted to the problem.
Mesh tag_for_problem(const Mesh& mesh, const Problem& problem);

// Full nodal vector for the prescribed Dirichlet values of a problem.
Eigen::VectorXd prescribed_values(const Mesh& mesh, const Problem& problem);

struct Solution {
  Method method = Method::fem_t3;
  Eigen::VectorXd u;  // full nodal vector
  Index n_free = 0;
  double relative_residual = 0.0;
};

// assemble, constrain, solve, expand.
Solution solve_problem(const Mesh& mesh, const Problem& problem, Method method,
                       SseRoute route = SseRoute::gauss_points);

}  // namespace smoothfem
