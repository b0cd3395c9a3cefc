#pragma once

// Piecewise-constant smoothing: cell-averaging projections between
// subdivisions and the SSE smoothing pipeline (intermediate strains, Gauss
// assignment, linear / bilinear interpolation).

#include "smoothfem/core.hpp"
#include "smoothfem/mesh.hpp"
#include "smoothfem/subdivision.hpp"

#include <Eigen/Dense>

#include <vector>

namespace smoothfem {

/// Per-cell Voigt 3-vectors over a subdivision (strain or stress).
struct StrainField {
  SubdivisionPtr subdivision;
  Eigen::Matrix3Xd values;

  StrainField() = default;
  StrainField(SubdivisionPtr sub, Eigen::Matrix3Xd v);

  [[nodiscard]] Index size() const { return values.cols(); }
};

/// Linear map between per-cell fields, applied identically to each Voigt
/// component. weights(t, s) = |target_t ∩ source_s| / |target_t|.
struct SmoothingOperator {
  SubdivisionPtr source;
  SubdivisionPtr target;
  RowSparseMatrix weights;
};

SmoothingOperator build_projection(SubdivisionPtr source, SubdivisionPtr target, const OverlapTable& overlaps);
// Computes the overlaps itself.
SmoothingOperator build_projection(SubdivisionPtr source, SubdivisionPtr target);

StrainField apply_projection(const SmoothingOperator& op, const StrainField& field);

// first, then second.
SmoothingOperator compose(const SmoothingOperator& second, const SmoothingOperator& first);

// L2 inner product of two piecewise-constant fields on the same subdivision.
double l2_inner(const StrainField& a, const StrainField& b);
// Same, for fields on different subdivisions; overlaps has a's cells as rows.
double l2_inner(const StrainField& a, const StrainField& b, const OverlapTable& overlaps);

// Applies a 3x3 matrix to every cell value.
StrainField transform(const Eigen::Matrix3d& A, const StrainField& field);

// Average over the node-based cells of an elementwise T3 field.
SmoothingOperator build_node_projection(const Mesh& mesh, SubdivisionPtr elementwise, SubdivisionPtr nodes);

// --- SSE ------------------------------------------------------------------

/// Gauss-point values and interpolation coefficients of the SSE strain on
/// one element. T3: value(λ) = coeffs · λ with barycentric λ. Q4:
/// value(r, s) = coeffs · (1, r, s, rs).
struct SseElementField {
  ElementKind kind = ElementKind::T3;
  Eigen::Matrix3Xd gauss;
  Eigen::Matrix3Xd coeffs;

  // T3: natural = (λ1, λ2); Q4: natural = (r, s).
  [[nodiscard]] Vec3 evaluate(const Vec2& natural) const;
};

// Natural coordinates of the SSE Gauss points: T3 point k has barycentric
// weight 2/3 on corner k; Q4 points run counterclockwise from (-a, -a).
Eigen::Matrix2Xd sse_gauss_points(ElementKind kind);

// Weights w with value(natural) = Σ_k w_k gauss_k.
Eigen::VectorXd sse_interpolation_weights(ElementKind kind, const Vec2& natural);

// Index of the source cell of an element: T3 elements carry one strain,
// Q4 elements one per subtriangle (cell 4e + k).
Index sse_source_cell(ElementKind kind, Index element, int local);

/// Intermediate strains ε̂^(k), one per element edge. `field` holds one value
/// per element (T3) or per subtriangle (Q4, ordered 4e + k); `sub_areas` are
/// the matching cell areas.
std::vector<Vec3> sse_intermediate_strains(const Mesh& mesh, const Eigen::Matrix3Xd& field,
                                           const Eigen::VectorXd& cell_areas, Index element);

/// Gauss values from intermediate strains. T3: g_k = (ε̂^(k-1) + ε̂^(k)) / 2.
/// Q4: g_k weights ε̂^(k-1), ε̂^(k) by the subtriangle areas.
SseElementField sse_gauss_assignment(ElementKind kind, const std::vector<Vec3>& intermediate,
                                     const Eigen::VectorXd& subtriangle_areas = {});

// S_h applied element by element.
std::vector<SseElementField> sse_smooth(const Mesh& mesh, const Eigen::Matrix3Xd& field,
                                        const Eigen::VectorXd& cell_areas);

/// S_h as a scalar matrix: rows are Gauss points (element * n_gauss + k),
/// columns source cells. Built from the same weights as sse_smooth.
RowSparseMatrix sse_operator(const Mesh& mesh, const Eigen::VectorXd& cell_areas);

// --- Smoothed strains from nodal displacements ------------------------------

// Compatible strain: per element (T3) or per subtriangle (piecewise-linear Q4).
StrainField compatible_field(const Mesh& mesh, const Eigen::VectorXd& u);
// P_1 of the compatible strain on the edge-based cells.
StrainField esfem_field(const Mesh& mesh, const Eigen::VectorXd& u);
// Average of the element strains over each node-based cell (T3 only).
StrainField nsfem_field(const Mesh& mesh, const Eigen::VectorXd& u);
// Cell averages of the bilinear Q4 strain over the four quadrant cells.
StrainField csfem_field(const Mesh& mesh, const Eigen::VectorXd& u);

/// Fields of the mixed form recovered from an SSE solution:
/// ε = B u, ε1 = P1 ε, ε2 = P2 ε1, σ2 = D ε2, σ1 = P1 σ2 (on the edge cells).
struct DualFields {
  StrainField strain;
  StrainField strain1;
  StrainField strain2;
  StrainField stress2;
  StrainField stress1;
};

DualFields sse_dual_fields(const Mesh& mesh, const Eigen::Matrix3d& D, const Eigen::VectorXd& u);

}  // namespace smoothfem
