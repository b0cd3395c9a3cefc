#pragma once

// Auxiliary partitions of the mesh domain used by the smoothing operators:
//
//   elementwise  the elements themselves
//   subtriangle  four (corner, corner, center) triangles per quadrilateral
//   edge_based   one cell per edge, joining its endpoints with the reference
//                points (centroid / corner average) of the adjacent elements
//   interior     one cell per element corner, joining the reference point
//                with the midpoints of the two edges at that corner
//   node_based   union of the interior cells around each vertex
//
// Cells are counterclockwise polygons and, except for node_based, convex.

#include "smoothfem/core.hpp"
#include "smoothfem/mesh.hpp"

#include <memory>
#include <vector>

namespace smoothfem {

enum class SubdivisionKind { elementwise, subtriangle, edge_based, interior, node_based };

std::string_view to_string(SubdivisionKind kind);

struct CellParent {
  Index element = -1;        // owning element (left element for edge cells)
  Index other_element = -1;  // right element of an interior edge cell
  Index edge = -1;
  Index vertex = -1;
  int local = -1;            // local corner / edge / subtriangle index
};

struct Subdivision {
  SubdivisionKind kind = SubdivisionKind::elementwise;
  std::vector<Eigen::Matrix2Xd> cells;
  std::vector<CellParent> parents;
  Eigen::VectorXd areas;

  [[nodiscard]] Index size() const { return static_cast<Index>(cells.size()); }
  [[nodiscard]] double total_area() const { return areas.sum(); }
};

using SubdivisionPtr = std::shared_ptr<const Subdivision>;

Subdivision build_elementwise_subdivision(const Mesh& mesh);
Subdivision build_edge_subdivision(const Mesh& mesh);
Subdivision build_interior_subdivision(const Mesh& mesh);
Subdivision build_quad_subtriangles(const Mesh& mesh);
Subdivision build_node_subdivision(const Mesh& mesh);

// Centroid for triangles, corner average for quadrilaterals.
Vec2 element_reference_point(const Eigen::Matrix2Xd& corners);

// Cell of the edge (v0, v1) between reference points `left` and optional `right`.
Eigen::Matrix2Xd edge_cell_polygon(const Vec2& v0, const Vec2& v1, const Vec2& left, const Vec2* right);
// Interior cell at corner k of an element.
Eigen::Matrix2Xd interior_cell_polygon(const Eigen::Matrix2Xd& corners, int k);

/// Sparse overlap areas |fine_i ∩ coarse_j| (fine cells as rows).
struct OverlapTable {
  RowSparseMatrix areas;

  [[nodiscard]] Index rows() const { return areas.rows(); }
  [[nodiscard]] Index cols() const { return areas.cols(); }
  [[nodiscard]] double entry(Index fine, Index coarse) const { return areas.coeff(fine, coarse); }
};

/// Exact overlaps by convex clipping with a bucket-grid prefilter. Both
/// subdivisions must partition the same domain; the row and column marginals
/// are checked against the cell areas (1e-12 relative).
OverlapTable compute_overlaps(const Subdivision& fine, const Subdivision& coarse);

}  // namespace smoothfem
