#include "smoothfem/subdivision.hpp"

#include "smoothfem/elements.hpp"
#include "smoothfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace smoothfem {

std::string_view to_string(SubdivisionKind kind) {
  switch (kind) {
    case SubdivisionKind::elementwise: return "elementwise";
    case SubdivisionKind::subtriangle: return "subtriangle";
    case SubdivisionKind::edge_based: return "edge_based";
    case SubdivisionKind::interior: return "interior";
    case SubdivisionKind::node_based: return "node_based";
  }
  return "?";
}

Vec2 element_reference_point(const Eigen::Matrix2Xd& corners) { return corners.rowwise().mean(); }

Eigen::Matrix2Xd edge_cell_polygon(const Vec2& v0, const Vec2& v1, const Vec2& left, const Vec2* right) {
  if (right == nullptr) {
    Eigen::Matrix2Xd cell(2, 3);
    cell << v0, v1, left;
    return cell;
  }
  Eigen::Matrix2Xd cell(2, 4);
  cell << v0, *right, v1, left;
  return cell;
}

Eigen::Matrix2Xd interior_cell_polygon(const Eigen::Matrix2Xd& corners, int k) {
  const Index n = corners.cols();
  const Vec2 center = element_reference_point(corners);
  const Vec2 corner = corners.col(k);
  const Vec2 next = corners.col((k + 1) % n);
  const Vec2 prev = corners.col((k + n - 1) % n);
  Eigen::Matrix2Xd cell(2, 4);
  cell << corner, 0.5 * (corner + next), center, 0.5 * (prev + corner);
  return cell;
}

namespace {

void require_tri_or_quad(const Mesh& mesh, const char* what) {
  if (mesh.kind() == ElementKind::Q9)
    throw MeshError(std::string(what) + " needs a T3 or Q4 mesh");
}

void finish(Subdivision& sub) {
  sub.areas.resize(sub.size());
  for (Index c = 0; c < sub.size(); ++c) {
    const double area = geometry::signed_area(sub.cells[c]);
    if (!(area > 0.0))
      throw GeometryError(std::string(to_string(sub.kind)) + " cell " + std::to_string(c) + " has nonpositive area");
    sub.areas(c) = area;
  }
}

}  // namespace

Subdivision build_elementwise_subdivision(const Mesh& mesh) {
  require_tri_or_quad(mesh, "elementwise subdivision");
  Subdivision sub;
  sub.kind = SubdivisionKind::elementwise;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    sub.cells.push_back(mesh.element_corners(e));
    sub.parents.push_back({.element = e});
  }
  finish(sub);
  return sub;
}

Subdivision build_edge_subdivision(const Mesh& mesh) {
  require_tri_or_quad(mesh, "edge-based subdivision");
  Subdivision sub;
  sub.kind = SubdivisionKind::edge_based;
  std::vector<Vec2> centers(mesh.n_elements());
  for (Index e = 0; e < mesh.n_elements(); ++e) centers[e] = element_reference_point(mesh.element_corners(e));
  for (Index i = 0; i < static_cast<Index>(mesh.edges().size()); ++i) {
    const Edge& edge = mesh.edges()[i];
    const Vec2* right = edge.on_boundary() ? nullptr : &centers[edge.right];
    sub.cells.push_back(edge_cell_polygon(mesh.vertex(edge.v0), mesh.vertex(edge.v1), centers[edge.left], right));
    sub.parents.push_back({.element = edge.left, .other_element = edge.right, .edge = i, .local = edge.left_local});
  }
  finish(sub);
  return sub;
}

Subdivision build_interior_subdivision(const Mesh& mesh) {
  require_tri_or_quad(mesh, "interior subdivision");
  Subdivision sub;
  sub.kind = SubdivisionKind::interior;
  const int nc = mesh.corners_per_element();
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Matrix2Xd corners = mesh.element_corners(e);
    for (int k = 0; k < nc; ++k) {
      sub.cells.push_back(interior_cell_polygon(corners, k));
      sub.parents.push_back({.element = e, .vertex = mesh.node(e, k), .local = k});
    }
  }
  finish(sub);
  return sub;
}

Subdivision build_quad_subtriangles(const Mesh& mesh) {
  if (mesh.kind() != ElementKind::Q4) throw MeshError("subtriangle subdivision needs a Q4 mesh");
  Subdivision sub;
  sub.kind = SubdivisionKind::subtriangle;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto tris = elements::q4_subtriangles(mesh.element_corners(e));
    for (int k = 0; k < 4; ++k) {
      sub.cells.emplace_back(tris[k]);
      sub.parents.push_back({.element = e, .local = k});
    }
  }
  finish(sub);
  return sub;
}

Subdivision build_node_subdivision(const Mesh& mesh) {
  require_tri_or_quad(mesh, "node-based subdivision");
  const int nc = mesh.corners_per_element();

  // Pieces of the interior subdivision around each vertex. A piece at corner k
  // spans from edge k (leaving the vertex) to edge k-1 (arriving at it).
  struct Piece {
    Index element;
    int corner;
    Index first_edge;
    Index last_edge;
  };
  std::vector<std::vector<Piece>> around(mesh.n_vertices());
  for (Index e = 0; e < mesh.n_elements(); ++e)
    for (int k = 0; k < nc; ++k)
      around[mesh.node(e, k)].push_back({e, k, mesh.element_edge(e, k), mesh.element_edge(e, (k + nc - 1) % nc)});

  Subdivision sub;
  sub.kind = SubdivisionKind::node_based;
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const auto& pieces = around[v];
    if (pieces.empty()) continue;
    std::map<Index, std::size_t> by_first;
    for (std::size_t i = 0; i < pieces.size(); ++i) by_first[pieces[i].first_edge] = i;
    // Start at the piece whose leading edge is on the boundary, if any.
    std::size_t start = 0;
    bool boundary = false;
    for (std::size_t i = 0; i < pieces.size(); ++i)
      if (mesh.edges()[pieces[i].first_edge].on_boundary()) {
        start = i;
        boundary = true;
        break;
      }
    std::vector<Vec2> ring;
    if (boundary) ring.push_back(mesh.vertex(v));
    std::size_t current = start;
    for (std::size_t step = 0; step < pieces.size(); ++step) {
      const Piece& p = pieces[current];
      const Eigen::Matrix2Xd cell = interior_cell_polygon(mesh.element_corners(p.element), p.corner);
      if (step == 0) ring.push_back(cell.col(1));
      ring.push_back(cell.col(2));
      ring.push_back(cell.col(3));
      if (step + 1 == pieces.size()) break;
      auto it = by_first.find(p.last_edge);
      if (it == by_first.end()) throw MeshError("vertex " + std::to_string(v) + " has a broken element fan");
      current = it->second;
    }
    // Interior stars close on the first midpoint.
    if (!boundary) ring.pop_back();
    Eigen::Matrix2Xd poly(2, static_cast<Index>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i) poly.col(static_cast<Index>(i)) = ring[i];
    sub.cells.push_back(std::move(poly));
    sub.parents.push_back({.element = pieces.front().element, .vertex = v});
  }
  finish(sub);
  return sub;
}

// ---------------------------------------------------------------------------

OverlapTable compute_overlaps(const Subdivision& fine, const Subdivision& coarse) {
  if (fine.size() == 0 || coarse.size() == 0) throw GeometryError("overlap of an empty subdivision");
  for (Index c = 0; c < coarse.size(); ++c)
    if (!geometry::is_convex_ccw(coarse.cells[c]))
      throw GeometryError("coarse cell " + std::to_string(c) + " is not convex");
  for (Index f = 0; f < fine.size(); ++f)
    if (!geometry::is_convex_ccw(fine.cells[f]))
      throw GeometryError("fine cell " + std::to_string(f) + " is not convex");

  // Bucket grid over the coarse cells.
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  std::vector<geometry::BoundingBox<double>> boxes(coarse.size());
  for (Index c = 0; c < coarse.size(); ++c) {
    boxes[c] = geometry::bounding_box(coarse.cells[c]);
    lo = lo.cwiseMin(boxes[c].lo);
    hi = hi.cwiseMax(boxes[c].hi);
  }
  const Vec2 extent = (hi - lo).cwiseMax(1e-300);
  const Index n = std::max<Index>(1, static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(coarse.size())))));
  const Vec2 size(extent.x() / n, extent.y() / n);
  const double pad = 1e-12 * extent.norm();
  auto cell_index = [&](double x, double origin, double width) {
    return std::clamp<Index>(static_cast<Index>(std::floor((x - origin) / width)), 0, n - 1);
  };
  std::vector<std::vector<Index>> buckets(n * n);
  for (Index c = 0; c < coarse.size(); ++c) {
    const Index i0 = cell_index(boxes[c].lo.x() - pad, lo.x(), size.x());
    const Index i1 = cell_index(boxes[c].hi.x() + pad, lo.x(), size.x());
    const Index j0 = cell_index(boxes[c].lo.y() - pad, lo.y(), size.y());
    const Index j1 = cell_index(boxes[c].hi.y() + pad, lo.y(), size.y());
    for (Index j = j0; j <= j1; ++j)
      for (Index i = i0; i <= i1; ++i) buckets[j * n + i].push_back(c);
  }

  const double drop = 1e-14 * std::min(fine.areas.minCoeff(), coarse.areas.minCoeff());
  std::vector<Triplet> triplets;
  std::vector<Index> stamp(coarse.size(), -1);
  std::vector<Index> candidates;
  for (Index f = 0; f < fine.size(); ++f) {
    const auto box = geometry::bounding_box(fine.cells[f]);
    candidates.clear();
    const Index i0 = cell_index(box.lo.x() - pad, lo.x(), size.x());
    const Index i1 = cell_index(box.hi.x() + pad, lo.x(), size.x());
    const Index j0 = cell_index(box.lo.y() - pad, lo.y(), size.y());
    const Index j1 = cell_index(box.hi.y() + pad, lo.y(), size.y());
    for (Index j = j0; j <= j1; ++j)
      for (Index i = i0; i <= i1; ++i)
        for (Index c : buckets[j * n + i])
          if (stamp[c] != f && boxes[c].overlaps(box, pad)) {
            stamp[c] = f;
            candidates.push_back(c);
          }
    std::sort(candidates.begin(), candidates.end());
    for (Index c : candidates) {
      const auto piece = geometry::clip_convex<double>(fine.cells[f], coarse.cells[c]);
      if (piece.cols() < 3) continue;
      const double area = geometry::signed_area(piece);
      if (area > drop) triplets.emplace_back(f, c, area);
    }
  }

  OverlapTable table;
  table.areas.resize(fine.size(), coarse.size());
  table.areas.setFromTriplets(triplets.begin(), triplets.end());
  table.areas.makeCompressed();

  const Eigen::VectorXd row_sums = table.areas * Eigen::VectorXd::Ones(coarse.size());
  const Eigen::VectorXd col_sums = table.areas.transpose() * Eigen::VectorXd::Ones(fine.size());
  constexpr double tol = 1e-12;
  for (Index f = 0; f < fine.size(); ++f)
    if (std::abs(row_sums(f) - fine.areas(f)) > tol * fine.areas(f))
      throw GeometryError("overlap row " + std::to_string(f) + " does not reproduce the fine cell area");
  for (Index c = 0; c < coarse.size(); ++c)
    if (std::abs(col_sums(c) - coarse.areas(c)) > tol * coarse.areas(c))
      throw GeometryError("overlap column " + std::to_string(c) + " does not reproduce the coarse cell area");
  return table;
}

}  // namespace smoothfem
