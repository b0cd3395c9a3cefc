#pragma once

#include "smoothfem/core.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace smoothfem {

enum class ElementKind { T3, Q4, Q9 };
enum class BoundaryTag { Dirichlet, Neumann };
enum class TriPattern { slash, backslash, union_jack };

struct BoundaryEdge {
  Index a = 0;
  Index b = 0;
  BoundaryTag tag = BoundaryTag::Neumann;
};

// An edge between element corners. v0 -> v1 runs counterclockwise around
// `left`; `right` is -1 on the boundary.
struct Edge {
  Index v0 = 0;
  Index v1 = 0;
  Index left = -1;
  int left_local = -1;
  Index right = -1;
  int right_local = -1;

  [[nodiscard]] bool on_boundary() const { return right < 0; }
};

int nodes_per_element(ElementKind kind);
int corners_per_element(ElementKind kind);
std::string_view to_string(ElementKind kind);
ElementKind parse_element_kind(std::string_view text);
std::string_view to_string(TriPattern pattern);
TriPattern parse_tri_pattern(std::string_view text);

/// Conforming 2D mesh with a uniform element kind.
///
/// The constructor validates every invariant (positive counterclockwise
/// corners, convex quadrilaterals, conformity, boundary coverage) and throws
/// MeshError otherwise, so a Mesh value is always well formed. Local edge k of
/// an element joins corner k to corner k+1.
class Mesh {
public:
  using Connectivity = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;  // nodes x elements

  Mesh(ElementKind kind, Points vertices, Connectivity elements, std::vector<BoundaryEdge> boundary);

  [[nodiscard]] ElementKind kind() const { return kind_; }
  [[nodiscard]] const Points& vertices() const { return vertices_; }
  [[nodiscard]] const Connectivity& connectivity() const { return elements_; }
  [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

  [[nodiscard]] Index n_vertices() const { return vertices_.cols(); }
  [[nodiscard]] Index n_elements() const { return elements_.cols(); }
  [[nodiscard]] Index n_dofs() const { return 2 * n_vertices(); }
  [[nodiscard]] int nodes_per_element() const { return smoothfem::nodes_per_element(kind_); }
  [[nodiscard]] int corners_per_element() const { return smoothfem::corners_per_element(kind_); }

  [[nodiscard]] Vec2 vertex(Index v) const { return vertices_.col(v); }
  [[nodiscard]] Index node(Index element, int local) const { return elements_(local, element); }
  // All nodes of the element (2 x nodes_per_element).
  [[nodiscard]] Eigen::Matrix2Xd element_coords(Index element) const;
  // Corner polygon (2 x corners_per_element), counterclockwise.
  [[nodiscard]] Eigen::Matrix2Xd element_corners(Index element) const;
  [[nodiscard]] double element_area(Index element) const { return areas_(element); }
  [[nodiscard]] const Eigen::VectorXd& element_areas() const { return areas_; }
  // Edge index of local edge k.
  [[nodiscard]] Index element_edge(Index element, int k) const { return element_edges_(k, element); }
  // Neighbor across local edge k, or -1.
  [[nodiscard]] Index neighbor(Index element, int k) const;
  [[nodiscard]] double total_area() const { return areas_.sum(); }
  // Largest element diameter.
  [[nodiscard]] double max_diameter() const;
  [[nodiscard]] std::vector<bool> dirichlet_vertices() const;
  [[nodiscard]] std::vector<bool> boundary_vertices() const;

private:
  ElementKind kind_;
  Points vertices_;
  Connectivity elements_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<Edge> edges_;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> element_edges_;
  Eigen::VectorXd areas_;
};

// Generated meshes tag the bottom side (y = y0) Dirichlet and the rest Neumann.
Mesh generate_regular_tri(int n, TriPattern pattern = TriPattern::slash, const Rect& domain = {});
Mesh generate_regular_quad(int n, const Rect& domain = {});
Mesh generate_regular_q9(int n, const Rect& domain = {});

/// Moves every interior vertex by up to `magnitude` times its shortest incident
/// edge, uniformly at random in each coordinate. A draw is redrawn until the
/// incident elements and their auxiliary smoothing cells stay valid; after
/// `max_retries` failures the vertex is reported in a MeshError.
Mesh distort_mesh(const Mesh& mesh, double magnitude, std::uint64_t seed, int max_retries = 200);

// x -> A x + b applied to all vertices (A must preserve orientation).
Mesh affine_transform(const Mesh& mesh, const Eigen::Matrix2d& A, const Vec2& b);

// Same mesh with boundary tags recomputed from the edge endpoints.
Mesh retag_boundary(const Mesh& mesh, const std::function<BoundaryTag(const Vec2&, const Vec2&)>& tagger);

// Rotates each element's node list so local node 0 becomes local node `shift`
// (corners and, for Q9, midsides rotate together).
Mesh rotate_local_numbering(const Mesh& mesh, int shift);

struct PointLocation {
  Index element = -1;
  Vec2 natural = Vec2::Zero();  // (xi, eta) on the reference triangle, (r, s) on quads
};

/// Bucket-grid point locator. Ties on shared edges or vertices resolve to the
/// lowest element index.
class PointLocator {
public:
  explicit PointLocator(const Mesh& mesh);
  [[nodiscard]] PointLocation locate(const Vec2& p) const;
  [[nodiscard]] const Mesh& mesh() const { return mesh_; }

private:
  [[nodiscard]] Index bucket_of(double x, double y) const;

  Mesh mesh_;
  Vec2 lo_;
  Vec2 cell_size_;
  Index nx_ = 1;
  Index ny_ = 1;
  std::vector<std::vector<Index>> buckets_;
  double tol_ = 1e-12;
};

PointLocation locate_point(const Mesh& mesh, const Vec2& p);

}  // namespace smoothfem
