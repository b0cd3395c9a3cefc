#include "smoothfem/mesh.hpp"

#include "smoothfem/elements.hpp"
#include "smoothfem/geometry.hpp"
#include "smoothfem/subdivision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace smoothfem {

namespace {

using EdgeKey = std::pair<Index, Index>;

EdgeKey undirected(Index a, Index b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::string vertex_name(Index v) { return "vertex " + std::to_string(v); }
std::string element_name(Index e) { return "element " + std::to_string(e); }

// Corner polygon straight from raw arrays.
Eigen::Matrix2Xd corners_of(const Points& vertices, const Mesh::Connectivity& elements, Index e,
                            int n_corners) {
  Eigen::Matrix2Xd poly(2, n_corners);
  for (int k = 0; k < n_corners; ++k) poly.col(k) = vertices.col(elements(k, e));
  return poly;
}

bool strictly_convex(const Eigen::Matrix2Xd& poly) {
  const Index n = poly.cols();
  for (Index i = 0; i < n; ++i) {
    const Vec2 a = poly.col((i + n - 1) % n), b = poly.col(i), c = poly.col((i + 1) % n);
    if (!(geometry::orient<double>(a, b, c) > 0.0)) return false;
  }
  return true;
}

}  // namespace

int nodes_per_element(ElementKind kind) {
  switch (kind) {
    case ElementKind::T3: return 3;
    case ElementKind::Q4: return 4;
    case ElementKind::Q9: return 9;
  }
  return 0;
}

int corners_per_element(ElementKind kind) { return kind == ElementKind::T3 ? 3 : 4; }

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::T3: return "T3";
    case ElementKind::Q4: return "Q4";
    case ElementKind::Q9: return "Q9";
  }
  return "?";
}

ElementKind parse_element_kind(std::string_view text) {
  if (text == "T3" || text == "tri") return ElementKind::T3;
  if (text == "Q4" || text == "quad") return ElementKind::Q4;
  if (text == "Q9") return ElementKind::Q9;
  throw ParseError("unknown element kind '" + std::string(text) + "'");
}

std::string_view to_string(TriPattern pattern) {
  switch (pattern) {
    case TriPattern::slash: return "slash";
    case TriPattern::backslash: return "backslash";
    case TriPattern::union_jack: return "union_jack";
  }
  return "?";
}

TriPattern parse_tri_pattern(std::string_view text) {
  if (text == "slash") return TriPattern::slash;
  if (text == "backslash") return TriPattern::backslash;
  if (text == "union_jack") return TriPattern::union_jack;
  throw ConfigError("pattern must be slash, backslash or union_jack, got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

Mesh::Mesh(ElementKind kind, Points vertices, Connectivity elements, std::vector<BoundaryEdge> boundary)
    : kind_(kind), vertices_(std::move(vertices)), elements_(std::move(elements)), boundary_(std::move(boundary)) {
  const int n_nodes = smoothfem::nodes_per_element(kind_);
  const int n_corners = smoothfem::corners_per_element(kind_);
  if (elements_.rows() != n_nodes)
    throw MeshError(std::string(to_string(kind_)) + " elements need " + std::to_string(n_nodes) + " nodes, got " +
                    std::to_string(elements_.rows()));
  if (elements_.cols() == 0) throw MeshError("mesh has no elements");
  if (!vertices_.allFinite()) throw MeshError("vertex coordinates must be finite");
  if (elements_.size() > 0 && (elements_.minCoeff() < 0 || elements_.maxCoeff() >= vertices_.cols()))
    throw MeshError("element references a vertex out of range");

  areas_.resize(n_elements());
  for (Index e = 0; e < n_elements(); ++e) {
    const Eigen::Matrix2Xd poly = corners_of(vertices_, elements_, e, n_corners);
    const double area = geometry::signed_area(poly);
    if (!(area > 0.0))
      throw MeshError(element_name(e) + " has nonpositive signed area " + std::to_string(area));
    if (n_corners == 4 && !strictly_convex(poly)) throw MeshError(element_name(e) + " is not convex");
    areas_(e) = area;
  }

  // Edge topology from corner pairs.
  std::map<EdgeKey, Index> lookup;
  element_edges_.resize(n_corners, n_elements());
  for (Index e = 0; e < n_elements(); ++e) {
    for (int k = 0; k < n_corners; ++k) {
      const Index a = elements_(k, e), b = elements_((k + 1) % n_corners, e);
      if (a == b) throw MeshError(element_name(e) + " repeats a corner");
      const auto [it, inserted] = lookup.try_emplace(undirected(a, b), static_cast<Index>(edges_.size()));
      if (inserted) {
        edges_.push_back(Edge{a, b, e, k, -1, -1});
      } else {
        Edge& edge = edges_[it->second];
        if (edge.right >= 0) throw MeshError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") has more than two elements");
        if (edge.v0 != b || edge.v1 != a)
          throw MeshError("nonconforming or inconsistently oriented edge between " + element_name(edge.left) +
                          " and " + element_name(e));
        if (kind_ == ElementKind::Q9 && elements_(4 + k, e) != elements_(4 + edge.left_local, edge.left))
          throw MeshError("Q9 midside node mismatch between " + element_name(edge.left) + " and " + element_name(e));
        edge.right = e;
        edge.right_local = k;
      }
      element_edges_(k, e) = it->second;
    }
  }

  // Boundary tags must cover the topological boundary exactly once.
  std::map<EdgeKey, int> expected;
  for (const Edge& edge : edges_) {
    if (!edge.on_boundary()) continue;
    if (kind_ == ElementKind::Q9) {
      const Index mid = elements_(4 + edge.left_local, edge.left);
      expected[undirected(edge.v0, mid)] = 0;
      expected[undirected(mid, edge.v1)] = 0;
    } else {
      expected[undirected(edge.v0, edge.v1)] = 0;
    }
  }
  for (const BoundaryEdge& b : boundary_) {
    auto it = expected.find(undirected(b.a, b.b));
    if (it == expected.end())
      throw MeshError("boundary edge (" + std::to_string(b.a) + ", " + std::to_string(b.b) + ") is not on the boundary");
    if (++it->second > 1)
      throw MeshError("boundary edge (" + std::to_string(b.a) + ", " + std::to_string(b.b) + ") tagged twice");
  }
  for (const auto& [key, count] : expected)
    if (count == 0)
      throw MeshError("boundary edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) + ") is untagged");
}

Eigen::Matrix2Xd Mesh::element_coords(Index element) const {
  Eigen::Matrix2Xd xy(2, nodes_per_element());
  for (int k = 0; k < nodes_per_element(); ++k) xy.col(k) = vertices_.col(elements_(k, element));
  return xy;
}

Eigen::Matrix2Xd Mesh::element_corners(Index element) const {
  return corners_of(vertices_, elements_, element, corners_per_element());
}

Index Mesh::neighbor(Index element, int k) const {
  const Edge& edge = edges_[element_edges_(k, element)];
  return edge.left == element ? edge.right : edge.left;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (Index e = 0; e < n_elements(); ++e) {
    const Eigen::Matrix2Xd c = element_corners(e);
    for (Index i = 0; i < c.cols(); ++i)
      for (Index j = i + 1; j < c.cols(); ++j) h = std::max(h, (c.col(i) - c.col(j)).norm());
  }
  return h;
}

std::vector<bool> Mesh::dirichlet_vertices() const {
  std::vector<bool> flags(n_vertices(), false);
  for (const BoundaryEdge& b : boundary_)
    if (b.tag == BoundaryTag::Dirichlet) flags[b.a] = flags[b.b] = true;
  return flags;
}

std::vector<bool> Mesh::boundary_vertices() const {
  std::vector<bool> flags(n_vertices(), false);
  for (const BoundaryEdge& b : boundary_) flags[b.a] = flags[b.b] = true;
  return flags;
}

// ---------------------------------------------------------------------------

namespace {

Points grid_vertices(int nx, int ny, const Rect& d) {
  Points v(2, static_cast<Index>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Index id = static_cast<Index>(j) * (nx + 1) + i;
      v(0, id) = d.x0 + d.width() * (static_cast<double>(i) / nx);
      v(1, id) = d.y0 + d.height() * (static_cast<double>(j) / ny);
    }
  // Pin the far sides exactly.
  for (int j = 0; j <= ny; ++j) v(0, static_cast<Index>(j) * (nx + 1) + nx) = d.x1;
  for (int i = 0; i <= nx; ++i) v(1, static_cast<Index>(ny) * (nx + 1) + i) = d.y1;
  return v;
}

// Boundary segments of a (stride x stride) vertex grid, counterclockwise.
std::vector<BoundaryEdge> grid_boundary(int n, const Points& v) {
  const Index stride = n + 1;
  auto id = [&](int i, int j) { return static_cast<Index>(j) * stride + i; };
  std::vector<BoundaryEdge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({id(i, 0), id(i + 1, 0), BoundaryTag::Dirichlet});
  for (int j = 0; j < n; ++j) edges.push_back({id(n, j), id(n, j + 1), BoundaryTag::Neumann});
  for (int i = n; i > 0; --i) edges.push_back({id(i, n), id(i - 1, n), BoundaryTag::Neumann});
  for (int j = n; j > 0; --j) edges.push_back({id(0, j), id(0, j - 1), BoundaryTag::Neumann});
  (void)v;
  return edges;
}

void require_positive(int n) {
  if (n < 1) throw MeshError("mesh resolution N must be at least 1, got " + std::to_string(n));
}

}  // namespace

Mesh generate_regular_tri(int n, TriPattern pattern, const Rect& domain) {
  require_positive(n);
  Points v = grid_vertices(n, n, domain);
  Mesh::Connectivity conn(3, 2 * static_cast<Index>(n) * n);
  Index e = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Index a = static_cast<Index>(j) * (n + 1) + i, b = a + 1, c = b + n + 1, d = a + n + 1;
      const bool slash = pattern == TriPattern::slash ||
                         (pattern == TriPattern::union_jack && (i + j) % 2 == 0);
      if (slash) {
        conn.col(e++) << a, b, c;
        conn.col(e++) << a, c, d;
      } else {
        conn.col(e++) << a, b, d;
        conn.col(e++) << b, c, d;
      }
    }
  auto boundary = grid_boundary(n, v);
  return Mesh(ElementKind::T3, std::move(v), std::move(conn), std::move(boundary));
}

Mesh generate_regular_quad(int n, const Rect& domain) {
  require_positive(n);
  Points v = grid_vertices(n, n, domain);
  Mesh::Connectivity conn(4, static_cast<Index>(n) * n);
  Index e = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Index a = static_cast<Index>(j) * (n + 1) + i;
      conn.col(e++) << a, a + 1, a + n + 2, a + n + 1;
    }
  auto boundary = grid_boundary(n, v);
  return Mesh(ElementKind::Q4, std::move(v), std::move(conn), std::move(boundary));
}

Mesh generate_regular_q9(int n, const Rect& domain) {
  require_positive(n);
  const int m = 2 * n;
  Points v = grid_vertices(m, m, domain);
  auto id = [&](int i, int j) { return static_cast<Index>(j) * (m + 1) + i; };
  Mesh::Connectivity conn(9, static_cast<Index>(n) * n);
  Index e = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int x = 2 * i, y = 2 * j;
      conn.col(e++) << id(x, y), id(x + 2, y), id(x + 2, y + 2), id(x, y + 2), id(x + 1, y), id(x + 2, y + 1),
          id(x + 1, y + 2), id(x, y + 1), id(x + 1, y + 1);
    }
  auto boundary = grid_boundary(m, v);
  return Mesh(ElementKind::Q9, std::move(v), std::move(conn), std::move(boundary));
}

// ---------------------------------------------------------------------------

namespace {

// Elements and auxiliary cells touched by moving vertex v must stay valid.
bool locally_valid(const Points& vertices, const Mesh& topo, const std::vector<Index>& incident) {
  const int nc = topo.corners_per_element();
  auto corners = [&](Index e) { return corners_of(vertices, topo.connectivity(), e, nc); };
  for (Index e : incident) {
    const Eigen::Matrix2Xd poly = corners(e);
    if (!(geometry::signed_area(poly) > 0.0)) return false;
    if (nc == 4 && !strictly_convex(poly)) return false;
    for (int k = 0; k < nc; ++k)
      if (!geometry::is_convex_ccw(interior_cell_polygon(poly, k))) return false;
    if (nc == 4)
      for (const auto& tri : elements::q4_subtriangles(poly))
        if (!(geometry::signed_area(tri) > 0.0)) return false;
    for (int k = 0; k < nc; ++k) {
      const Edge& edge = topo.edges()[topo.element_edge(e, k)];
      const Vec2 left = element_reference_point(corners(edge.left));
      Vec2 right;
      if (!edge.on_boundary()) right = element_reference_point(corners(edge.right));
      const Eigen::Matrix2Xd cell = edge_cell_polygon(vertices.col(edge.v0), vertices.col(edge.v1), left,
                                                      edge.on_boundary() ? nullptr : &right);
      if (!geometry::is_convex_ccw(cell) || !(geometry::signed_area(cell) > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

Mesh distort_mesh(const Mesh& mesh, double magnitude, std::uint64_t seed, int max_retries) {
  if (!(magnitude >= 0.0 && magnitude < 0.5))
    throw MeshError("distortion magnitude must lie in [0, 0.5), got " + std::to_string(magnitude));
  if (mesh.kind() == ElementKind::Q9) throw MeshError("distortion is only supported for T3 and Q4 meshes");
  if (magnitude == 0.0) return mesh;

  const int nc = mesh.corners_per_element();
  std::vector<std::vector<Index>> incident(mesh.n_vertices());
  for (Index e = 0; e < mesh.n_elements(); ++e)
    for (int k = 0; k < nc; ++k) incident[mesh.node(e, k)].push_back(e);
  std::vector<double> shortest(mesh.n_vertices(), std::numeric_limits<double>::infinity());
  for (const Edge& edge : mesh.edges()) {
    const double len = (mesh.vertex(edge.v0) - mesh.vertex(edge.v1)).norm();
    shortest[edge.v0] = std::min(shortest[edge.v0], len);
    shortest[edge.v1] = std::min(shortest[edge.v1], len);
  }

  const std::vector<bool> on_boundary = mesh.boundary_vertices();
  std::mt19937_64 rng(seed);
  // 53-bit uniform in [-1, 1), independent of the standard library's distributions.
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };

  Points moved = mesh.vertices();
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    if (on_boundary[v]) continue;
    const Vec2 original = moved.col(v);
    bool accepted = false;
    for (int attempt = 0; attempt < max_retries && !accepted; ++attempt) {
      const double dx = uniform(), dy = uniform();
      moved.col(v) = original + magnitude * shortest[v] * Vec2(dx, dy);
      accepted = locally_valid(moved, mesh, incident[v]);
    }
    if (!accepted)
      throw MeshError("distortion could not place " + vertex_name(v) + " after " + std::to_string(max_retries) +
                      " draws");
  }
  return Mesh(mesh.kind(), std::move(moved), mesh.connectivity(), mesh.boundary_edges());
}

Mesh affine_transform(const Mesh& mesh, const Eigen::Matrix2d& A, const Vec2& b) {
  if (!(A.determinant() > 0.0)) throw MeshError("affine map must preserve orientation");
  Points moved = (A * mesh.vertices()).colwise() + b;
  return Mesh(mesh.kind(), std::move(moved), mesh.connectivity(), mesh.boundary_edges());
}

Mesh retag_boundary(const Mesh& mesh, const std::function<BoundaryTag(const Vec2&, const Vec2&)>& tagger) {
  std::vector<BoundaryEdge> edges = mesh.boundary_edges();
  for (BoundaryEdge& b : edges) b.tag = tagger(mesh.vertex(b.a), mesh.vertex(b.b));
  return Mesh(mesh.kind(), mesh.vertices(), mesh.connectivity(), std::move(edges));
}

Mesh rotate_local_numbering(const Mesh& mesh, int shift) {
  const int nc = mesh.corners_per_element();
  const int s = ((shift % nc) + nc) % nc;
  Mesh::Connectivity conn = mesh.connectivity();
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    for (int k = 0; k < nc; ++k) conn(k, e) = mesh.node(e, (k + s) % nc);
    if (mesh.kind() == ElementKind::Q9)
      for (int k = 0; k < 4; ++k) conn(4 + k, e) = mesh.node(e, 4 + (k + s) % 4);
  }
  return Mesh(mesh.kind(), mesh.vertices(), std::move(conn), mesh.boundary_edges());
}

// ---------------------------------------------------------------------------

PointLocator::PointLocator(const Mesh& mesh) : mesh_(mesh) {
  lo_ = mesh_.vertices().rowwise().minCoeff();
  const Vec2 hi = mesh_.vertices().rowwise().maxCoeff();
  const Vec2 extent = (hi - lo_).cwiseMax(1e-300);
  tol_ = 1e-12 * extent.norm();
  const auto n = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(mesh_.n_elements()))));
  nx_ = ny_ = std::max<Index>(1, n);
  cell_size_ = Vec2(extent.x() / nx_, extent.y() / ny_);
  buckets_.assign(nx_ * ny_, {});
  for (Index e = 0; e < mesh_.n_elements(); ++e) {
    const auto box = geometry::bounding_box(mesh_.element_coords(e));
    const Index i0 = std::clamp<Index>(static_cast<Index>(std::floor((box.lo.x() - tol_ - lo_.x()) / cell_size_.x())), 0, nx_ - 1);
    const Index i1 = std::clamp<Index>(static_cast<Index>(std::floor((box.hi.x() + tol_ - lo_.x()) / cell_size_.x())), 0, nx_ - 1);
    const Index j0 = std::clamp<Index>(static_cast<Index>(std::floor((box.lo.y() - tol_ - lo_.y()) / cell_size_.y())), 0, ny_ - 1);
    const Index j1 = std::clamp<Index>(static_cast<Index>(std::floor((box.hi.y() + tol_ - lo_.y()) / cell_size_.y())), 0, ny_ - 1);
    for (Index j = j0; j <= j1; ++j)
      for (Index i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(e);
  }
}

Index PointLocator::bucket_of(double x, double y) const {
  const Index i = std::clamp<Index>(static_cast<Index>(std::floor((x - lo_.x()) / cell_size_.x())), 0, nx_ - 1);
  const Index j = std::clamp<Index>(static_cast<Index>(std::floor((y - lo_.y()) / cell_size_.y())), 0, ny_ - 1);
  return j * nx_ + i;
}

PointLocation PointLocator::locate(const Vec2& p) const {
  constexpr double natural_tol = 1e-10;
  bool inversion_failed = false;
  for (Index e : buckets_[bucket_of(p.x(), p.y())]) {
    const Eigen::Matrix2Xd xy = mesh_.element_coords(e);
    if (!geometry::bounding_box(xy).contains(p, tol_)) continue;
    if (mesh_.kind() == ElementKind::T3) {
      const Vec3 lambda = geometry::barycentric<double>(xy.col(0), xy.col(1), xy.col(2), p);
      if (lambda.minCoeff() >= -natural_tol) return {e, Vec2(lambda(1), lambda(2))};
      continue;
    }
    const auto inv = elements::inverse_map(mesh_.kind() == ElementKind::Q4 ? xy : xy, p);
    if (!inv.converged) {
      inversion_failed = true;
      continue;
    }
    if (inv.natural.cwiseAbs().maxCoeff() <= 1.0 + natural_tol) return {e, inv.natural};
  }
  if (inversion_failed)
    throw GeometryError("inverse isoparametric map did not converge near point (" + std::to_string(p.x()) + ", " +
                        std::to_string(p.y()) + ")");
  throw MeshError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ") lies outside the mesh");
}

PointLocation locate_point(const Mesh& mesh, const Vec2& p) { return PointLocator(mesh).locate(p); }

}  // namespace smoothfem
