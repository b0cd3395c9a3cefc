#include "smoothfem/analysis.hpp"

#include "smoothfem/elements.hpp"
#include "smoothfem/geometry.hpp"
#include "smoothfem/quadrature.hpp"
#include "smoothfem/smoothing.hpp"

#include <cmath>

namespace smoothfem {

namespace {

void append_triangle(const Vec2& a, const Vec2& b, const Vec2& c, int refine, Eigen::Matrix2Xd& points,
                     Eigen::VectorXd& weights, Index& count) {
  if (refine > 0) {
    const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    append_triangle(a, ab, ca, refine - 1, points, weights, count);
    append_triangle(ab, b, bc, refine - 1, points, weights, count);
    append_triangle(ca, bc, c, refine - 1, points, weights, count);
    append_triangle(bc, ca, ab, refine - 1, points, weights, count);
    return;
  }
  static const QuadratureRule rule = quadrature(QuadratureKind::tri_deg4);
  const double twice_area = geometry::orient<double>(a, b, c);
  if (count + rule.size() > points.cols()) {
    const Index grow = std::max<Index>(2 * points.cols(), count + rule.size());
    points.conservativeResize(2, grow);
    weights.conservativeResize(grow);
  }
  for (Index q = 0; q < rule.size(); ++q) {
    const double l1 = rule.points(0, q), l2 = rule.points(1, q);
    points.col(count) = (1.0 - l1 - l2) * a + l1 * b + l2 * c;
    weights(count) = rule.weights(q) * twice_area;
    ++count;
  }
}

struct NaturalPoint {
  Index element;
  Vec2 rs;
  double weight;  // includes det J
  Vec2 x;
};

// 3x3 Gauss on each natural quadrant of every quadrilateral, quadrant k at corner k.
std::vector<NaturalPoint> quadrant_points(const Mesh& mesh) {
  static constexpr double cr[4] = {-1, 1, 1, -1};
  static constexpr double cs[4] = {-1, -1, 1, 1};
  const QuadratureRule rule = quadrature(QuadratureKind::quad3x3);
  std::vector<NaturalPoint> out;
  out.reserve(mesh.n_elements() * 4 * rule.size());
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Matrix2Xd xy = mesh.element_coords(e);
    for (int k = 0; k < 4; ++k) {
      const Vec2 mid(0.5 * cr[k], 0.5 * cs[k]);
      for (Index q = 0; q < rule.size(); ++q) {
        const Vec2 rs = mid + 0.5 * rule.points.col(q);
        Eigen::Matrix2Xd grads;
        Eigen::RowVectorXd N;
        if (xy.cols() == 4) {
          const auto b = elements::q4_shape(rs.x(), rs.y());
          grads = b.grads;
          N = b.values;
        } else {
          const auto b = elements::q9_shape(rs.x(), rs.y());
          grads = b.grads;
          N = b.values;
        }
        const double det = (xy * grads.transpose()).determinant();
        out.push_back({e, rs, 0.25 * rule.weights(q) * det, xy * N.transpose()});
      }
    }
  }
  return out;
}

// Quadrature over the cells of `sub`, with each point mapped to sample `sample_of(cell)`.
ErrorSampling constant_per_cell(const Subdivision& sub, const StrainSampling& method, int refine,
                                const std::function<Index(Index)>& sample_of) {
  const CellQuadrature quad = subdivision_quadrature(sub, refine);
  std::vector<Triplet> triplets;
  triplets.reserve(quad.size());
  for (Index c = 0; c < quad.n_cells(); ++c)
    for (Index q = quad.offsets[c]; q < quad.offsets[c + 1]; ++q) triplets.emplace_back(q, sample_of(c), 1.0);
  RowSparseMatrix Q(quad.size(), method.size());
  Q.setFromTriplets(triplets.begin(), triplets.end());
  ErrorSampling s;
  s.points = quad.points;
  s.weights = quad.weights;
  s.G = expand_voigt(Q) * method.G;
  return s;
}

}  // namespace

void append_polygon_quadrature(const Eigen::Matrix2Xd& poly, int refine, Eigen::Matrix2Xd& points,
                               Eigen::VectorXd& weights, Index& count) {
  if (poly.cols() < 3) throw GeometryError("quadrature needs a polygon with at least 3 vertices");
  if (refine < 0) throw ConfigError("quadrature refinement must be nonnegative");
  if (poly.cols() == 3) {
    append_triangle(poly.col(0), poly.col(1), poly.col(2), refine, points, weights, count);
    return;
  }
  const Vec2 center = poly.rowwise().mean();
  for (Index i = 0; i < poly.cols(); ++i)
    append_triangle(poly.col(i), poly.col((i + 1) % poly.cols()), center, refine, points, weights, count);
}

CellQuadrature subdivision_quadrature(const Subdivision& sub, int refine) {
  CellQuadrature quad;
  Index count = 0;
  quad.points.resize(2, 24 * sub.size());
  quad.weights.resize(24 * sub.size());
  quad.offsets.reserve(sub.size() + 1);
  for (Index c = 0; c < sub.size(); ++c) {
    quad.offsets.push_back(count);
    append_polygon_quadrature(sub.cells[c], refine, quad.points, quad.weights, count);
  }
  quad.offsets.push_back(count);
  quad.points.conservativeResize(2, count);
  quad.weights.conservativeResize(count);
  return quad;
}

// ---------------------------------------------------------------------------

namespace {

Mesh reference_mesh(const Problem& problem, int n_ref) {
  if (n_ref < 2) throw ConfigError("reference resolution must be at least 2, got " + std::to_string(n_ref));
  return tag_for_problem(generate_regular_q9(n_ref, problem.domain), problem);
}

}  // namespace

ReferenceSolution::ReferenceSolution(const Problem& problem, int n_ref)
    : locator_(reference_mesh(problem, n_ref)), D_(problem.material.D), n_ref_(n_ref) {
  const Solution sol = solve_problem(locator_.mesh(), problem, Method::fem_q9);
  u_ = sol.u;
  residual_ = sol.relative_residual;
}

Vec3 ReferenceSolution::strain_at(const Vec2& p) const {
  const PointLocation loc = locator_.locate(p);
  const Mesh& m = mesh();
  const Eigen::Matrix<double, 2, 9> xy = m.element_coords(loc.element);
  const auto iso = elements::q9_strain_matrix(xy, loc.natural.x(), loc.natural.y());
  Eigen::Matrix<double, 18, 1> ue;
  for (int k = 0; k < 9; ++k) ue.segment<2>(2 * k) = u_.segment<2>(2 * m.node(loc.element, k));
  return iso.B * ue;
}

Eigen::Matrix3Xd ReferenceSolution::strain_at(const Eigen::Matrix2Xd& points) const {
  Eigen::Matrix3Xd out(3, points.cols());
  for (Index i = 0; i < points.cols(); ++i) out.col(i) = strain_at(Vec2(points.col(i)));
  return out;
}

Vec2 ReferenceSolution::displacement_at(const Vec2& p) const {
  return probe_displacement(mesh(), Method::fem_q9, u_, p);
}

double ReferenceSolution::energy_norm() const {
  const StrainSampling s = method_sampling(mesh(), Method::fem_q9);
  const Eigen::VectorXd strains = s.G * u_;
  double sum = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const Vec3 e = strains.segment<3>(3 * i);
    sum += s.weights(i) * e.dot(D_ * e);
  }
  return std::sqrt(sum);
}

std::shared_ptr<const ReferenceSolution> solve_reference(const Problem& problem, int n_ref) {
  return std::make_shared<const ReferenceSolution>(problem, n_ref);
}

double energy_norm(const Eigen::Matrix3Xd& values, const Eigen::VectorXd& areas, const Mat3& D) {
  return energy_norm_points(values, areas, D);
}

double energy_norm_points(const Eigen::Matrix3Xd& values, const Eigen::VectorXd& weights, const Mat3& D) {
  if (values.cols() != weights.size()) throw GeometryError("energy norm: values and weights disagree in size");
  double sum = 0.0;
  for (Index i = 0; i < values.cols(); ++i) sum += weights(i) * values.col(i).dot(D * values.col(i));
  return std::sqrt(std::max(sum, 0.0));
}

// ---------------------------------------------------------------------------

ErrorSampling error_sampling(const Mesh& mesh, Method method, int refine, SseRepresentative sse) {
  require_supported(method, mesh.kind());
  switch (method) {
    case Method::fem_t3:
    case Method::fem_plq4: {
      const SubdivisionPtr source = compatible_subdivision(mesh);
      return constant_per_cell(*source, compatible_sampling(mesh), refine, [](Index c) { return c; });
    }
    case Method::esfem: {
      const Subdivision edges = build_edge_subdivision(mesh);
      return constant_per_cell(edges, method_sampling(mesh, method), refine, [](Index c) { return c; });
    }
    case Method::csfem: {
      const Subdivision cells = build_interior_subdivision(mesh);
      return constant_per_cell(cells, method_sampling(mesh, method), refine, [](Index c) { return c; });
    }
    case Method::nsfem: {
      const Subdivision pieces = build_interior_subdivision(mesh);
      const Subdivision nodes = build_node_subdivision(mesh);
      std::vector<Index> cell_of(mesh.n_vertices(), -1);
      for (Index c = 0; c < nodes.size(); ++c) cell_of[nodes.parents[c].vertex] = c;
      return constant_per_cell(pieces, method_sampling(mesh, method), refine,
                               [&](Index c) { return cell_of[pieces.parents[c].vertex]; });
    }
    case Method::sse: {
      if (sse == SseRepresentative::projection) {
        const Subdivision interior = build_interior_subdivision(mesh);
        return constant_per_cell(interior, method_sampling(mesh, method, SseRoute::projections), refine,
                                 [](Index c) { return c; });
      }
      const StrainSampling gauss = method_sampling(mesh, method, SseRoute::gauss_points);
      const int ng = mesh.corners_per_element();
      std::vector<Triplet> triplets;
      ErrorSampling out;
      if (mesh.kind() == ElementKind::T3) {
        const Subdivision interior = build_interior_subdivision(mesh);
        const CellQuadrature quad = subdivision_quadrature(interior, refine);
        for (Index c = 0; c < quad.n_cells(); ++c) {
          const Index e = interior.parents[c].element;
          const Eigen::Matrix2Xd xy = mesh.element_corners(e);
          for (Index q = quad.offsets[c]; q < quad.offsets[c + 1]; ++q) {
            const Vec3 l = geometry::barycentric<double>(xy.col(0), xy.col(1), xy.col(2), quad.points.col(q));
            const Eigen::VectorXd w = sse_interpolation_weights(ElementKind::T3, Vec2(l(1), l(2)));
            for (int k = 0; k < ng; ++k) triplets.emplace_back(q, e * ng + k, w(k));
          }
        }
        out.points = quad.points;
        out.weights = quad.weights;
      } else {
        if (refine != 0) throw ConfigError("quadrature refinement is not available for SSE Q4");
        const auto pts = quadrant_points(mesh);
        out.points.resize(2, static_cast<Index>(pts.size()));
        out.weights.resize(static_cast<Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const auto q = static_cast<Index>(i);
          out.points.col(q) = pts[i].x;
          out.weights(q) = pts[i].weight;
          const Eigen::VectorXd w = sse_interpolation_weights(ElementKind::Q4, pts[i].rs);
          for (int k = 0; k < ng; ++k) triplets.emplace_back(q, pts[i].element * ng + k, w(k));
        }
      }
      RowSparseMatrix Q(out.weights.size(), gauss.size());
      Q.setFromTriplets(triplets.begin(), triplets.end());
      out.G = expand_voigt(Q) * gauss.G;
      return out;
    }
    case Method::fem_blq4:
    case Method::fem_q9: {
      if (refine != 0) throw ConfigError("quadrature refinement is not available for isoparametric elements");
      const auto pts = quadrant_points(mesh);
      ErrorSampling out;
      out.points.resize(2, static_cast<Index>(pts.size()));
      out.weights.resize(static_cast<Index>(pts.size()));
      std::vector<Triplet> triplets;
      const int n = mesh.nodes_per_element();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto q = static_cast<Index>(i);
        out.points.col(q) = pts[i].x;
        out.weights(q) = pts[i].weight;
        const Eigen::Matrix2Xd xy = mesh.element_coords(pts[i].element);
        const auto iso = n == 4 ? elements::q4bl_strain_matrix(xy, pts[i].rs.x(), pts[i].rs.y())
                                : elements::q9_strain_matrix(xy, pts[i].rs.x(), pts[i].rs.y());
        for (int a = 0; a < n; ++a) {
          const Index node = mesh.node(pts[i].element, a);
          for (Index c = 0; c < 3; ++c)
            for (int d = 0; d < 2; ++d)
              if (iso.B(c, 2 * a + d) != 0.0) triplets.emplace_back(3 * q + c, 2 * node + d, iso.B(c, 2 * a + d));
        }
      }
      out.G.resize(3 * out.weights.size(), mesh.n_dofs());
      out.G.setFromTriplets(triplets.begin(), triplets.end());
      return out;
    }
  }
  throw MethodError("unhandled method");
}

EnergyError energy_error(const Mesh& input, Method method, const Eigen::VectorXd& u, const ReferenceSolution& ref,
                         int refine, SseRepresentative sse) {
  const ErrorSampling s = error_sampling(input, method, refine, sse);
  const Eigen::VectorXd strains = s.G * u;
  const Eigen::Matrix3Xd reference = ref.strain_at(s.points);
  Eigen::Matrix3Xd diff = Eigen::Map<const Eigen::Matrix3Xd>(strains.data(), 3, s.weights.size()) - reference;
  EnergyError err;
  err.absolute = energy_norm_points(diff, s.weights, ref.D());
  err.reference = ref.energy_norm();
  err.relative = err.reference > 0.0 ? err.absolute / err.reference : err.absolute;
  return err;
}

std::string_view to_string(ProjectionSpace space) {
  switch (space) {
    case ProjectionSpace::W_h: return "W_h";
    case ProjectionSpace::W_1h: return "W_1h";
    case ProjectionSpace::W_2h: return "W_2h";
  }
  return "?";
}

double projection_error(const ReferenceSolution& ref, const Subdivision& cells, int refine) {
  const CellQuadrature quad = subdivision_quadrature(cells, refine);
  const Eigen::Matrix3Xd values = ref.strain_at(quad.points);
  Eigen::Matrix3Xd diff(3, quad.size());
  for (Index c = 0; c < quad.n_cells(); ++c) {
    const Index begin = quad.offsets[c], n = quad.offsets[c + 1] - begin;
    const Vec3 average = values.middleCols(begin, n) * quad.weights.segment(begin, n) / quad.weights.segment(begin, n).sum();
    diff.middleCols(begin, n) = values.middleCols(begin, n).colwise() - average;
  }
  return energy_norm_points(diff, quad.weights, ref.D());
}

double projection_error(const ReferenceSolution& ref, ProjectionSpace space, const Mesh& mesh, int refine) {
  switch (space) {
    case ProjectionSpace::W_h: return projection_error(ref, build_elementwise_subdivision(mesh), refine);
    case ProjectionSpace::W_1h: return projection_error(ref, build_edge_subdivision(mesh), refine);
    case ProjectionSpace::W_2h: return projection_error(ref, build_interior_subdivision(mesh), refine);
  }
  throw ConfigError("unknown projection space");
}

double convergence_slope(const std::vector<double>& h, const std::vector<double>& error) {
  if (h.size() != error.size()) throw ConfigError("convergence data: h and error lists differ in length");
  if (h.size() < 3) throw ConfigError("convergence slope needs at least 3 points");
  Eigen::MatrixXd A(h.size(), 2);
  Eigen::VectorXd b(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) throw ConfigError("mesh size must be positive");
    if (!(error[i] > 0.0)) throw ConfigError("error values must be positive for a log-log fit");
    A(static_cast<Index>(i), 0) = 1.0;
    A(static_cast<Index>(i), 1) = std::log(h[i]);
    b(static_cast<Index>(i)) = std::log(error[i]);
  }
  return A.colPivHouseholderQr().solve(b)(1);
}

Vec2 probe_displacement(const Mesh& mesh, Method method, const Eigen::VectorXd& u, const Vec2& p) {
  if (u.size() != mesh.n_dofs()) throw GeometryError("displacement vector does not match the mesh");
  const DisplacementSpace space = displacement_space(method, mesh.kind());
  const PointLocation loc = locate_point(mesh, p);
  const Index e = loc.element;
  auto nodal = [&](int k) -> Vec2 { return u.segment<2>(2 * mesh.node(e, k)); };
  switch (space) {
    case DisplacementSpace::linear_triangle: {
      const double l1 = loc.natural.x(), l2 = loc.natural.y();
      return (1.0 - l1 - l2) * nodal(0) + l1 * nodal(1) + l2 * nodal(2);
    }
    case DisplacementSpace::piecewise_linear_quad: {
      const auto tris = elements::q4_subtriangles(mesh.element_corners(e));
      const Vec2 center_u = 0.25 * (nodal(0) + nodal(1) + nodal(2) + nodal(3));
      int best = 0;
      Vec3 best_l = Vec3::Constant(-1.0);
      for (int k = 0; k < 4; ++k) {
        const Vec3 l = geometry::barycentric<double>(tris[k].col(0), tris[k].col(1), tris[k].col(2), p);
        if (l.minCoeff() > best_l.minCoeff()) {
          best = k;
          best_l = l;
        }
      }
      return best_l(0) * nodal(best) + best_l(1) * nodal((best + 1) % 4) + best_l(2) * center_u;
    }
    case DisplacementSpace::bilinear_quad: {
      const auto N = elements::q4_shape(loc.natural.x(), loc.natural.y()).values;
      Vec2 out = Vec2::Zero();
      for (int k = 0; k < 4; ++k) out += N(k) * nodal(k);
      return out;
    }
    case DisplacementSpace::biquadratic_quad: {
      const auto N = elements::q9_shape(loc.natural.x(), loc.natural.y()).values;
      Vec2 out = Vec2::Zero();
      for (int k = 0; k < 9; ++k) out += N(k) * nodal(k);
      return out;
    }
  }
  throw MethodError("unhandled displacement space");
}

}  // namespace smoothfem
