#include "smoothfem/smoothing.hpp"

#include "smoothfem/elements.hpp"
#include "smoothfem/geometry.hpp"

#include <cmath>

namespace smoothfem {

StrainField::StrainField(SubdivisionPtr sub, Eigen::Matrix3Xd v) : subdivision(std::move(sub)), values(std::move(v)) {
  if (!subdivision) throw GeometryError("strain field without a subdivision");
  if (values.cols() != subdivision->size())
    throw GeometryError("strain field has " + std::to_string(values.cols()) + " values for " +
                        std::to_string(subdivision->size()) + " cells");
  if (!values.allFinite()) throw GeometryError("strain field has non-finite entries");
}

SmoothingOperator build_projection(SubdivisionPtr source, SubdivisionPtr target, const OverlapTable& overlaps) {
  if (overlaps.rows() != source->size() || overlaps.cols() != target->size())
    throw GeometryError("overlap table does not match the subdivisions");
  std::vector<Triplet> triplets;
  triplets.reserve(overlaps.areas.nonZeros());
  for (Index s = 0; s < overlaps.areas.outerSize(); ++s)
    for (RowSparseMatrix::InnerIterator it(overlaps.areas, s); it; ++it)
      triplets.emplace_back(it.col(), s, it.value() / target->areas(it.col()));
  SmoothingOperator op{std::move(source), std::move(target), {}};
  op.weights.resize(op.target->size(), op.source->size());
  op.weights.setFromTriplets(triplets.begin(), triplets.end());
  op.weights.makeCompressed();
  return op;
}

SmoothingOperator build_projection(SubdivisionPtr source, SubdivisionPtr target) {
  const OverlapTable overlaps = compute_overlaps(*source, *target);
  return build_projection(std::move(source), std::move(target), overlaps);
}

StrainField apply_projection(const SmoothingOperator& op, const StrainField& field) {
  if (field.subdivision != op.source &&
      (field.size() != op.source->size() || field.subdivision->kind != op.source->kind))
    throw GeometryError("field does not live on the operator's source subdivision");
  Eigen::Matrix3Xd out = (op.weights * field.values.transpose()).transpose();
  return StrainField(op.target, std::move(out));
}

SmoothingOperator compose(const SmoothingOperator& second, const SmoothingOperator& first) {
  if (second.source->size() != first.target->size()) throw GeometryError("operators cannot be composed");
  SmoothingOperator op{first.source, second.target, {}};
  op.weights = (second.weights * first.weights).pruned();
  return op;
}

double l2_inner(const StrainField& a, const StrainField& b) {
  if (a.size() != b.size()) throw GeometryError("inner product of fields on different subdivisions");
  return (a.values.cwiseProduct(b.values).colwise().sum().transpose().array() * a.subdivision->areas.array()).sum();
}

double l2_inner(const StrainField& a, const StrainField& b, const OverlapTable& overlaps) {
  if (overlaps.rows() != a.size() || overlaps.cols() != b.size())
    throw GeometryError("overlap table does not match the fields");
  double sum = 0.0;
  for (Index i = 0; i < overlaps.areas.outerSize(); ++i)
    for (RowSparseMatrix::InnerIterator it(overlaps.areas, i); it; ++it)
      sum += it.value() * a.values.col(i).dot(b.values.col(it.col()));
  return sum;
}

StrainField transform(const Eigen::Matrix3d& A, const StrainField& field) {
  return StrainField(field.subdivision, A * field.values);
}

SmoothingOperator build_node_projection(const Mesh& mesh, SubdivisionPtr elementwise, SubdivisionPtr nodes) {
  if (mesh.kind() != ElementKind::T3) throw MethodError("node-based smoothing needs a T3 mesh");
  // Node cells come in ascending vertex order, skipping unused vertices.
  std::vector<Index> cell_of(mesh.n_vertices(), -1);
  for (Index c = 0; c < nodes->size(); ++c) cell_of[nodes->parents[c].vertex] = c;
  std::vector<Triplet> triplets;
  for (Index e = 0; e < mesh.n_elements(); ++e)
    for (int k = 0; k < 3; ++k) {
      const Index c = cell_of[mesh.node(e, k)];
      triplets.emplace_back(c, e, mesh.element_area(e) / 3.0 / nodes->areas(c));
    }
  SmoothingOperator op{std::move(elementwise), std::move(nodes), {}};
  op.weights.resize(op.target->size(), op.source->size());
  op.weights.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

// ---------------------------------------------------------------------------

namespace {

int gauss_count(ElementKind kind) {
  if (kind == ElementKind::T3) return 3;
  if (kind == ElementKind::Q4) return 4;
  throw MethodError("SSE is defined for T3 and Q4 elements only");
}

// Rows: Gauss points; columns: monomials (λ0, λ1, λ2) or (1, r, s, rs).
Eigen::MatrixXd basis_row(ElementKind kind, const Vec2& natural) {
  if (kind == ElementKind::T3) {
    Eigen::RowVector3d row(1.0 - natural.x() - natural.y(), natural.x(), natural.y());
    return row;
  }
  Eigen::RowVector4d row(1.0, natural.x(), natural.y(), natural.x() * natural.y());
  return row;
}

const Eigen::MatrixXd& vandermonde_inverse(ElementKind kind) {
  static const Eigen::MatrixXd t3 = [] {
    const Eigen::Matrix2Xd pts = sse_gauss_points(ElementKind::T3);
    Eigen::MatrixXd V(3, 3);
    for (Index k = 0; k < 3; ++k) V.row(k) = basis_row(ElementKind::T3, pts.col(k));
    return Eigen::MatrixXd(V.inverse());
  }();
  static const Eigen::MatrixXd q4 = [] {
    const Eigen::Matrix2Xd pts = sse_gauss_points(ElementKind::Q4);
    Eigen::MatrixXd V(4, 4);
    for (Index k = 0; k < 4; ++k) V.row(k) = basis_row(ElementKind::Q4, pts.col(k));
    return Eigen::MatrixXd(V.inverse());
  }();
  return kind == ElementKind::T3 ? t3 : q4;
}

// Weights of ε̂^(k) over the source cells.
std::vector<std::pair<Index, double>> intermediate_weights(const Mesh& mesh, const Eigen::VectorXd& cell_areas,
                                                           Index element, int k) {
  const Index own = sse_source_cell(mesh.kind(), element, k);
  const Edge& edge = mesh.edges()[mesh.element_edge(element, k)];
  if (edge.on_boundary()) return {{own, 1.0}};
  const bool is_left = edge.left == element;
  const Index other_element = is_left ? edge.right : edge.left;
  const int other_local = is_left ? edge.right_local : edge.left_local;
  const Index other = sse_source_cell(mesh.kind(), other_element, other_local);
  const double a = cell_areas(own), b = cell_areas(other);
  return {{own, a / (a + b)}, {other, b / (a + b)}};
}

Eigen::Vector2d gauss_pair_weights(ElementKind kind, const Eigen::VectorXd& sub_areas, int k) {
  if (kind == ElementKind::T3) return {0.5, 0.5};
  const double a = sub_areas((k + 3) % 4), b = sub_areas(k);
  return {a / (a + b), b / (a + b)};
}

void check_source(const Mesh& mesh, const Eigen::VectorXd& cell_areas) {
  gauss_count(mesh.kind());
  const Index expected = mesh.kind() == ElementKind::T3 ? mesh.n_elements() : 4 * mesh.n_elements();
  if (cell_areas.size() != expected)
    throw GeometryError("SSE source field needs " + std::to_string(expected) + " cells, got " +
                        std::to_string(cell_areas.size()));
}

Eigen::VectorXd subtriangle_areas_of(const Mesh& mesh, const Eigen::VectorXd& cell_areas, Index element) {
  if (mesh.kind() != ElementKind::Q4) return {};
  return cell_areas.segment(4 * element, 4);
}

}  // namespace

Eigen::Matrix2Xd sse_gauss_points(ElementKind kind) {
  if (kind == ElementKind::T3) {
    Eigen::Matrix2Xd pts(2, 3);
    // (λ1, λ2) of points with λ_k = 2/3.
    pts << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0,
           1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0;
    return pts;
  }
  if (kind == ElementKind::Q4) {
    const double a = 1.0 / std::sqrt(3.0);
    Eigen::Matrix2Xd pts(2, 4);
    pts << -a, a, a, -a,
           -a, -a, a, a;
    return pts;
  }
  throw MethodError("SSE is defined for T3 and Q4 elements only");
}

Eigen::VectorXd sse_interpolation_weights(ElementKind kind, const Vec2& natural) {
  gauss_count(kind);
  return (basis_row(kind, natural) * vandermonde_inverse(kind)).transpose();
}

Vec3 SseElementField::evaluate(const Vec2& natural) const {
  return coeffs * basis_row(kind, natural).transpose();
}

Index sse_source_cell(ElementKind kind, Index element, int local) {
  return kind == ElementKind::T3 ? element : 4 * element + local;
}

std::vector<Vec3> sse_intermediate_strains(const Mesh& mesh, const Eigen::Matrix3Xd& field,
                                           const Eigen::VectorXd& cell_areas, Index element) {
  check_source(mesh, cell_areas);
  if (field.cols() != cell_areas.size()) throw GeometryError("field and cell areas disagree in size");
  if (element < 0 || element >= mesh.n_elements())
    throw MeshError("element index " + std::to_string(element) + " out of range");
  const int n = mesh.corners_per_element();
  std::vector<Vec3> out(n, Vec3::Zero());
  for (int k = 0; k < n; ++k)
    for (const auto& [cell, w] : intermediate_weights(mesh, cell_areas, element, k)) out[k] += w * field.col(cell);
  return out;
}

SseElementField sse_gauss_assignment(ElementKind kind, const std::vector<Vec3>& intermediate,
                                     const Eigen::VectorXd& subtriangle_areas) {
  const int n = gauss_count(kind);
  if (static_cast<int>(intermediate.size()) != n)
    throw GeometryError("SSE needs " + std::to_string(n) + " intermediate strains");
  if (kind == ElementKind::Q4 && subtriangle_areas.size() != 4)
    throw GeometryError("SSE Q4 Gauss assignment needs the four subtriangle areas");
  SseElementField field;
  field.kind = kind;
  field.gauss.resize(3, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d w = gauss_pair_weights(kind, subtriangle_areas, k);
    field.gauss.col(k) = w(0) * intermediate[(k + n - 1) % n] + w(1) * intermediate[k];
  }
  field.coeffs = field.gauss * vandermonde_inverse(kind).transpose();
  return field;
}

std::vector<SseElementField> sse_smooth(const Mesh& mesh, const Eigen::Matrix3Xd& field,
                                        const Eigen::VectorXd& cell_areas) {
  std::vector<SseElementField> out;
  out.reserve(mesh.n_elements());
  for (Index e = 0; e < mesh.n_elements(); ++e)
    out.push_back(sse_gauss_assignment(mesh.kind(), sse_intermediate_strains(mesh, field, cell_areas, e),
                                       subtriangle_areas_of(mesh, cell_areas, e)));
  return out;
}

RowSparseMatrix sse_operator(const Mesh& mesh, const Eigen::VectorXd& cell_areas) {
  check_source(mesh, cell_areas);
  const int n = mesh.corners_per_element();
  std::vector<Triplet> triplets;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::VectorXd sub = subtriangle_areas_of(mesh, cell_areas, e);
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d w = gauss_pair_weights(mesh.kind(), sub, k);
      const Index row = e * n + k;
      for (const auto& [cell, a] : intermediate_weights(mesh, cell_areas, e, (k + n - 1) % n))
        triplets.emplace_back(row, cell, w(0) * a);
      for (const auto& [cell, a] : intermediate_weights(mesh, cell_areas, e, k))
        triplets.emplace_back(row, cell, w(1) * a);
    }
  }
  RowSparseMatrix S(mesh.n_elements() * n, cell_areas.size());
  S.setFromTriplets(triplets.begin(), triplets.end());
  return S;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd element_dofs(const Mesh& mesh, const Eigen::VectorXd& u, Index e) {
  const int n = mesh.nodes_per_element();
  Eigen::VectorXd ue(2 * n);
  for (int k = 0; k < n; ++k) ue.segment<2>(2 * k) = u.segment<2>(2 * mesh.node(e, k));
  return ue;
}

void check_displacement(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.n_dofs())
    throw GeometryError("displacement has " + std::to_string(u.size()) + " entries, mesh has " +
                        std::to_string(mesh.n_dofs()) + " dofs");
}

}  // namespace

StrainField compatible_field(const Mesh& mesh, const Eigen::VectorXd& u) {
  check_displacement(mesh, u);
  if (mesh.kind() == ElementKind::T3) {
    auto sub = std::make_shared<const Subdivision>(build_elementwise_subdivision(mesh));
    Eigen::Matrix3Xd values(3, mesh.n_elements());
    for (Index e = 0; e < mesh.n_elements(); ++e)
      values.col(e) = elements::t3_strain_matrix(mesh.element_corners(e)) * element_dofs(mesh, u, e);
    return StrainField(std::move(sub), std::move(values));
  }
  if (mesh.kind() == ElementKind::Q4) {
    auto sub = std::make_shared<const Subdivision>(build_quad_subtriangles(mesh));
    Eigen::Matrix3Xd values(3, 4 * mesh.n_elements());
    for (Index e = 0; e < mesh.n_elements(); ++e) {
      const auto map = elements::q4pl_strain_map(mesh.element_corners(e));
      const Eigen::VectorXd ue = element_dofs(mesh, u, e);
      for (int k = 0; k < 4; ++k) values.col(4 * e + k) = map.B[k] * ue;
    }
    return StrainField(std::move(sub), std::move(values));
  }
  throw MethodError("compatible piecewise-constant strain needs a T3 or Q4 mesh");
}

StrainField esfem_field(const Mesh& mesh, const Eigen::VectorXd& u) {
  const StrainField strain = compatible_field(mesh, u);
  auto edges = std::make_shared<const Subdivision>(build_edge_subdivision(mesh));
  return apply_projection(build_projection(strain.subdivision, edges), strain);
}

StrainField nsfem_field(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.kind() != ElementKind::T3) throw MethodError("NS-FEM needs a T3 mesh");
  const StrainField strain = compatible_field(mesh, u);
  auto nodes = std::make_shared<const Subdivision>(build_node_subdivision(mesh));
  return apply_projection(build_node_projection(mesh, strain.subdivision, nodes), strain);
}

StrainField csfem_field(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.kind() != ElementKind::Q4) throw MethodError("CS-FEM needs a Q4 mesh");
  check_displacement(mesh, u);
  auto cells = std::make_shared<const Subdivision>(build_interior_subdivision(mesh));
  Eigen::Matrix3Xd values(3, 4 * mesh.n_elements());
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto map = elements::q4cs_strain_map(mesh.element_corners(e));
    const Eigen::VectorXd ue = element_dofs(mesh, u, e);
    for (int k = 0; k < 4; ++k) values.col(4 * e + k) = map.B[k] * ue;
  }
  return StrainField(std::move(cells), std::move(values));
}

DualFields sse_dual_fields(const Mesh& mesh, const Eigen::Matrix3d& D, const Eigen::VectorXd& u) {
  DualFields f;
  f.strain = compatible_field(mesh, u);
  auto edges = std::make_shared<const Subdivision>(build_edge_subdivision(mesh));
  auto interior = std::make_shared<const Subdivision>(build_interior_subdivision(mesh));
  const SmoothingOperator p1 = build_projection(f.strain.subdivision, edges);
  const SmoothingOperator p2 = build_projection(edges, interior);
  const SmoothingOperator p1_back = build_projection(interior, edges);
  f.strain1 = apply_projection(p1, f.strain);
  f.strain2 = apply_projection(p2, f.strain1);
  f.stress2 = transform(D, f.strain2);
  f.stress1 = apply_projection(p1_back, f.stress2);
  return f;
}

}  // namespace smoothfem
