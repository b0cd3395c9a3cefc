#include "smoothfem/assembly.hpp"

#include "smoothfem/elements.hpp"
#include "smoothfem/geometry.hpp"
#include "smoothfem/quadrature.hpp"
#include "smoothfem/smoothing.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <map>

namespace smoothfem {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::fem_t3: return "fem_t3";
    case Method::fem_plq4: return "fem_plq4";
    case Method::fem_blq4: return "fem_blq4";
    case Method::esfem: return "esfem";
    case Method::nsfem: return "nsfem";
    case Method::csfem: return "csfem";
    case Method::sse: return "sse";
    case Method::fem_q9: return "fem_q9";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::fem_t3, Method::fem_plq4, Method::fem_blq4, Method::esfem, Method::nsfem, Method::csfem,
                   Method::sse, Method::fem_q9})
    if (text == to_string(m)) return m;
  throw ConfigError("unknown method '" + std::string(text) +
                    "' (expected fem_t3, fem_plq4, fem_blq4, esfem, nsfem, csfem or sse)");
}

bool method_supports(Method method, ElementKind kind) {
  switch (method) {
    case Method::fem_t3:
    case Method::nsfem: return kind == ElementKind::T3;
    case Method::fem_plq4:
    case Method::fem_blq4:
    case Method::csfem: return kind == ElementKind::Q4;
    case Method::esfem:
    case Method::sse: return kind == ElementKind::T3 || kind == ElementKind::Q4;
    case Method::fem_q9: return kind == ElementKind::Q9;
  }
  return false;
}

void require_supported(Method method, ElementKind kind) {
  if (!method_supports(method, kind))
    throw MethodError("method " + std::string(to_string(method)) + " does not apply to " +
                      std::string(to_string(kind)) + " meshes");
}

DisplacementSpace displacement_space(Method method, ElementKind kind) {
  require_supported(method, kind);
  if (kind == ElementKind::T3) return DisplacementSpace::linear_triangle;
  if (kind == ElementKind::Q9) return DisplacementSpace::biquadratic_quad;
  return (method == Method::fem_blq4 || method == Method::csfem) ? DisplacementSpace::bilinear_quad
                                                                 : DisplacementSpace::piecewise_linear_quad;
}

std::string method_label(Method method, ElementKind kind) {
  const std::string suffix = kind == ElementKind::T3 ? " T3" : " Q4";
  switch (method) {
    case Method::fem_t3: return "FEM T3";
    case Method::fem_plq4: return "FEM PL-Q4";
    case Method::fem_blq4: return "FEM BL-Q4";
    case Method::esfem: return "ES-FEM" + suffix;
    case Method::nsfem: return "NS-FEM T3";
    case Method::csfem: return "CS-FEM Q4";
    case Method::sse: return "SSE" + suffix;
    case Method::fem_q9: return "FEM Q9";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXi element_dof_indices(const Mesh& mesh, Index e) {
  const int n = mesh.nodes_per_element();
  Eigen::VectorXi dofs(2 * n);
  for (int k = 0; k < n; ++k) {
    dofs(2 * k) = static_cast<int>(2 * mesh.node(e, k));
    dofs(2 * k + 1) = static_cast<int>(2 * mesh.node(e, k) + 1);
  }
  return dofs;
}

// Appends one sample with local operator B acting on the element's dofs.
void push_sample(std::vector<Triplet>& triplets, Index sample, const Eigen::MatrixXd& B,
                 const Eigen::VectorXi& dofs) {
  for (Index c = 0; c < 3; ++c)
    for (Index j = 0; j < B.cols(); ++j)
      if (B(c, j) != 0.0) triplets.emplace_back(3 * sample + c, dofs(j), B(c, j));
}

StrainSampling finish_sampling(std::vector<Triplet>& triplets, Eigen::VectorXd weights, Index n_dofs) {
  StrainSampling s;
  s.G.resize(3 * weights.size(), n_dofs);
  s.G.setFromTriplets(triplets.begin(), triplets.end());
  s.G.makeCompressed();
  s.weights = std::move(weights);
  return s;
}

StrainSampling per_element_maps(const Mesh& mesh, const std::function<elements::ElementStrainMap(Index)>& map_of,
                                int cells_per_element) {
  std::vector<Triplet> triplets;
  Eigen::VectorXd weights(mesh.n_elements() * cells_per_element);
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto map = map_of(e);
    const Eigen::VectorXi dofs = element_dof_indices(mesh, e);
    for (int k = 0; k < cells_per_element; ++k) {
      push_sample(triplets, e * cells_per_element + k, map.B[k], dofs);
      weights(e * cells_per_element + k) = map.areas(k);
    }
  }
  return finish_sampling(triplets, std::move(weights), mesh.n_dofs());
}

StrainSampling apply_scalar(const RowSparseMatrix& op, const StrainSampling& source, Eigen::VectorXd weights) {
  StrainSampling s;
  s.G = (expand_voigt(op) * source.G).pruned();
  s.G.makeCompressed();
  s.weights = std::move(weights);
  return s;
}

StrainSampling q9_sampling(const Mesh& mesh) {
  const QuadratureRule rule = quadrature(QuadratureKind::quad3x3);
  std::vector<Triplet> triplets;
  Eigen::VectorXd weights(mesh.n_elements() * rule.size());
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Matrix<double, 2, 9> xy = mesh.element_coords(e);
    const Eigen::VectorXi dofs = element_dof_indices(mesh, e);
    for (Index q = 0; q < rule.size(); ++q) {
      const auto iso = elements::q9_strain_matrix(xy, rule.points(0, q), rule.points(1, q));
      push_sample(triplets, e * rule.size() + q, iso.B, dofs);
      weights(e * rule.size() + q) = rule.weights(q) * iso.det_j;
    }
  }
  return finish_sampling(triplets, std::move(weights), mesh.n_dofs());
}

}  // namespace

RowSparseMatrix expand_voigt(const RowSparseMatrix& scalar_op) {
  std::vector<Triplet> triplets;
  triplets.reserve(3 * scalar_op.nonZeros());
  for (Index r = 0; r < scalar_op.outerSize(); ++r)
    for (RowSparseMatrix::InnerIterator it(scalar_op, r); it; ++it)
      for (Index c = 0; c < 3; ++c) triplets.emplace_back(3 * r + c, 3 * it.col() + c, it.value());
  RowSparseMatrix out(3 * scalar_op.rows(), 3 * scalar_op.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SubdivisionPtr compatible_subdivision(const Mesh& mesh) {
  if (mesh.kind() == ElementKind::T3) return std::make_shared<const Subdivision>(build_elementwise_subdivision(mesh));
  if (mesh.kind() == ElementKind::Q4) return std::make_shared<const Subdivision>(build_quad_subtriangles(mesh));
  throw MethodError("piecewise-constant compatible strain needs a T3 or Q4 mesh");
}

StrainSampling compatible_sampling(const Mesh& mesh) {
  if (mesh.kind() == ElementKind::T3)
    return per_element_maps(mesh, [&](Index e) { return elements::t3_strain_map(mesh.element_corners(e)); }, 1);
  if (mesh.kind() == ElementKind::Q4)
    return per_element_maps(mesh, [&](Index e) { return elements::q4pl_strain_map(mesh.element_corners(e)); }, 4);
  throw MethodError("piecewise-constant compatible strain needs a T3 or Q4 mesh");
}

StrainSampling method_sampling(const Mesh& mesh, Method method, SseRoute route) {
  require_supported(method, mesh.kind());
  switch (method) {
    case Method::fem_t3:
    case Method::fem_plq4: return compatible_sampling(mesh);
    case Method::fem_blq4:
      return per_element_maps(mesh, [&](Index e) { return elements::q4bl_gauss_map(mesh.element_corners(e)); }, 4);
    case Method::csfem:
      return per_element_maps(mesh, [&](Index e) { return elements::q4cs_strain_map(mesh.element_corners(e)); }, 4);
    case Method::fem_q9: return q9_sampling(mesh);
    case Method::esfem: {
      const SubdivisionPtr source = compatible_subdivision(mesh);
      auto edges = std::make_shared<const Subdivision>(build_edge_subdivision(mesh));
      const SmoothingOperator p1 = build_projection(source, edges);
      return apply_scalar(p1.weights, compatible_sampling(mesh), edges->areas);
    }
    case Method::nsfem: {
      const SubdivisionPtr source = compatible_subdivision(mesh);
      auto nodes = std::make_shared<const Subdivision>(build_node_subdivision(mesh));
      const SmoothingOperator pn = build_node_projection(mesh, source, nodes);
      return apply_scalar(pn.weights, compatible_sampling(mesh), nodes->areas);
    }
    case Method::sse: {
      const SubdivisionPtr source = compatible_subdivision(mesh);
      if (route == SseRoute::projections) {
        auto edges = std::make_shared<const Subdivision>(build_edge_subdivision(mesh));
        auto interior = std::make_shared<const Subdivision>(build_interior_subdivision(mesh));
        const SmoothingOperator p21 =
            compose(build_projection(edges, interior), build_projection(source, edges));
        return apply_scalar(p21.weights, compatible_sampling(mesh), interior->areas);
      }
      const RowSparseMatrix S = sse_operator(mesh, source->areas);
      const int n = mesh.corners_per_element();
      Eigen::VectorXd weights(mesh.n_elements() * n);
      const Eigen::Matrix2Xd gauss = sse_gauss_points(mesh.kind());
      for (Index e = 0; e < mesh.n_elements(); ++e) {
        if (mesh.kind() == ElementKind::T3) {
          weights.segment(3 * e, 3).setConstant(mesh.element_area(e) / 3.0);
        } else {
          const Eigen::Matrix<double, 2, 4> xy = mesh.element_corners(e);
          for (int k = 0; k < 4; ++k)
            weights(4 * e + k) = elements::q4bl_strain_matrix(xy, gauss(0, k), gauss(1, k)).det_j;
        }
      }
      return apply_scalar(S, compatible_sampling(mesh), std::move(weights));
    }
  }
  throw MethodError("unhandled method");
}

// ---------------------------------------------------------------------------

SparseMatrix assemble_from_sampling(const StrainSampling& sampling, const Mat3& D, Index n_dofs) {
  if (sampling.G.cols() != n_dofs || sampling.G.rows() != 3 * sampling.size())
    throw MethodError("strain sampling does not match the dof count");
  std::vector<Triplet> triplets;
  std::vector<Index> cols;
  for (Index s = 0; s < sampling.size(); ++s) {
    cols.clear();
    for (Index c = 0; c < 3; ++c)
      for (RowSparseMatrix::InnerIterator it(sampling.G, 3 * s + c); it; ++it) cols.push_back(it.col());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, static_cast<Index>(cols.size()));
    for (Index c = 0; c < 3; ++c)
      for (RowSparseMatrix::InnerIterator it(sampling.G, 3 * s + c); it; ++it)
        B(c, std::lower_bound(cols.begin(), cols.end(), it.col()) - cols.begin()) = it.value();
    Eigen::MatrixXd Ks = B.transpose() * (sampling.weights(s) * D) * B;
    Ks = 0.5 * (Ks + Ks.transpose()).eval();
    for (Index i = 0; i < Ks.rows(); ++i)
      for (Index j = 0; j < Ks.cols(); ++j) triplets.emplace_back(cols[i], cols[j], Ks(i, j));
  }
  SparseMatrix K(n_dofs, n_dofs);
  K.setFromTriplets(triplets.begin(), triplets.end());
  K.makeCompressed();
  return K;
}

LinearSystem assemble_stiffness(const Mesh& mesh, const MaterialMatrix& material, Method method, SseRoute route) {
  LinearSystem system;
  system.method = method;
  system.K = assemble_from_sampling(method_sampling(mesh, method, route), material.D, mesh.n_dofs());
  system.F = Eigen::VectorXd::Zero(mesh.n_dofs());
  return system;
}

// ---------------------------------------------------------------------------

namespace {

// Adds Σ_q w_q N_a(x_q) f(x_q) over a triangle with shape values given by
// `shape(λ)` (a row per element node).
template <class ShapeFn>
void integrate_triangle(const Eigen::Matrix<double, 2, 3>& tri, const VectorField& f, ShapeFn shape,
                        const Eigen::VectorXi& nodes, Eigen::VectorXd& F) {
  static const QuadratureRule rule = quadrature(QuadratureKind::tri_deg4);
  const double twice_area = 2.0 * geometry::signed_area(tri);
  for (Index q = 0; q < rule.size(); ++q) {
    const Vec3 lambda(1.0 - rule.points(0, q) - rule.points(1, q), rule.points(0, q), rule.points(1, q));
    const Vec2 x = tri * lambda;
    const Vec2 fx = f(x);
    const Eigen::VectorXd N = shape(lambda);
    const double w = rule.weights(q) * twice_area;
    for (Index a = 0; a < N.size(); ++a) F.segment<2>(2 * nodes(a)) += w * N(a) * fx;
  }
}

}  // namespace

Eigen::VectorXd assemble_load(const Mesh& mesh, const Problem& problem, Method method) {
  const DisplacementSpace space = displacement_space(method, mesh.kind());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.n_dofs());
  const int n = mesh.nodes_per_element();

  if (problem.body_force) {
    for (Index e = 0; e < mesh.n_elements(); ++e) {
      Eigen::VectorXi nodes(n);
      for (int k = 0; k < n; ++k) nodes(k) = static_cast<int>(mesh.node(e, k));
      switch (space) {
        case DisplacementSpace::linear_triangle:
          integrate_triangle(mesh.element_corners(e), problem.body_force, [](const Vec3& l) -> Eigen::VectorXd { return l; },
                             nodes, F);
          break;
        case DisplacementSpace::piecewise_linear_quad: {
          const auto tris = elements::q4_subtriangles(mesh.element_corners(e));
          for (int k = 0; k < 4; ++k) {
            const int a = k, b = (k + 1) % 4;
            integrate_triangle(tris[k], problem.body_force,
                               [a, b](const Vec3& l) -> Eigen::VectorXd {
                                 Eigen::Vector4d N = Eigen::Vector4d::Constant(0.25 * l(2));
                                 N(a) += l(0);
                                 N(b) += l(1);
                                 return N;
                               },
                               nodes, F);
          }
          break;
        }
        case DisplacementSpace::bilinear_quad:
        case DisplacementSpace::biquadratic_quad: {
          static const QuadratureRule rule = quadrature(QuadratureKind::quad3x3);
          const Eigen::Matrix2Xd xy = mesh.element_coords(e);
          for (Index q = 0; q < rule.size(); ++q) {
            const double r = rule.points(0, q), s = rule.points(1, q);
            Eigen::RowVectorXd N;
            Eigen::Matrix2Xd grads;
            if (n == 4) {
              const auto b = elements::q4_shape(r, s);
              N = b.values;
              grads = b.grads;
            } else {
              const auto b = elements::q9_shape(r, s);
              N = b.values;
              grads = b.grads;
            }
            const double det = (xy * grads.transpose()).determinant();
            const Vec2 x = xy * N.transpose();
            const Vec2 fx = problem.body_force(x);
            const double w = rule.weights(q) * det;
            for (int a = 0; a < n; ++a) F.segment<2>(2 * nodes(a)) += w * N(a) * fx;
          }
          break;
        }
      }
    }
  }

  if (problem.traction) {
    std::map<std::pair<Index, Index>, BoundaryTag> tags;
    for (const BoundaryEdge& b : mesh.boundary_edges()) tags[{std::min(b.a, b.b), std::max(b.a, b.b)}] = b.tag;
    auto tag_of = [&](Index a, Index b) { return tags.at({std::min(a, b), std::max(a, b)}); };
    const QuadratureRule line = gauss_legendre(3);
    for (const Edge& edge : mesh.edges()) {
      if (!edge.on_boundary()) continue;
      if (mesh.kind() == ElementKind::Q9) {
        const Index mid = mesh.node(edge.left, 4 + edge.left_local);
        if (tag_of(edge.v0, mid) != BoundaryTag::Neumann || tag_of(mid, edge.v1) != BoundaryTag::Neumann) continue;
        const Vec2 p0 = mesh.vertex(edge.v0), pm = mesh.vertex(mid), p1 = mesh.vertex(edge.v1);
        for (Index q = 0; q < line.size(); ++q) {
          const double t = line.points(0, q);
          const Eigen::Vector3d N(0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0));
          const Eigen::Vector3d dN(t - 0.5, -2.0 * t, t + 0.5);
          const Vec2 x = N(0) * p0 + N(1) * pm + N(2) * p1;
          const double jac = (dN(0) * p0 + dN(1) * pm + dN(2) * p1).norm();
          const Vec2 tx = problem.traction(x);
          const Index ids[3] = {edge.v0, mid, edge.v1};
          for (int a = 0; a < 3; ++a) F.segment<2>(2 * ids[a]) += line.weights(q) * jac * N(a) * tx;
        }
        continue;
      }
      if (tag_of(edge.v0, edge.v1) != BoundaryTag::Neumann) continue;
      const Vec2 p0 = mesh.vertex(edge.v0), p1 = mesh.vertex(edge.v1);
      const double half_length = 0.5 * (p1 - p0).norm();
      for (Index q = 0; q < line.size(); ++q) {
        const double t = 0.5 * (line.points(0, q) + 1.0);
        const Vec2 tx = problem.traction(p0 + t * (p1 - p0));
        F.segment<2>(2 * edge.v0) += line.weights(q) * half_length * (1.0 - t) * tx;
        F.segment<2>(2 * edge.v1) += line.weights(q) * half_length * t * tx;
      }
    }
  }
  return F;
}

// ---------------------------------------------------------------------------

DofMap make_dofmap(const Mesh& mesh) {
  DofMap map;
  const std::vector<bool> dirichlet = mesh.dirichlet_vertices();
  map.constrained.assign(mesh.n_dofs(), false);
  map.free_index.assign(mesh.n_dofs(), -1);
  for (Index v = 0; v < mesh.n_vertices(); ++v)
    if (dirichlet[v]) map.constrained[2 * v] = map.constrained[2 * v + 1] = true;
  for (Index d = 0; d < mesh.n_dofs(); ++d)
    if (!map.constrained[d]) {
      map.free_index[d] = map.n_free();
      map.free_dofs.push_back(d);
    }
  return map;
}

ReducedSystem apply_dirichlet(const LinearSystem& system, const DofMap& dofs, const Eigen::VectorXd& prescribed) {
  if (system.K.rows() != dofs.n_dofs() || prescribed.size() != dofs.n_dofs())
    throw SolverError("system and dof map sizes disagree");
  ReducedSystem reduced;
  reduced.prescribed = prescribed;
  for (Index d = 0; d < dofs.n_dofs(); ++d)
    if (!dofs.constrained[d]) reduced.prescribed(d) = 0.0;
  // Lifting: F_f - K_fc g_c.
  const Eigen::VectorXd lifted = system.F - system.K * reduced.prescribed;
  std::vector<Triplet> triplets;
  for (Index col = 0; col < system.K.outerSize(); ++col) {
    const Index fc = dofs.free_index[col];
    if (fc < 0) continue;
    for (SparseMatrix::InnerIterator it(system.K, col); it; ++it) {
      const Index fr = dofs.free_index[it.row()];
      if (fr >= 0) triplets.emplace_back(fr, fc, it.value());
    }
  }
  reduced.K.resize(dofs.n_free(), dofs.n_free());
  reduced.K.setFromTriplets(triplets.begin(), triplets.end());
  reduced.K.makeCompressed();
  reduced.F.resize(dofs.n_free());
  for (Index i = 0; i < dofs.n_free(); ++i) reduced.F(i) = lifted(dofs.free_dofs[i]);
  return reduced;
}

SolveReport solve(const SparseMatrix& K, const Eigen::VectorXd& F, double residual_tol) {
  SolveReport report;
  if (K.rows() == 0) {
    report.x = Eigen::VectorXd::Zero(0);
    return report;
  }
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  ldlt.compute(K);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed");
  const Eigen::VectorXd pivots = ldlt.vectorD();
  report.min_pivot = pivots.minCoeff();
  const double scale = pivots.cwiseAbs().maxCoeff();
  if (!(report.min_pivot > 1e-14 * scale))
    throw SolverError("stiffness matrix is not positive definite (smallest pivot " + std::to_string(report.min_pivot) +
                      ", largest " + std::to_string(scale) + ")");
  report.x = ldlt.solve(F);
  const double fnorm = F.norm();
  report.relative_residual = fnorm > 0.0 ? (K * report.x - F).norm() / fnorm : (K * report.x).norm();
  if (!(report.relative_residual <= residual_tol))
    throw SolverError("relative residual " + std::to_string(report.relative_residual) + " exceeds tolerance");
  return report;
}

Mesh tag_for_problem(const Mesh& mesh, const Problem& problem) {
  if (!problem.clamp_entire_boundary) return mesh;
  return retag_boundary(mesh, [](const Vec2&, const Vec2&) { return BoundaryTag::Dirichlet; });
}

Eigen::VectorXd prescribed_values(const Mesh& mesh, const Problem& problem) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.n_dofs());
  if (!problem.prescribed) return g;
  const std::vector<bool> dirichlet = mesh.dirichlet_vertices();
  for (Index v = 0; v < mesh.n_vertices(); ++v)
    if (dirichlet[v]) g.segment<2>(2 * v) = problem.prescribed(mesh.vertex(v));
  return g;
}

Solution solve_problem(const Mesh& input, const Problem& problem, Method method, SseRoute route) {
  const Mesh mesh = tag_for_problem(input, problem);
  LinearSystem system = assemble_stiffness(mesh, problem.material, method, route);
  system.F = assemble_load(mesh, problem, method);
  const DofMap dofs = make_dofmap(mesh);
  const ReducedSystem reduced = apply_dirichlet(system, dofs, prescribed_values(mesh, problem));
  const SolveReport report = solve(reduced.K, reduced.F);
  Solution sol;
  sol.method = method;
  sol.u = reduced.prescribed;
  for (Index i = 0; i < dofs.n_free(); ++i) sol.u(dofs.free_dofs[i]) = report.x(i);
  sol.n_free = dofs.n_free();
  sol.relative_residual = report.relative_residual;
  return sol;
}

}  // namespace smoothfem
