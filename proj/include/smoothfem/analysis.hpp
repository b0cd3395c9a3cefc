#pragma once

// Reference solution, energy-norm errors and projection (discretization)
// errors. All integrals are per-cell quadratures; strains of the reference
// solution are evaluated pointwise through element location.

#include "smoothfem/assembly.hpp"
#include "smoothfem/core.hpp"
#include "smoothfem/mesh.hpp"
#include "smoothfem/problem.hpp"
#include "smoothfem/subdivision.hpp"

#include <memory>
#include <string>
#include <vector>

namespace smoothfem {

/// Points and weights of a quadrature over a set of cells.
struct CellQuadrature {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;
  std::vector<Index> offsets;  // points of cell c: [offsets[c], offsets[c+1])

  [[nodiscard]] Index size() const { return weights.size(); }
  [[nodiscard]] Index n_cells() const { return static_cast<Index>(offsets.size()) - 1; }
};

// Degree-4 rule on a triangle, or on a convex polygon fanned from its vertex
// average. `refine` splits every triangle into 4^refine congruent pieces.
void append_polygon_quadrature(const Eigen::Matrix2Xd& poly, int refine, Eigen::Matrix2Xd& points,
                               Eigen::VectorXd& weights, Index& count);
CellQuadrature subdivision_quadrature(const Subdivision& sub, int refine = 0);

/// Finite element solution of the problem on a regular Q9 mesh.
class ReferenceSolution {
public:
  ReferenceSolution(const Problem& problem, int n_ref);

  [[nodiscard]] const Mesh& mesh() const { return locator_.mesh(); }
  [[nodiscard]] const Eigen::VectorXd& displacement() const { return u_; }
  [[nodiscard]] double relative_residual() const { return residual_; }
  [[nodiscard]] const Mat3& D() const { return D_; }
  [[nodiscard]] int n_ref() const { return n_ref_; }

  [[nodiscard]] Vec3 strain_at(const Vec2& p) const;
  [[nodiscard]] Eigen::Matrix3Xd strain_at(const Eigen::Matrix2Xd& points) const;
  [[nodiscard]] Vec2 displacement_at(const Vec2& p) const;
  // ⫼ε_ref⫼ over the whole domain (3x3 Gauss per element).
  [[nodiscard]] double energy_norm() const;

private:
  PointLocator locator_;
  Eigen::VectorXd u_;
  Mat3 D_;
  double residual_ = 0.0;
  int n_ref_ = 0;
};

std::shared_ptr<const ReferenceSolution> solve_reference(const Problem& problem, int n_ref);

// Energy norm of a piecewise-constant field: (Σ |c| D ε_c : ε_c)^(1/2).
double energy_norm(const Eigen::Matrix3Xd& values, const Eigen::VectorXd& areas, const Mat3& D);
// Energy norm of point values against quadrature weights.
double energy_norm_points(const Eigen::Matrix3Xd& values, const Eigen::VectorXd& weights, const Mat3& D);

/// Quadrature points over a method's native cells together with the sparse
/// map from nodal displacements to the method's strain at those points.
struct ErrorSampling {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;
  RowSparseMatrix G;  // (3 n_points) x n_dofs
};

enum class SseRepresentative { interpolant, projection };

ErrorSampling error_sampling(const Mesh& mesh, Method method, int refine = 0,
                             SseRepresentative sse = SseRepresentative::interpolant);

struct EnergyError {
  double absolute = 0.0;
  double reference = 0.0;
  double relative = 0.0;
};

EnergyError energy_error(const Mesh& mesh, Method method, const Eigen::VectorXd& u, const ReferenceSolution& ref,
                         int refine = 0, SseRepresentative sse = SseRepresentative::interpolant);

enum class ProjectionSpace { W_h, W_1h, W_2h };
std::string_view to_string(ProjectionSpace space);

/// ⫼ε_ref - P ε_ref⫼ where P averages over the cells of the space: elements,
/// edge-based cells or interior cells. Both the averages and the error use
/// the same per-cell quadrature.
double projection_error(const ReferenceSolution& ref, ProjectionSpace space, const Mesh& mesh, int refine = 0);

// Same, for a given subdivision.
double projection_error(const ReferenceSolution& ref, const Subdivision& cells, int refine = 0);

// Least-squares slope of log(error) against log(h).
double convergence_slope(const std::vector<double>& h, const std::vector<double>& error);

// Displacement at p in the method's displacement space.
Vec2 probe_displacement(const Mesh& mesh, Method method, const Eigen::VectorXd& u, const Vec2& p);

struct ErrorReport {
  std::string method;
  std::string mesh_kind;
  int n = 0;
  double h = 0.0;
  double absolute_error = 0.0;
  double reference_energy = 0.0;
  double relative_error = 0.0;
  double probe_error = 0.0;
  Index dofs = 0;
  double seconds = 0.0;
};

}  // namespace smoothfem
