#pragma once

// Experiment drivers behind the command-line tool: configuration, mesh
// sweeps, projection-error tables, convergence runs, the stiffness
// equivalence check and the element verification suite.

#include "smoothfem/analysis.hpp"
#include "smoothfem/assembly.hpp"
#include "smoothfem/mesh.hpp"
#include "smoothfem/problem.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smoothfem {

struct ExperimentConfig {
  std::string problem = "block";  // block | patch
  Rect domain;
  double E = 1e3;
  double nu = 0.2;
  PlaneMode mode = PlaneMode::plane_stress;
  ElementKind mesh_kind = ElementKind::T3;
  TriPattern pattern = TriPattern::slash;
  std::vector<int> n = {2, 4, 8, 16};
  double distortion = 0.0;  // 0 keeps only the regular meshes
  std::uint64_t seed = 1;
  double shear = 0.0;  // x += shear * y; equivalence-check and verify only
  std::vector<std::string> mesh_files;
  std::vector<Method> methods;  // empty: every method of the mesh kind
  int n_ref = 64;
  std::optional<Vec2> probe;
  std::string out_dir = ".";
  int refine = 0;
  double equivalence_tol = 1e-10;
  bool parallel = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
  [[nodiscard]] std::vector<Method> effective_methods() const;
};

// Sets one `key = value` entry; unknown keys are errors.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
// Reads `key = value` lines ('#' starts a comment) into `config`.
void read_config(std::istream& in, ExperimentConfig& config);
void read_config_file(const std::string& path, ExperimentConfig& config);

std::vector<int> parse_int_list(const std::string& text);
std::vector<Method> parse_method_list(const std::string& text);

Problem make_problem(const ExperimentConfig& config);

struct MeshCase {
  std::string label;  // regular | distorted | file
  int n = 0;          // N for generated meshes, element count for files
  Mesh mesh;
};

// Regular meshes for every N, then distorted copies when distortion > 0; or
// the mesh files when given. Shear is applied when `with_shear` is set.
std::vector<MeshCase> build_meshes(const ExperimentConfig& config, bool with_shear = false);

// Shortest round-trip decimal.
std::string format_double(double value);

// Worker count for parallel runs: SMOOTHFEM_THREADS if set, else hardware.
unsigned worker_count();
// Runs task(i) for i in [0, n), on worker threads when `parallel` is set.
// Exceptions are rethrown in index order.
void run_tasks(std::size_t n, bool parallel, const std::function<void(std::size_t)>& task);

// --- projection errors -------------------------------------------------------

struct ProjectionRow {
  ElementKind kind = ElementKind::T3;
  std::string mesh;
  int n = 0;
  Index elements = 0;
  double w_h = 0.0;
  double w_1h = 0.0;
  double w_2h = 0.0;
};

std::vector<ProjectionRow> projection_errors(const ExperimentConfig& config, const ReferenceSolution& ref);
void write_projection_csv(std::ostream& out, const std::vector<ProjectionRow>& rows);

// --- convergence ---------------------------------------------------------------

struct ConvergenceRow {
  Method method = Method::fem_t3;
  ElementKind kind = ElementKind::T3;
  std::string mesh;
  int n = 0;
  double h = 0.0;
  Index dofs = 0;
  double energy_error = 0.0;  // relative
  double probe_error = 0.0;   // relative error of the horizontal displacement at the probe
  std::optional<double> slope;  // slope of energy_error over the rows so far (3 or more)
};

std::vector<ConvergenceRow> convergence(const ExperimentConfig& config, const ReferenceSolution& ref);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
// Log-log chart of energy_error against h with a slope-1 guide line.
void write_convergence_svg(std::ostream& out, const std::vector<ConvergenceRow>& rows);

// --- equivalence -----------------------------------------------------------------

// ||K_gauss - K_proj||_F / ||K_gauss||_F for the SSE stiffness routes.
double equivalence_gap(const Mesh& mesh, const MaterialMatrix& material);

struct EquivalenceRow {
  ElementKind kind = ElementKind::T3;
  std::string mesh;
  int n = 0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<EquivalenceRow> equivalence_check(const ExperimentConfig& config);
void write_equivalence_csv(std::ostream& out, const std::vector<EquivalenceRow>& rows);

// --- verification ------------------------------------------------------------------

// Number of eigenvalues of the unconstrained stiffness below rel_tol * max.
int rigid_body_modes(const Mesh& mesh, const MaterialMatrix& material, Method method, double rel_tol = 1e-10);
// Largest relative change of the stiffness spectrum over all local node
// renumberings.
double renumbering_spectrum_gap(const Mesh& mesh, const MaterialMatrix& material, Method method);
// Relative change of the stiffness spectrum when the mesh is rotated rigidly.
double rotation_spectrum_gap(const Mesh& mesh, const MaterialMatrix& material, Method method, double angle);
// Linear field imposed on the whole boundary: max relative error of the
// strain at the error-sampling points and of the nodal displacements.
double patch_test_error(const Mesh& mesh, Method method, SseRoute route = SseRoute::gauss_points);

struct CheckResult {
  std::string method;
  std::string mesh;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<CheckResult> verify_method(const Mesh& mesh, const std::string& mesh_label, Method method,
                                       const MaterialMatrix& material);
// Every requested method on small regular meshes of both kinds, plus the
// distorted and sheared variants the config asks for.
std::vector<CheckResult> verification_suite(const ExperimentConfig& config);
void write_checks_csv(std::ostream& out, const std::vector<CheckResult>& rows);

}  // namespace smoothfem
