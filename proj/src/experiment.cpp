#include "smoothfem/experiment.hpp"

#include "smoothfem/mesh_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace smoothfem {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  for (char c : text + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) items.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  return items;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value))
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text, std::size_t count) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) values.push_back(parse_double(key, item));
  if (values.size() != count)
    throw ConfigError(key + ": expected " + std::to_string(count) + " numbers, got " +
                      std::to_string(values.size()));
  return values;
}

const std::vector<Method>& all_methods(ElementKind kind) {
  static const std::vector<Method> tri = {Method::fem_t3, Method::nsfem, Method::esfem, Method::sse};
  static const std::vector<Method> quad = {Method::fem_plq4, Method::fem_blq4, Method::csfem, Method::esfem,
                                           Method::sse};
  return kind == ElementKind::T3 ? tri : quad;
}

Mesh sheared(const Mesh& mesh, double shear) {
  if (shear == 0.0) return mesh;
  Eigen::Matrix2d A;
  A << 1.0, shear, 0.0, 1.0;
  return affine_transform(mesh, A, Vec2::Zero());
}

Eigen::VectorXd spectrum(const SparseMatrix& K) {
  const Eigen::MatrixXd dense(K);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double spectrum_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (const auto& item : split_list(text)) values.push_back(static_cast<int>(parse_integer("n", item)));
  return values;
}

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> methods;
  for (const auto& item : split_list(text)) methods.push_back(parse_method(item));
  return methods;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "problem") {
    c.problem = value;
  } else if (key == "domain") {
    const auto v = parse_numbers(key, value, 4);
    c.domain = Rect{v[0], v[1], v[2], v[3]};
  } else if (key == "E") {
    c.E = parse_double(key, value);
  } else if (key == "nu") {
    c.nu = parse_double(key, value);
  } else if (key == "mode") {
    c.mode = parse_plane_mode(value);
  } else if (key == "mesh") {
    try {
      c.mesh_kind = parse_element_kind(value);
    } catch (const Error&) {
      throw ConfigError("mesh: expected tri or quad, got '" + value + "'");
    }
  } else if (key == "pattern") {
    c.pattern = parse_tri_pattern(value);
  } else if (key == "n") {
    c.n = parse_int_list(value);
  } else if (key == "distortion") {
    c.distortion = parse_double(key, value);
  } else if (key == "seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw ConfigError("seed: must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "shear") {
    c.shear = parse_double(key, value);
  } else if (key == "mesh_files") {
    c.mesh_files = split_list(value);
  } else if (key == "methods") {
    c.methods = parse_method_list(value);
  } else if (key == "n_ref") {
    c.n_ref = static_cast<int>(parse_integer(key, value));
  } else if (key == "probe") {
    const auto v = parse_numbers(key, value, 2);
    c.probe = Vec2(v[0], v[1]);
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "refine") {
    c.refine = static_cast<int>(parse_integer(key, value));
  } else if (key == "equivalence_tol") {
    c.equivalence_tol = parse_double(key, value);
  } else if (key == "parallel") {
    c.parallel = parse_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void read_config(std::istream& in, ExperimentConfig& config) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void read_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  read_config(in, config);
}

void ExperimentConfig::validate() const {
  if (problem != "block" && problem != "patch") throw ConfigError("problem: expected block or patch");
  if (!(domain.width() > 0 && domain.height() > 0)) throw ConfigError("domain: empty rectangle");
  if (!(E > 0)) throw ConfigError("E: must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("nu: must lie in [0, 0.5)");
  if (mesh_kind == ElementKind::Q9) throw ConfigError("mesh: expected tri or quad");
  if (mesh_files.empty()) {
    if (n.empty()) throw ConfigError("n: empty list");
    if (n.front() < 1) throw ConfigError("n: entries must be positive");
    for (std::size_t i = 1; i < n.size(); ++i)
      if (n[i] <= n[i - 1]) throw ConfigError("n: list must be strictly increasing");
    if (n_ref <= n.back()) throw ConfigError("n_ref: must exceed the largest entry of n");
  }
  if (n_ref < 1) throw ConfigError("n_ref: must be positive");
  if (!(distortion >= 0.0 && distortion < 0.5)) throw ConfigError("distortion: must lie in [0, 0.5)");
  if (!std::isfinite(shear)) throw ConfigError("shear: must be finite");
  if (refine < 0 || refine > 4) throw ConfigError("refine: must lie in [0, 4]");
  if (!(equivalence_tol > 0)) throw ConfigError("equivalence_tol: must be positive");
  for (Method m : methods)
    if (!method_supports(m, mesh_kind) || m == Method::fem_q9)
      throw ConfigError("methods: " + std::string(to_string(m)) + " does not apply to " +
                        std::string(to_string(mesh_kind)) + " meshes");
  if (probe) {
    const Vec2& p = *probe;
    if (p.x() < domain.x0 || p.x() > domain.x1 || p.y() < domain.y0 || p.y() > domain.y1)
      throw ConfigError("probe: point outside the domain");
  }
}

std::vector<Method> ExperimentConfig::effective_methods() const {
  return methods.empty() ? all_methods(mesh_kind) : methods;
}

Problem make_problem(const ExperimentConfig& config) {
  Problem p = config.problem == "patch" ? default_patch_problem(config.domain)
                                        : block_problem(config.domain, config.E, config.nu, config.mode);
  if (config.problem == "patch") p.material = dmatrix(config.E, config.nu, config.mode);
  if (config.probe) p.probe = *config.probe;
  return p;
}

std::vector<MeshCase> build_meshes(const ExperimentConfig& config, bool with_shear) {
  std::vector<MeshCase> cases;
  if (!config.mesh_files.empty()) {
    for (const auto& path : config.mesh_files) {
      Mesh mesh = read_mesh_file(path);
      if (mesh.kind() != config.mesh_kind)
        throw ConfigError("mesh_files: '" + path + "' holds " + std::string(to_string(mesh.kind())) +
                          " elements, expected " + std::string(to_string(config.mesh_kind)));
      const int ne = static_cast<int>(mesh.n_elements());
      cases.push_back({"file", ne, std::move(mesh)});
    }
  } else {
    auto generate = [&](int n) {
      return config.mesh_kind == ElementKind::T3 ? generate_regular_tri(n, config.pattern, config.domain)
                                                 : generate_regular_quad(n, config.domain);
    };
    for (int n : config.n) cases.push_back({"regular", n, generate(n)});
    if (config.distortion > 0.0)
      for (int n : config.n)
        cases.push_back({"distorted", n, distort_mesh(generate(n), config.distortion, config.seed + n)});
  }
  if (with_shear && config.shear != 0.0)
    for (auto& c : cases) c.mesh = sheared(c.mesh, config.shear);
  return cases;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SMOOTHFEM_THREADS")) {
    const std::string text(env);
    unsigned cap = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec != std::errc() || ptr != text.data() + text.size() || cap == 0)
      throw ConfigError("SMOOTHFEM_THREADS: expected a positive integer, got '" + text + "'");
    n = cap;
  }
  return n;
}

void run_tasks(std::size_t n, bool parallel, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned workers = parallel ? std::min<std::size_t>(worker_count(), n) : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

std::vector<ProjectionRow> projection_errors(const ExperimentConfig& config, const ReferenceSolution& ref) {
  const auto cases = build_meshes(config);
  std::vector<ProjectionRow> rows(cases.size());
  run_tasks(cases.size(), config.parallel, [&](std::size_t i) {
    const auto& c = cases[i];
    ProjectionRow& row = rows[i];
    row.kind = c.mesh.kind();
    row.mesh = c.label;
    row.n = c.n;
    row.elements = c.mesh.n_elements();
    row.w_h = projection_error(ref, ProjectionSpace::W_h, c.mesh, config.refine);
    row.w_1h = projection_error(ref, ProjectionSpace::W_1h, c.mesh, config.refine);
    row.w_2h = projection_error(ref, ProjectionSpace::W_2h, c.mesh, config.refine);
  });
  return rows;
}

void write_projection_csv(std::ostream& out, const std::vector<ProjectionRow>& rows) {
  out << "mesh_kind,mesh,n,elements,W_h,W_1h,W_2h\n";
  for (const auto& r : rows)
    out << to_string(r.kind) << ',' << r.mesh << ',' << r.n << ',' << r.elements << ',' << format_double(r.w_h)
        << ',' << format_double(r.w_1h) << ',' << format_double(r.w_2h) << '\n';
}

std::vector<ConvergenceRow> convergence(const ExperimentConfig& config, const ReferenceSolution& ref) {
  const Problem problem = make_problem(config);
  const auto cases = build_meshes(config);
  const auto methods = config.effective_methods();
  const Vec2 u_ref_probe = ref.displacement_at(problem.probe);

  std::vector<ConvergenceRow> rows(methods.size() * cases.size());
  run_tasks(rows.size(), config.parallel, [&](std::size_t i) {
    const Method method = methods[i / cases.size()];
    const auto& c = cases[i % cases.size()];
    const Solution sol = solve_problem(c.mesh, problem, method);
    const EnergyError err = energy_error(c.mesh, method, sol.u, ref, config.refine);
    const Vec2 u_probe = probe_displacement(c.mesh, method, sol.u, problem.probe);
    ConvergenceRow& row = rows[i];
    row.method = method;
    row.kind = c.mesh.kind();
    row.mesh = c.label;
    row.n = c.n;
    row.h = c.mesh.max_diameter();
    row.dofs = sol.n_free;
    row.energy_error = err.relative;
    const double scale = std::abs(u_ref_probe.x());
    row.probe_error = scale > 0 ? std::abs(u_probe.x() - u_ref_probe.x()) / scale
                                : std::abs(u_probe.x() - u_ref_probe.x());
  });

  // slope over the rows of the same method and mesh label seen so far
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> h, e;
    for (std::size_t j = 0; j <= i; ++j)
      if (rows[j].method == rows[i].method && rows[j].mesh == rows[i].mesh && rows[j].energy_error > 0) {
        h.push_back(rows[j].h);
        e.push_back(rows[j].energy_error);
      }
    if (h.size() >= 3) rows[i].slope = convergence_slope(h, e);
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "method,mesh_kind,mesh,n,h,dofs,energy_error,probe_error,slope\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << to_string(r.kind) << ',' << r.mesh << ',' << r.n << ','
        << format_double(r.h) << ',' << r.dofs << ',' << format_double(r.energy_error) << ','
        << format_double(r.probe_error) << ',';
    if (r.slope) out << format_double(*r.slope);
    out << '\n';
  }
}

void write_convergence_svg(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  constexpr double width = 640, height = 480, left = 70, right = 170, top = 30, bottom = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  double hmin = 1e300, hmax = 0, emin = 1e300, emax = 0;
  for (const auto& r : rows) {
    if (!(r.energy_error > 0)) continue;
    hmin = std::min(hmin, r.h);
    hmax = std::max(hmax, r.h);
    emin = std::min(emin, r.energy_error);
    emax = std::max(emax, r.energy_error);
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" style=\"font-family:sans-serif;font-size:12px;background:#fff\">\n";
  if (hmax <= 0) {
    out << "</svg>\n";
    return;
  }
  const double x0 = std::floor(std::log10(hmin)), x1 = std::ceil(std::log10(hmax) + 1e-12);
  const double y0 = std::floor(std::log10(emin)), y1 = std::ceil(std::log10(emax) + 1e-12);
  const double xs = std::max(x1 - x0, 1.0), ys = std::max(y1 - y0, 1.0);
  auto px = [&](double h) { return left + (std::log10(h) - x0) / xs * (width - left - right); };
  auto py = [&](double e) { return height - bottom - (std::log10(e) - y0) / ys * (height - top - bottom); };

  for (double d = x0; d <= x0 + xs; d += 1) {
    const double x = px(std::pow(10.0, d));
    out << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << height - bottom
        << "\" style=\"stroke:#ccc\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << height - bottom + 16 << "\" style=\"text-anchor:middle\">1e"
        << d << "</text>\n";
  }
  for (double d = y0; d <= y0 + ys; d += 1) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
        << "\" style=\"stroke:#ccc\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" style=\"text-anchor:end\">1e" << d
        << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
      << "\" style=\"text-anchor:middle\">h</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" style=\"text-anchor:middle\">relative energy error</text>\n";

  // slope-1 guide through the largest error
  {
    const double e_start = emax, e_end = emax * hmin / hmax;
    out << "<line x1=\"" << px(hmax) << "\" y1=\"" << py(e_start) << "\" x2=\"" << px(hmin) << "\" y2=\""
        << py(e_end) << "\" style=\"stroke:#000;stroke-dasharray:4 3\"/>\n";
  }

  std::vector<std::pair<std::string, std::string>> series;
  for (const auto& r : rows) {
    const std::string key = method_label(r.method, r.kind) + (r.mesh == "regular" ? "" : " (" + r.mesh + ")");
    if (std::find_if(series.begin(), series.end(), [&](const auto& s) { return s.first == key; }) == series.end())
      series.emplace_back(key, "");
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    std::string points;
    for (const auto& r : rows) {
      const std::string key = method_label(r.method, r.kind) + (r.mesh == "regular" ? "" : " (" + r.mesh + ")");
      if (key != series[s].first || !(r.energy_error > 0)) continue;
      points += format_double(px(r.h)) + "," + format_double(py(r.energy_error)) + " ";
      out << "<circle cx=\"" << px(r.h) << "\" cy=\"" << py(r.energy_error) << "\" r=\"3\" style=\"fill:"
          << color << "\"/>\n";
    }
    out << "<polyline points=\"" << points << "\" style=\"fill:none;stroke:" << color << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
        << "\" y2=\"" << ly << "\" style=\"stroke:" << color << "\"/>\n";
    out << "<text x=\"" << width - right + 35 << "\" y=\"" << ly + 4 << "\">" << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
}

// ---------------------------------------------------------------------------

double equivalence_gap(const Mesh& mesh, const MaterialMatrix& material) {
  const SparseMatrix a = assemble_stiffness(mesh, material, Method::sse, SseRoute::gauss_points).K;
  const SparseMatrix b = assemble_stiffness(mesh, material, Method::sse, SseRoute::projections).K;
  return (a - b).norm() / a.norm();
}

std::vector<EquivalenceRow> equivalence_check(const ExperimentConfig& config) {
  const MaterialMatrix material = dmatrix(config.E, config.nu, config.mode);
  const auto cases = build_meshes(config, true);
  std::vector<EquivalenceRow> rows(cases.size());
  run_tasks(cases.size(), config.parallel, [&](std::size_t i) {
    const auto& c = cases[i];
    rows[i].kind = c.mesh.kind();
    rows[i].mesh = config.shear != 0.0 ? c.label + "+shear" : c.label;
    rows[i].n = c.n;
    rows[i].gap = equivalence_gap(c.mesh, material);
    rows[i].tolerance = config.equivalence_tol;
    rows[i].pass = rows[i].gap <= config.equivalence_tol;
  });
  return rows;
}

void write_equivalence_csv(std::ostream& out, const std::vector<EquivalenceRow>& rows) {
  out << "mesh_kind,mesh,n,gap,tolerance,pass\n";
  for (const auto& r : rows)
    out << to_string(r.kind) << ',' << r.mesh << ',' << r.n << ',' << format_double(r.gap) << ','
        << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------

int rigid_body_modes(const Mesh& mesh, const MaterialMatrix& material, Method method, double rel_tol) {
  const Eigen::VectorXd lambda = spectrum(assemble_stiffness(mesh, material, method).K);
  const double cutoff = rel_tol * lambda.cwiseAbs().maxCoeff();
  return static_cast<int>((lambda.array() < cutoff).count());
}

double renumbering_spectrum_gap(const Mesh& mesh, const MaterialMatrix& material, Method method) {
  const Eigen::VectorXd base = spectrum(assemble_stiffness(mesh, material, method).K);
  double gap = 0.0;
  for (int shift = 1; shift < mesh.corners_per_element(); ++shift) {
    const Mesh rotated = rotate_local_numbering(mesh, shift);
    gap = std::max(gap, spectrum_gap(base, spectrum(assemble_stiffness(rotated, material, method).K)));
  }
  return gap;
}

double rotation_spectrum_gap(const Mesh& mesh, const MaterialMatrix& material, Method method, double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Mesh rotated = affine_transform(mesh, R, Vec2::Zero());
  return spectrum_gap(spectrum(assemble_stiffness(mesh, material, method).K),
                      spectrum(assemble_stiffness(rotated, material, method).K));
}

double patch_test_error(const Mesh& mesh, Method method, SseRoute route) {
  const Problem problem = default_patch_problem();
  const Solution sol = solve_problem(mesh, problem, method, route);
  const Vec3 exact = *problem.exact_strain;

  const ErrorSampling es = error_sampling(mesh, method);
  const Eigen::VectorXd eps = es.G * sol.u;
  double err = 0.0;
  for (Index s = 0; s < es.weights.size(); ++s)
    err = std::max(err, (eps.segment<3>(3 * s) - exact).norm() / exact.norm());

  double u_scale = 0.0, u_err = 0.0;
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 u_exact = problem.exact_displacement(mesh.vertex(v));
    u_scale = std::max(u_scale, u_exact.norm());
    u_err = std::max(u_err, (sol.u.segment<2>(2 * v) - u_exact).norm());
  }
  return std::max(err, u_err / u_scale);
}

std::vector<CheckResult> verify_method(const Mesh& mesh, const std::string& mesh_label, Method method,
                                       const MaterialMatrix& material) {
  const std::string name = method_label(method, mesh.kind());
  std::vector<CheckResult> out;
  const int modes = rigid_body_modes(mesh, material, method);
  out.push_back({name, mesh_label, "rigid_body_modes", double(modes), 3.0, modes == 3});
  const double renumber = renumbering_spectrum_gap(mesh, material, method);
  out.push_back({name, mesh_label, "isotropy_renumbering", renumber, 1e-10, renumber <= 1e-10});
  const double rotation = rotation_spectrum_gap(mesh, material, method, std::numbers::pi / 5);
  out.push_back({name, mesh_label, "isotropy_rotation", rotation, 1e-10, rotation <= 1e-10});
  const double patch = patch_test_error(mesh, method);
  out.push_back({name, mesh_label, "patch_test", patch, 1e-9, patch <= 1e-9});
  return out;
}

std::vector<CheckResult> verification_suite(const ExperimentConfig& config) {
  const MaterialMatrix material = dmatrix(config.E, config.nu, config.mode);
  constexpr int n = 3;
  struct Case {
    std::string label;
    Mesh mesh;
  };
  std::vector<Case> cases;
  for (ElementKind kind : {ElementKind::T3, ElementKind::Q4}) {
    const Mesh regular = kind == ElementKind::T3 ? generate_regular_tri(n, config.pattern, config.domain)
                                                 : generate_regular_quad(n, config.domain);
    cases.push_back({"regular", regular});
    if (config.shear != 0.0) cases.push_back({"sheared", sheared(regular, config.shear)});
    if (config.distortion > 0.0) cases.push_back({"distorted", distort_mesh(regular, config.distortion, config.seed)});
  }

  std::vector<std::pair<std::size_t, Method>> tasks;
  for (std::size_t c = 0; c < cases.size(); ++c)
    for (Method m : all_methods(cases[c].mesh.kind()))
      if (config.methods.empty() ||
          std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end())
        tasks.emplace_back(c, m);

  std::vector<std::vector<CheckResult>> results(tasks.size());
  run_tasks(tasks.size(), config.parallel, [&](std::size_t i) {
    const auto& c = cases[tasks[i].first];
    results[i] = verify_method(c.mesh, std::string(to_string(c.mesh.kind())) + " " + c.label, tasks[i].second,
                               material);
  });
  std::vector<CheckResult> flat;
  for (auto& r : results) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

void write_checks_csv(std::ostream& out, const std::vector<CheckResult>& rows) {
  out << "method,mesh,check,value,tolerance,pass\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.mesh << ',' << r.check << ',' << format_double(r.value) << ','
        << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
}

}  // namespace smoothfem
