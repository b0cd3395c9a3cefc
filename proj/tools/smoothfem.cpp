// Command-line driver: smoothfem <command> [flags]
//
//   projection-errors   W_h, W_1h, W_2h projection errors per mesh
//   convergence         energy-norm and probe errors per method and mesh
//   equivalence-check   SSE stiffness: Gauss-point route vs twice-projected route
//   verify              rigid-body, isotropy and patch tests
//   mesh export|import  write generated meshes / validate mesh files

#include "smoothfem/experiment.hpp"
#include "smoothfem/mesh_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace smoothfem;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string methods;
  std::string n;
  std::optional<long long> seed;
  std::string pattern;
  std::vector<std::string> settings;
  std::vector<std::string> files;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--method", f.methods, "comma-separated methods");
  cmd->add_option("--n", f.n, "comma-separated mesh sizes N");
  cmd->add_option("--seed", f.seed, "distortion seed");
  cmd->add_option("--pattern", f.pattern, "slash | backslash | union_jack");
  cmd->add_option("--set", f.settings, "extra key=value override (repeatable)");
}

ExperimentConfig load_config(const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) read_config_file(f.config, c);
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.methods.empty()) c.methods = parse_method_list(f.methods);
  if (!f.n.empty()) c.n = parse_int_list(f.n);
  if (f.seed) apply_setting(c, "seed", std::to_string(*f.seed));
  if (!f.pattern.empty()) c.pattern = parse_tri_pattern(f.pattern);
  c.validate();
  return c;
}

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw ConfigError("out: cannot create directory '" + c.out_dir + "': " + ec.message());
  const fs::path path = fs::path(c.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("out: cannot write '" + path.string() + "'");
  return out;
}

std::shared_ptr<const ReferenceSolution> reference_for(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  auto ref = solve_reference(make_problem(c), c.n_ref);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "reference: " << c.n_ref << "x" << c.n_ref << " Q9, energy norm " << ref->energy_norm() << " ("
            << std::fixed << std::setprecision(2) << seconds << " s)\n"
            << std::defaultfloat << std::setprecision(6);
  return ref;
}

int cmd_projection_errors(const ExperimentConfig& c) {
  if (c.shear != 0.0) throw ConfigError("shear: only used by equivalence-check and verify");
  const auto ref = reference_for(c);
  const auto rows = projection_errors(c, *ref);
  auto out = open_output(c, "projection_errors.csv");
  write_projection_csv(out, rows);
  std::cout << std::left << std::setw(6) << "kind" << std::setw(11) << "mesh" << std::setw(6) << "N"
            << std::setw(14) << "W_h" << std::setw(14) << "W_1h" << "W_2h\n";
  for (const auto& r : rows)
    std::cout << std::setw(6) << to_string(r.kind) << std::setw(11) << r.mesh << std::setw(6) << r.n
              << std::setw(14) << r.w_h << std::setw(14) << r.w_1h << r.w_2h << '\n';
  return 0;
}

int cmd_convergence(const ExperimentConfig& c) {
  if (c.shear != 0.0) throw ConfigError("shear: only used by equivalence-check and verify");
  if (c.mesh_files.empty() && c.n.size() < 2) throw ConfigError("n: convergence needs at least two mesh sizes");
  const auto ref = reference_for(c);
  const auto rows = convergence(c, *ref);
  {
    auto out = open_output(c, "convergence.csv");
    write_convergence_csv(out, rows);
  }
  {
    auto out = open_output(c, "convergence.svg");
    write_convergence_svg(out, rows);
  }
  std::cout << std::left << std::setw(14) << "method" << std::setw(11) << "mesh" << std::setw(6) << "N"
            << std::setw(14) << "E_e" << std::setw(14) << "probe" << "slope\n";
  for (const auto& r : rows) {
    std::cout << std::setw(14) << method_label(r.method, r.kind) << std::setw(11) << r.mesh << std::setw(6) << r.n
              << std::setw(14) << r.energy_error << std::setw(14) << r.probe_error;
    if (r.slope) std::cout << *r.slope;
    std::cout << '\n';
  }
  return 0;
}

int cmd_equivalence(const ExperimentConfig& c) {
  const auto rows = equivalence_check(c);
  auto out = open_output(c, "equivalence.csv");
  write_equivalence_csv(out, rows);
  int failed = 0;
  for (const auto& r : rows) {
    std::cout << to_string(r.kind) << ' ' << r.mesh << " N=" << r.n << " gap " << r.gap << ' '
              << (r.pass ? "pass" : "FAIL") << '\n';
    failed += r.pass ? 0 : 1;
  }
  if (failed > 0)
    throw Error("check", std::to_string(failed) + " of " + std::to_string(rows.size()) +
                             " meshes exceed equivalence_tol " + format_double(c.equivalence_tol));
  return 0;
}

int cmd_verify(const ExperimentConfig& c) {
  const auto rows = verification_suite(c);
  auto out = open_output(c, "verify.csv");
  write_checks_csv(out, rows);
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.pass) {
      std::cout << "FAIL " << r.method << " on " << r.mesh << ": " << r.check << " = " << r.value
                << " (tolerance " << r.tolerance << ")\n";
      ++failed;
    }
  }
  std::cout << rows.size() - failed << " of " << rows.size() << " checks passed\n";
  if (failed > 0) throw Error("check", std::to_string(failed) + " verification checks failed");
  return 0;
}

int cmd_mesh_export(const ExperimentConfig& c) {
  for (const auto& mc : build_meshes(c)) {
    const std::string name = std::string(to_string(mc.mesh.kind())) + "_" + mc.label + "_" + std::to_string(mc.n) +
                             ".mesh";
    auto out = open_output(c, name);
    write_mesh(out, mc.mesh);
    std::cout << (fs::path(c.out_dir) / name).string() << '\n';
  }
  return 0;
}

int cmd_mesh_import(const std::vector<std::string>& files) {
  if (files.empty()) throw ConfigError("--file: at least one mesh file is required");
  for (const auto& path : files) {
    const Mesh mesh = read_mesh_file(path);
    int dirichlet = 0;
    for (const auto& b : mesh.boundary_edges()) dirichlet += b.tag == BoundaryTag::Dirichlet ? 1 : 0;
    std::cout << path << ": " << to_string(mesh.kind()) << ", " << mesh.n_vertices() << " vertices, "
              << mesh.n_elements() << " elements, " << mesh.boundary_edges().size() << " boundary edges ("
              << dirichlet << " Dirichlet), area " << mesh.total_area() << ", h " << mesh.max_diameter() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strain-smoothed finite elements: reproduction driver"};
  app.require_subcommand(1);
  Flags flags;

  auto* proj = app.add_subcommand("projection-errors", "projection errors onto W_h, W_1h and W_2h");
  auto* conv = app.add_subcommand("convergence", "energy-norm convergence of every method");
  auto* equiv = app.add_subcommand("equivalence-check", "compare the two SSE stiffness routes");
  auto* verify = app.add_subcommand("verify", "rigid-body, isotropy and patch tests");
  auto* mesh = app.add_subcommand("mesh", "mesh export and import");
  mesh->require_subcommand(1);
  auto* mesh_export = mesh->add_subcommand("export", "write the configured meshes");
  auto* mesh_import = mesh->add_subcommand("import", "read and validate mesh files");
  for (auto* cmd : {proj, conv, equiv, verify, mesh_export}) add_common(cmd, flags);
  mesh_import->add_option("--file", flags.files, "mesh file (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 2;
  }

  try {
    if (mesh_import->parsed()) return cmd_mesh_import(flags.files);
    const ExperimentConfig config = load_config(flags);
    if (proj->parsed()) return cmd_projection_errors(config);
    if (conv->parsed()) return cmd_convergence(config);
    if (equiv->parsed()) return cmd_equivalence(config);
    if (verify->parsed()) return cmd_verify(config);
    if (mesh_export->parsed()) return cmd_mesh_export(config);
  } catch (const Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
