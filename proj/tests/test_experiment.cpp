#include "smoothfem/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace smoothfem;

namespace {

ExperimentConfig parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  read_config(in, c);
  return c;
}

std::string config_error(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, ParsesKeyValueFile) {
  const ExperimentConfig c = parse(
      "# block problem\n"
      "problem = block\n"
      "mesh = quad   # trailing comment\n"
      "n = 2, 4 8\n"
      "methods = sse,fem_blq4\n"
      "domain = 0 0 2 1\n"
      "probe = 2 1\n"
      "distortion = 0.2\n"
      "seed = 9\n"
      "parallel = true\n");
  EXPECT_EQ(c.mesh_kind, ElementKind::Q4);
  EXPECT_EQ(c.n, (std::vector<int>{2, 4, 8}));
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::sse, Method::fem_blq4}));
  EXPECT_EQ(c.domain.x1, 2.0);
  EXPECT_EQ(*c.probe, Vec2(2, 1));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_TRUE(c.parallel);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ValidationNamesTheField) {
  EXPECT_NE(config_error("n = 4, 2\n").find("n:"), std::string::npos);
  EXPECT_NE(config_error("n = 2, 4\nn_ref = 4\n").find("n_ref"), std::string::npos);
  EXPECT_NE(config_error("nu = 0.5\n").find("nu"), std::string::npos);
  EXPECT_NE(config_error("mesh = tri\nmethods = csfem\n").find("methods"), std::string::npos);
  EXPECT_NE(config_error("distortion = 0.7\n").find("distortion"), std::string::npos);
  EXPECT_NE(config_error("probe = 3 3\n").find("probe"), std::string::npos);
  EXPECT_NE(config_error("colour = red\n").find("line 1"), std::string::npos);
  EXPECT_NE(config_error("E = abc\n").find("E:"), std::string::npos);
  EXPECT_NE(config_error("pattern = zigzag\n").find("pattern"), std::string::npos);
  EXPECT_TRUE(config_error("problem = patch\n").empty());
}

TEST(Config, DefaultsMatchTheBlockStudy) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.n, (std::vector<int>{2, 4, 8, 16}));
  EXPECT_EQ(c.n_ref, 64);
  EXPECT_EQ(c.E, 1e3);
  EXPECT_EQ(c.nu, 0.2);
  EXPECT_EQ(c.effective_methods().size(), 4u);
}

TEST(Csv, ShortestRoundTrip) {
  for (double x : {0.1, 1e-300, 2.0 / 3.0, 1.538e-3, -0.0}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-3), "0.001");
}

TEST(Tasks, ResultsKeepIndexOrderAndRethrow) {
  setenv("SMOOTHFEM_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  std::vector<int> out(50, -1);
  run_tasks(out.size(), true, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(run_tasks(10, true,
                         [](std::size_t i) {
                           if (i == 7) throw ConfigError("boom");
                         }),
               ConfigError);
  setenv("SMOOTHFEM_THREADS", "zero", 1);
  EXPECT_THROW(worker_count(), ConfigError);
  unsetenv("SMOOTHFEM_THREADS");
}

TEST(Experiment, PatchProjectionErrorsVanish) {
  ExperimentConfig c = parse("problem = patch\nn = 1, 2\nn_ref = 4\ndistortion = 0.2\n");
  c.validate();
  const auto ref = solve_reference(make_problem(c), c.n_ref);
  const auto rows = projection_errors(c, *ref);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_LE(r.w_h, 1e-9);
    EXPECT_LE(r.w_1h, 1e-9);
    EXPECT_LE(r.w_2h, 1e-9);
  }
}

TEST(Experiment, CsvOutputIsDeterministic) {
  ExperimentConfig c = parse("mesh = quad\nn = 1, 2, 4\nn_ref = 8\nmethods = sse, fem_blq4\nparallel = true\n");
  c.validate();
  const auto ref = solve_reference(make_problem(c), c.n_ref);
  std::ostringstream a, b, svg;
  write_convergence_csv(a, convergence(c, *ref));
  c.parallel = false;
  const auto rows = convergence(c, *ref);
  write_convergence_csv(b, rows);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "method,mesh_kind,mesh,n,h,dofs,energy_error,probe_error,slope");
  // slope only once three sizes are available
  EXPECT_FALSE(rows[1].slope.has_value());
  EXPECT_TRUE(rows[2].slope.has_value());
  write_convergence_svg(svg, rows);
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("SSE Q4"), std::string::npos);
}

TEST(Experiment, EquivalenceOnShearedQuads) {
  ExperimentConfig c = parse("mesh = quad\nn = 2, 4\nshear = 0.5\n");
  c.validate();
  for (const auto& row : equivalence_check(c)) {
    EXPECT_TRUE(row.pass) << row.gap;
    EXPECT_EQ(row.mesh, "regular+shear");
  }
}

TEST(Experiment, VerificationSuitePassesOnRegularMeshes) {
  ExperimentConfig c;
  c.shear = 0.3;
  const auto checks = verification_suite(c);
  EXPECT_EQ(checks.size(), 4u * 2u * 9u);
  for (const auto& r : checks) EXPECT_TRUE(r.pass) << r.method << " " << r.mesh << " " << r.check << " " << r.value;
}
