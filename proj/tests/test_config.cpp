#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace maslov;
using namespace maslov::testing;

namespace {

const std::string config_dir = MASLOV_CONFIG_DIR;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct RunResult {
  int status;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(MASLOV_COUNT_EXE) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, p)) out.append(buf, got);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

int config_error_column(const std::string& text) {
  try {
    (void)Expression::parse(text);
  } catch (const ConfigError& e) {
    return e.column();
  }
  return 0;
}

int config_error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

const char* scalar_sl_text = R"(family = sturm_liouville
n = 1
window = 0, 50
[P]
1
[V]
0
[Q]
1
[alpha]
1, 0
[beta]
1, 0
)";

}  // namespace

TEST(Expression, Evaluates) {
  EXPECT_NEAR(Expression::parse("cos(pi*x)/(2+cos(4*pi*x))")(0.0), 1.0 / 3, 1e-15);
  EXPECT_EQ(Expression::parse("2^3^2")(0.0), 512.0);
  EXPECT_EQ(Expression::parse("-2^2")(0.0), -4.0);
  EXPECT_EQ(Expression::parse("2*-3")(0.0), -6.0);
  EXPECT_EQ(Expression::parse(".5e1 - 1/4")(0.0), 4.75);
  EXPECT_EQ(Expression::parse("1 - 2 - 3")(0.0), -4.0);
  EXPECT_EQ(Expression::parse("8 / 4 / 2")(0.0), 1.0);
  EXPECT_NEAR(Expression::parse("-18*sin(3*x) + .0081*x^2")(0.5), -18 * std::sin(1.5) + .0081 * 0.25, 1e-15);
  EXPECT_NEAR(Expression::parse("2^-0.5/3")(0.0), 1 / std::sqrt(2.0) / 3, 1e-16);
  EXPECT_TRUE(Expression::parse("sin(x)").depends_on_x());
  EXPECT_FALSE(Expression::parse("pi^2").depends_on_x());
}

TEST(Expression, EvaluationErrors) {
  EXPECT_THROW(Expression::parse("1/(x - x)")(0.3), EvaluationError);
  EXPECT_THROW(Expression::parse("(x - 1)^0.5")(0.0), EvaluationError);
  EXPECT_THROW(Expression::parse("1/x")(0.0), EvaluationError);
}

TEST(Expression, ParseErrorsCarryColumns) {
  EXPECT_EQ(config_error_column("1 + * 2"), 5);
  EXPECT_EQ(config_error_column("foo + 1"), 1);
  EXPECT_EQ(config_error_column("sin 2"), 5);
  EXPECT_EQ(config_error_column("(1 + 2"), 7);
  EXPECT_EQ(config_error_column("1 2"), 3);
  EXPECT_EQ(config_error_column(""), 1);
  EXPECT_EQ(config_error_column("."), 1);
}

TEST(Expression, SerializeRoundTrip) {
  for (const char* text : {"cos(pi*x)/(2+cos(4*pi*x))", "-(1 - x)^2", "2^3^2", "(2^3)^2", "1 - (2 - 3)",
                           "1/(2/3)", "-x*-x", ".13 + .7*cos(6*pi*x)/(2 + cos(6*pi*x))", "0.1", "1e-300",
                           "2^-0.5/3", "-(-x)", "x - -1"}) {
    const Expression e = Expression::parse(text);
    const Expression back = Expression::parse(e.serialize());
    EXPECT_EQ(e, back) << text << " -> " << e.serialize();
    for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(e(x), back(x)) << text;
  }
}

TEST(Config, ParsesDiracPaperAndBuildsCoefficients) {
  const auto cfg = parse_config(slurp(config_dir + "/dirac_paper.cfg"));
  EXPECT_EQ(cfg.family, "dirac");
  EXPECT_EQ(cfg.n, 2);
  ASSERT_TRUE(cfg.window.has_value());
  const auto p = build_problem(cfg);
  EXPECT_EQ(p.lambda1, -1.0);
  EXPECT_EQ(p.lambda2, 1.0);
  const Matrix b = p.system.eval_B(0.0, 0.0);
  EXPECT_NEAR(b(0, 0).real(), .13 + .7 / 3, 1e-15);
  EXPECT_NEAR(b(0, 1).real(), 1.0 / 3, 1e-15);
  EXPECT_NEAR(b(1, 1).real(), 1.0, 1e-15);
  for (double x : {0.0, 0.21, 0.77})
    EXPECT_LT(operator_norm(p.system.eval_B(x, 0.4) - dirac_paper().eval_B(x, 0.4)), 1e-14) << x;
}

TEST(Config, ShippedConfigsMatchLibrarySystems) {
  const auto sl = build_problem(parse_config(slurp(config_dir + "/sl_paper.cfg")));
  const auto dae = build_problem(parse_config(slurp(config_dir + "/dae_paper.cfg")));
  for (double x : {0.0, 0.4, 1.0}) {
    EXPECT_LT(operator_norm(sl.system.eval_B(x, 1.1) - sl_paper().eval_B(x, 1.1)), 1e-13) << x;
    EXPECT_LT(operator_norm(dae.system.eval_B(x, -3.0) - dae_paper({-10, 0.2}).eval_B(x, -3.0)), 1e-13) << x;
  }
  const auto& bc = std::get<SeparatedBC>(sl.bc);
  EXPECT_LT(operator_norm(bc.alpha - sl_paper_bc().alpha), 1e-15);
}

TEST(Config, RoundTripIsIdentity) {
  for (const auto& entry : std::filesystem::directory_iterator(config_dir)) {
    if (entry.path().extension() != ".cfg") continue;
    const auto a = parse_config(slurp(entry.path().string()));
    const auto b = parse_config(serialize(a));
    EXPECT_TRUE(a == b) << entry.path();
    EXPECT_EQ(serialize(a), serialize(b)) << entry.path();
  }
}

TEST(Config, ErrorsCarryLines) {
  std::string dup = scalar_sl_text;
  dup += "n = 1\n";
  EXPECT_EQ(config_error_line(dup), 14);
  EXPECT_EQ(config_error_line("family = dirac\ncolour = 3\n"), 2);
  EXPECT_EQ(config_error_line("family = sturm_liouville\nn = 2\n[P]\n1, 0\n0\n"), 5);
  EXPECT_EQ(config_error_line("family = sturm_liouville\nn = 1\n[P]\nn = 1\n"), 4);
  EXPECT_EQ(config_error_line("family = sturm_liouville\nn = 1\n[X]\n"), 3);
  EXPECT_EQ(config_error_line("family = sturm_liouville\nn = 1\n[P]\n1 +\n"), 4);
  EXPECT_EQ(config_error_line("family = sturm_liouville\nn = 0\n"), 2);
  std::string bad_option = scalar_sl_text;
  bad_option += "[options]\nrtol = fast\n";
  EXPECT_EQ(config_error_line(bad_option), 15);
}

TEST(Config, BoundaryResidualIsNamed) {
  const std::string block = R"(family = block
n = 1
r = 2
[R]
1, 0
0, 1
[V]
0, 0
0, 0
[alpha]
1, 0
[beta]
1, 0, 0
)";
  EXPECT_EQ(config_error_line(block), 12);
  const std::string general = R"(family = sturm_liouville
n = 1
bc = general
[P]
1
[V]
0
[Q]
1
[theta]
1, 0, 0, 0
0, 1, 0, 0
)";
  try {
    (void)parse_config(general);
    ADD_FAILURE() << "expected a boundary error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 10);
  }
}

TEST(Config, EssentialSpectrumPolicy) {
  const auto cfg = parse_config(slurp(config_dir + "/dae_essential.cfg"));
  EXPECT_THROW(build_problem(cfg), WindowTouchesEssentialSpectrum);
  EXPECT_NO_THROW(build_problem(cfg, std::nullopt, EssentialSpectrumPolicy::allow));
}

TEST(Cli, CountScalarSturmLiouville) {
  const auto r = run("count --config " + config_dir + "/scalar_sl.cfg");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("count: 2"), std::string::npos) << r.out;
  const auto j = run("count --config " + config_dir + "/scalar_sl.cfg --window 0,10 --json");
  EXPECT_EQ(j.status, 0) << j.out;
  EXPECT_EQ(nlohmann::json::parse(j.out).at("count").get<int>(), 1);
}

TEST(Cli, CheckFailsInsideEssentialSpectrum) {
  const auto r = run("check --config " + config_dir + "/dae_essential.cfg");
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_NE(r.out.find("B1: fail"), std::string::npos) << r.out;
  EXPECT_EQ(run("count --config " + config_dir + "/dae_essential.cfg").status, 2);
}

TEST(Cli, AuditDiracPaper) {
  const auto r = run("audit --config " + config_dir + "/dirac_paper.cfg --json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("bottom").at("index").get<int>(), 0);
  EXPECT_EQ(j.at("right").at("index").get<int>(), 0);
  EXPECT_EQ(j.at("loop_sum").get<int>(), 0);
  EXPECT_TRUE(j.at("consistent").get<bool>());
}

TEST(Cli, OracleAndCurves) {
  const auto o = run("oracle --config " + config_dir + "/scalar_dirac.cfg");
  EXPECT_EQ(o.status, 0) << o.out;
  EXPECT_NE(o.out.find("agree: yes"), std::string::npos) << o.out;

  const auto path = (std::filesystem::temp_directory_path() / "maslov_cli_curves.svg").string();
  const auto c = run("curves --config " + config_dir + "/scalar_sl.cfg --resolution 8 --out " + path);
  EXPECT_EQ(c.status, 0) << c.out;
  const std::string svg = slurp(path);
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
  std::filesystem::remove(path);

  const auto csv = run("curves --config " + config_dir + "/scalar_sl.cfg --resolution 8 --method standard");
  EXPECT_EQ(csv.status, 0) << csv.out;
  EXPECT_EQ(csv.out.rfind("method,curve_id,x,lambda,multiplicity\nstandard,", 0), 0u) << csv.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run("count").status, 0);
  EXPECT_EQ(run("count --config /nonexistent.cfg").status, 1);
  EXPECT_EQ(run("count --config " + config_dir + "/scalar_sl.cfg --window 5,1").status, 1);
  EXPECT_NE(run("frobnicate --config " + config_dir + "/scalar_sl.cfg").status, 0);
}
