#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "homs/config.hpp"
#include "homs/error.hpp"
#include "homs/expression.hpp"
#include "homs/io.hpp"

using namespace homs;

TEST(Expression, Constants) {
    ScalarField a = ScalarField::parse("1e5");
    EXPECT_TRUE(a.is_constant());
    EXPECT_EQ(a.constant_value(), 1e5);
    EXPECT_EQ(a(0.3, 0.4, 0.5), 1e5);
    ScalarField b = 10.0;
    EXPECT_TRUE(b.is_constant());
    EXPECT_EQ(b(0, 0, 0), 10.0);
}

TEST(Expression, ArithmeticAndPrecedence) {
    EXPECT_DOUBLE_EQ(ScalarField::parse("1 + 2*3")(0, 0, 0), 7.0);
    EXPECT_DOUBLE_EQ(ScalarField::parse("(1 + 2)*3")(0, 0, 0), 9.0);
    EXPECT_DOUBLE_EQ(ScalarField::parse("2^3^2")(0, 0, 0), 512.0);
    EXPECT_DOUBLE_EQ(ScalarField::parse("-2^2")(0, 0, 0), -4.0);
    EXPECT_DOUBLE_EQ(ScalarField::parse("8/4/2")(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(ScalarField::parse("+3 - -2")(0, 0, 0), 5.0);
}

TEST(Expression, VariablesAndFunctions) {
    ScalarField f = ScalarField::parse("sin(pi*x)*sin(pi*y)*exp(-t)");
    EXPECT_FALSE(f.is_constant());
    EXPECT_NEAR(f(0.5, 0.5, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(f(0.25, 0.5, 1.0), std::sin(std::numbers::pi / 4) * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(ScalarField::parse("sqrt(abs(x-y)) + log(exp(2)) + tanh(0) + cos(0) + tan(0)")(0.1, 0.5, 0),
                std::sqrt(0.4) + 3.0, 1e-14);
    // Constant folding of closed expressions.
    EXPECT_TRUE(ScalarField::parse("2*pi").is_constant());
}

TEST(Expression, SyntaxErrorsReportPosition) {
    for (const char* bad : {"", "1 +", "sin(", "foo(1)", "2 ** 3", "(1", "x y", "1e"}) {
        try {
            ScalarField::parse(bad);
            ADD_FAILURE() << "accepted '" << bad << "'";
        } catch (const InvalidArgument& e) {
            EXPECT_NE(std::string(e.what()).find("position"), std::string::npos) << e.what();
        }
    }
}

TEST(Numbers, FractionsAndRoundTrip) {
    EXPECT_DOUBLE_EQ(parse_number("1/8"), 0.125);
    EXPECT_DOUBLE_EQ(parse_number(" 0.25 "), 0.25);
    EXPECT_DOUBLE_EQ(parse_number("1e-3"), 1e-3);
    EXPECT_THROW(parse_number("1/0"), InvalidArgument);
    EXPECT_THROW(parse_number("abc"), InvalidArgument);
    EXPECT_THROW(parse_double("1.5x"), InvalidArgument);
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17})
        EXPECT_EQ(parse_double(format_double(v)), v);
}

TEST(Config, DefaultsAreValid) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.periods(), 8);
    EXPECT_EQ(c.num_steps(), 50);
}

TEST(Config, ParsesEveryKey) {
    std::istringstream in(R"(
# comment line
eps = 1/4
mesh.n_macro = 20
mesh.n_cell = 10
mesh.n_fine = 40
mesh.pattern = symmetric
dt = 0.05
t_end = 0.5
q = 2*x
g = 3
g2 = 4
bc = 5
geometry.kind = disk
geometry.radius = 0.3
geometry.center = 0.5, 0.5
material.c1.matrix = 7
material.k2.inclusion = 2 0.5 3
material.Q1.inclusion = 0
solver.tol = 1e-9
flags.k2bar_uses_M2 = true
flags.strict_signs = no
output.dir = somewhere
output.vtk_times = 0.1 0.5
output.thinning = 2
threads = 3
sweep.eps = 1/4 1/8
)");
    RunConfig c = parse_config(in);
    EXPECT_EQ(c.eps, 0.25);
    EXPECT_EQ(c.n_macro, 20);
    EXPECT_EQ(c.n_cell, 10);
    EXPECT_EQ(c.n_fine, 40);
    EXPECT_EQ(c.pattern, DiagonalPattern::symmetric);
    EXPECT_EQ(c.num_steps(), 10);
    EXPECT_DOUBLE_EQ(c.q(0.5, 0, 0), 1.0);
    EXPECT_EQ(c.g1(0, 0, 0), 3.0);
    EXPECT_EQ(c.g2(0, 0, 0), 4.0);
    EXPECT_EQ(c.bc(0, 0, 0), 5.0);
    EXPECT_EQ(c.materials.geometry.radius, 0.3);
    EXPECT_EQ(c.materials.capacity[0].matrix, 7.0);
    EXPECT_EQ(c.materials.permeability[1].inclusion.xy, 0.5);
    EXPECT_EQ(c.materials.exchange[0].inclusion, 0.0);
    EXPECT_EQ(c.solver_tol, 1e-9);
    EXPECT_TRUE(c.k2bar_uses_M2);
    EXPECT_FALSE(c.strict_signs);
    EXPECT_EQ(c.output_dir, "somewhere");
    ASSERT_EQ(c.vtk_times.size(), 2u);
    EXPECT_EQ(c.thinning, 2);
    EXPECT_EQ(c.threads, 3);
    ASSERT_EQ(c.sweep_eps.size(), 2u);
    EXPECT_EQ(c.sweep_eps[1], 0.125);
}

namespace {

std::string error_key(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_config(in);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<accepted>";
}

}  // namespace

TEST(Config, ErrorsNameTheKey) {
    EXPECT_EQ(error_key("material.k1.matrix = -1\n"), "material.k1.matrix");
    EXPECT_EQ(error_key("material.c2.inclusion = 0\n"), "material.c2.inclusion");
    EXPECT_EQ(error_key("material.Q1.matrix = -3\n"), "material.Q1.matrix");
    EXPECT_EQ(error_key("material.k1.matrix = 1 2 1\n"), "material.k1.matrix");
    EXPECT_EQ(error_key("material.z1.matrix = 1\n"), "material.z1.matrix");
    EXPECT_EQ(error_key("mesh.bogus = 1\n"), "mesh.bogus");
    EXPECT_EQ(error_key("dt = -0.1\n"), "dt");
    EXPECT_EQ(error_key("dt = abc\n"), "dt");
    EXPECT_EQ(error_key("eps = 0.3\n"), "eps");
    EXPECT_EQ(error_key("eps = 1\n"), "eps");
    EXPECT_EQ(error_key("mesh.n_fine = 100\n"), "mesh.n_fine");
    EXPECT_EQ(error_key("mesh.n_cell = 2.5\n"), "mesh.n_cell");
    EXPECT_EQ(error_key("t_end = 0.01\n"), "t_end");
    EXPECT_EQ(error_key("t_end = 0.51\ndt = 0.02\n"), "t_end");
    EXPECT_EQ(error_key("solver.tol = 0.1\n"), "solver.tol");
    EXPECT_EQ(error_key("q = sin(\n"), "q");
    EXPECT_EQ(error_key("flags.k2bar_uses_M2 = maybe\n"), "flags.k2bar_uses_M2");
    EXPECT_EQ(error_key("output.vtk_times = 2\n"), "output.vtk_times");
    EXPECT_EQ(error_key("sweep.eps = 0.3\n"), "sweep.eps");
    EXPECT_EQ(error_key("geometry.radius = 0.7\n"), "geometry");
    EXPECT_EQ(error_key("mesh.pattern = symmetric\nmesh.n_cell = 7\n"), "mesh.pattern");
    EXPECT_EQ(error_key("eps = 1/8\n"), "<accepted>");
}

TEST(Config, MalformedLine) {
    std::istringstream in("just words\n");
    EXPECT_THROW(parse_config(in), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST(Config, LaterSettingsOverride) {
    std::istringstream in("dt = 0.1\ndt = 0.05\n");
    RunConfig c = parse_config(in);
    EXPECT_EQ(c.dt, 0.05);
    apply_setting(c, "dt", "0.025");
    EXPECT_EQ(c.dt, 0.025);
}

TEST(Config, CacheKeysTrackRelevantSettings) {
    RunConfig a;
    RunConfig b = a;
    b.dt = 0.01;
    EXPECT_EQ(a.cell_key(), b.cell_key());
    EXPECT_NE(a.reference_key(), b.reference_key());
    RunConfig c = a;
    c.n_cell = 16;
    EXPECT_NE(a.cell_key(), c.cell_key());
    EXPECT_EQ(a.reference_key(), c.reference_key());
    RunConfig d = a;
    d.materials.capacity[0].matrix = 6.0;
    EXPECT_NE(a.cell_key(), d.cell_key());
    EXPECT_NE(a.reference_key(), d.reference_key());
    EXPECT_NE(a.canonical(), b.canonical());
}

TEST(Config, ShippedConfigsLoad) {
    for (const char* name : {"example1.cfg", "example1_ci.cfg", "example3.cfg", "example3_ci.cfg", "sweep_eps.cfg"}) {
        const std::string path = std::string(HOMS_SOURCE_DIR) + "/configs/" + name;
        EXPECT_NO_THROW(load_config(path)) << path;
    }
    RunConfig ex3 = load_config(std::string(HOMS_SOURCE_DIR) + "/configs/example3.cfg");
    EXPECT_EQ(ex3.materials.geometry.kind, InclusionSpec::Kind::axis_cross);
    EXPECT_EQ(ex3.materials.capacity[0].matrix, 50.0);
}
