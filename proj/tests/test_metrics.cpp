#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "homs/cells.hpp"
#include "homs/effective.hpp"
#include "homs/error.hpp"
#include "homs/metrics.hpp"
#include "homs/reference.hpp"

using namespace homs;

namespace {

NodalField nodal(const Mesh& m, double (*f)(double, double)) {
    NodalField v(static_cast<Index>(m.num_nodes()));
    for (std::size_t i = 0; i < m.num_nodes(); ++i) v[static_cast<Index>(i)] = f(m.node(i)[0], m.node(i)[1]);
    return v;
}

NodalField random_field(const Mesh& m, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    NodalField v(static_cast<Index>(m.num_nodes()));
    for (Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    return v;
}

}  // namespace

TEST(Norms, ExactOnLinearFields) {
    Mesh m = build_unit_square_mesh(7);
    NormEvaluator n(m);
    // ∫x² = 1/3 and |∇x|² = 1 on the unit square; P1 reproduces x exactly.
    EXPECT_NEAR(n.l2(nodal(m, [](double x, double) { return x; })), std::sqrt(1.0 / 3.0), 1e-13);
    EXPECT_NEAR(n.h1_semi(nodal(m, [](double x, double) { return x; })), 1.0, 1e-13);
    EXPECT_NEAR(n.l2(nodal(m, [](double, double) { return 2.0; })), 2.0, 1e-13);
    EXPECT_THROW(n.l2(NodalField::Zero(3)), InvalidArgument);
}

TEST(RelativeL2, NamedCases) {
    Mesh m = build_unit_square_mesh(6);
    NodalField ref = random_field(m, 1);
    EXPECT_EQ(relative_l2(ref, ref, m), 0.0);
    EXPECT_NEAR(relative_l2(ref, NodalField::Zero(ref.size()), m), 1.0, 1e-14);
    EXPECT_NEAR(relative_l2(ref, 2.0 * ref, m), 1.0, 1e-14);
    EXPECT_THROW(relative_l2(NodalField::Zero(ref.size()), ref, m), UndefinedMetric);
}

TEST(RelativeH1, NamedCases) {
    Mesh m = build_unit_square_mesh(6);
    NodalField ref = random_field(m, 2);
    EXPECT_EQ(relative_h1_semi(ref, ref, m), 0.0);
    EXPECT_NEAR(relative_h1_semi(ref, (ref.array() + 3.0).matrix(), m), 0.0, 1e-12);
    EXPECT_NEAR(relative_h1_semi(ref, NodalField::Zero(ref.size()), m), 1.0, 1e-14);
    EXPECT_THROW(relative_h1_semi(NodalField::Constant(ref.size(), 5.0), ref, m), UndefinedMetric);
}

TEST(Metrics, TriangleInequalityAndSymmetry) {
    Mesh m = build_unit_square_mesh(8);
    NormEvaluator n(m);
    for (unsigned seed = 0; seed < 20; ++seed) {
        NodalField ref = random_field(m, 100 + seed);
        NodalField a = random_field(m, 200 + seed);
        NodalField b = random_field(m, 300 + seed);
        const double lhs = n.relative_l2(ref, a);
        const double rhs = n.relative_l2(ref, b) + n.l2(a - b) / n.l2(ref);
        EXPECT_LE(lhs, rhs + 1e-12);
        const double hl = n.relative_h1_semi(ref, a);
        const double hr = n.relative_h1_semi(ref, b) + n.h1_semi(a - b) / n.h1_semi(ref);
        EXPECT_LE(hl, hr + 1e-12);
        EXPECT_EQ(n.l2(ref - a), n.l2(a - ref));
        EXPECT_EQ(n.h1_semi(ref - a), n.h1_semi(a - ref));
    }
}

namespace {

struct RunData {
    RunConfig config;
    Mesh cell_mesh, macro_mesh, fine_mesh;
    CellSolutions cells;
    MacroTrajectory macro, reference;
};

RunData run(const MaterialSpec& m) {
    RunData r;
    r.config.eps = 0.25;
    r.config.n_cell = 8;
    r.config.n_macro = 16;
    r.config.n_fine = 32;
    r.config.dt = 0.05;
    r.config.t_end = 0.3;
    r.config.q = ScalarField::parse("1e3*x");
    r.config.g1 = 1.0;
    r.config.g2 = 2.0;
    r.config.bc = 1.0;
    r.config.materials = m;
    r.cell_mesh = build_unit_square_mesh(r.config.n_cell, m.geometry);
    r.macro_mesh = build_unit_square_mesh(r.config.n_macro);
    r.fine_mesh = build_fine_mesh(r.config);
    CellSolutions first = solve_first_order(r.cell_mesh, m);
    EffectiveCoefficients eff = compute_effective(r.cell_mesh, m, first);
    r.cells = solve_second_order(r.cell_mesh, m, first, eff);
    r.macro = solve_homogenized(r.config, eff, r.macro_mesh);
    r.reference = solve_multiscale(r.config, r.fine_mesh);
    return r;
}

}  // namespace

TEST(ErrorEvolution, HomogeneousMediumGivesEqualSeries) {
    MaterialSpec m;
    for (int l = 0; l < 2; ++l) {
        m.capacity[l] = {1.0, 1.0};
        m.permeability[l] = {Tensor2::isotropic(3.0), Tensor2::isotropic(3.0)};
        m.exchange[l] = {0.0, 0.0};
    }
    RunData r = run(m);
    Reconstructor rec(r.macro_mesh, r.cell_mesh, r.fine_mesh, r.config.eps);
    ErrorSeries s = error_evolution(r.reference, r.macro, rec, r.cells);
    ASSERT_EQ(s.size(), 6u);
    EXPECT_NEAR(s.times.front(), 0.05, 1e-15);
    EXPECT_NEAR(s.times.back(), 0.3, 1e-15);
    s.check_finite();
    for (int l = 0; l < 2; ++l)
        for (std::size_t k = 0; k < s.size(); ++k) {
            EXPECT_NEAR(s.lerr[l][1][k], s.lerr[l][0][k], 1e-12);
            EXPECT_NEAR(s.lerr[l][2][k], s.lerr[l][0][k], 1e-12);
            EXPECT_NEAR(s.herr[l][1][k], s.herr[l][0][k], 1e-12);
            EXPECT_NEAR(s.herr[l][2][k], s.herr[l][0][k], 1e-12);
        }
}

TEST(ErrorEvolution, SeriesShapeThinningAndCsv) {
    RunData r = run(example1_materials());
    Reconstructor rec(r.macro_mesh, r.cell_mesh, r.fine_mesh, r.config.eps);
    ErrorSeries all = error_evolution(r.reference, r.macro, rec, r.cells);
    all.check_finite();
    ErrorSeries thin = error_evolution(r.reference, r.macro, rec, r.cells, 4);
    ASSERT_EQ(thin.size(), 2u);  // steps 4 and 6 (the last one is always kept)
    EXPECT_NEAR(thin.times[0], 0.2, 1e-12);
    EXPECT_NEAR(thin.times[1], 0.3, 1e-12);
    EXPECT_EQ(thin.lerr[1][2][1], all.lerr[1][2].back());

    std::ostringstream os;
    write_error_csv(os, all);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "time,Lerr10,Lerr11,Lerr12,Herr10,Herr11,Herr12,Lerr20,Lerr21,Lerr22,Herr20,Herr21,Herr22");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(all.size() + 1));

    // Absolute and relative entries agree through the reference norms.
    NormEvaluator n(r.fine_mesh);
    const auto& ref = r.reference.u.back();
    for (int l = 0; l < 2; ++l) {
        EXPECT_NEAR(all.abs_l2[l][2].back() / n.l2(ref[l]), all.lerr[l][2].back(), 1e-12);
        EXPECT_NEAR(all.abs_h1[l][2].back() / n.h1_semi(ref[l]), all.herr[l][2].back(), 1e-12);
    }
}

TEST(ErrorEvolution, MismatchedInputsRejected) {
    RunData r = run(example1_materials());
    Reconstructor rec(r.macro_mesh, r.cell_mesh, r.fine_mesh, r.config.eps);
    MacroTrajectory shorter = r.reference;
    shorter.times.pop_back();
    shorter.u.pop_back();
    EXPECT_THROW(error_evolution(shorter, r.macro, rec, r.cells), PreconditionError);
    MacroTrajectory shifted = r.reference;
    shifted.times[2] += 0.01;
    EXPECT_THROW(error_evolution(shifted, r.macro, rec, r.cells), PreconditionError);
    EXPECT_THROW(error_evolution(r.macro, r.macro, rec, r.cells), PreconditionError);
    EXPECT_THROW(error_evolution(r.reference, r.macro, rec, r.cells, 0), InvalidArgument);
}

TEST(ErrorSeries, NonFiniteEntryDetected) {
    ErrorSeries s;
    s.times = {0.1};
    for (int l = 0; l < 2; ++l)
        for (int o = 0; o < 3; ++o) {
            s.lerr[l][o] = {0.1};
            s.herr[l][o] = {0.2};
            s.abs_l2[l][o] = {0.3};
            s.abs_h1[l][o] = {0.4};
        }
    EXPECT_NO_THROW(s.check_finite());
    s.herr[1][2][0] = std::nan("");
    EXPECT_THROW(s.check_finite(), Error);
}

TEST(ErrorFunctional, TrapezoidOracle) {
    ErrorSeries s;
    s.times = {0.5, 1.0, 1.5};
    for (int l = 0; l < 2; ++l)
        for (int o = 0; o < 3; ++o) {
            s.abs_l2[l][o] = {9.0, 9.0, 0.25 * (l + 1)};
            s.abs_h1[l][o] = {1.0, 2.0, 3.0};
        }
    // ∫h² by trapezoid: 0.25*(1+4) + 0.25*(4+9) = 4.5.
    const double expected = (0.25 + std::sqrt(4.5)) + (0.5 + std::sqrt(4.5));
    EXPECT_NEAR(error_functional(s, Order::homs), expected, 1e-14);
    EXPECT_THROW(error_functional(ErrorSeries{}, Order::homs), PreconditionError);
}
