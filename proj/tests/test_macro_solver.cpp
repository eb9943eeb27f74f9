#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "homs/cells.hpp"
#include "homs/config.hpp"
#include "homs/effective.hpp"
#include "homs/error.hpp"
#include "homs/macro_solver.hpp"

using namespace homs;

namespace {

EffectiveCoefficients sample_eff(bool with_drift) {
    EffectiveCoefficients e;
    e.c_star = {3.0, 2.0};
    e.kappa_star[0] = Matrix2{{{40.0, 1.0}, {1.0, 35.0}}};
    e.kappa_star[1] = Matrix2{{{20.0, 0.0}, {0.0, 25.0}}};
    e.q_star = {1.5, 0.7};
    if (with_drift) {
        e.kbar1 = {Vec2{0.3, -0.2}, Vec2{0.1, 0.4}};
        e.kbar2 = {Vec2{-0.5, 0.1}, Vec2{0.2, 0.2}};
    }
    return e;
}

EffectiveCoefficients identical_eff(bool with_drift) {
    EffectiveCoefficients e = sample_eff(false);
    e.c_star[1] = e.c_star[0];
    e.kappa_star[1] = e.kappa_star[0];
    e.q_star[1] = e.q_star[0];
    if (with_drift) {
        const Vec2 v{0.4, -0.3};
        e.kbar1 = {v, v};
        e.kbar2 = {v, v};
    }
    return e;
}

double max_abs(const FieldPair& u) { return std::max(u[0].cwiseAbs().maxCoeff(), u[1].cwiseAbs().maxCoeff()); }

}  // namespace

TEST(MacroSolver, ZeroDataStaysZero) {
    Mesh mesh = build_unit_square_mesh(8);
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, sample_eff(true)), CoupledData{}, 0.1, 1.0);
    ASSERT_EQ(traj.size(), 11u);
    for (std::size_t k = 0; k < traj.size(); ++k) EXPECT_EQ(max_abs(traj.u[k]), 0.0);
}

TEST(MacroSolver, IdenticalContinuaStayIdentical) {
    Mesh mesh = build_unit_square_mesh(10);
    CoupledData data;
    data.q = ScalarField::parse("100*sin(pi*x)*y");
    data.initial = {ScalarField::parse("1 + x*y"), ScalarField::parse("1 + x*y")};
    data.bc = ScalarField::parse("1 + x*y + t");
    for (bool drift : {false, true}) {
        MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, identical_eff(drift)), data, 0.05, 0.5);
        for (std::size_t k = 0; k < traj.size(); ++k)
            EXPECT_LE((traj.u[k][0] - traj.u[k][1]).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(MacroSolver, SteadyStatePreserved) {
    Mesh mesh = build_unit_square_mesh(12);
    CoupledData data;
    data.initial = {7.0, 7.0};
    data.bc = 7.0;
    const EffectiveCoefficients eff = sample_eff(false);
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, eff), data, 0.02, 0.2);
    for (std::size_t k = 1; k < traj.size(); ++k)
        for (int l = 0; l < 2; ++l) EXPECT_LE((traj.u[k][l] - traj.u[k - 1][l]).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MacroSolver, EnergyNonIncreasingWithoutDrift) {
    Mesh mesh = build_unit_square_mesh(12);
    CoupledData data;
    data.initial = {ScalarField::parse("sin(pi*x)*sin(pi*y)"), ScalarField::parse("x*(1-x)*y*(1-y)*30")};
    const EffectiveCoefficients eff = sample_eff(false);
    const CoupledOperators ops = homogenized_operators(mesh, eff);
    MacroTrajectory traj = integrate(mesh, ops, data, 0.01, 0.3);
    auto energy = [&](const FieldPair& u) {
        return eff.c_star[0] * u[0].dot(ops.mass * u[0]) + eff.c_star[1] * u[1].dot(ops.mass * u[1]);
    };
    for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_LE(energy(traj.u[k]), energy(traj.u[k - 1]) + 1e-10);
    EXPECT_LT(energy(traj.u.back()), 0.5 * energy(traj.u.front()));
}

TEST(MacroSolver, SingleStep) {
    Mesh mesh = build_unit_square_mesh(4);
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, sample_eff(true)), CoupledData{}, 0.1, 0.1);
    EXPECT_EQ(traj.size(), 2u);
    EXPECT_DOUBLE_EQ(traj.times[1], 0.1);

    RunConfig cfg;
    cfg.n_macro = 4;
    cfg.dt = 0.05;
    cfg.t_end = 0.05;
    MacroTrajectory one = solve_homogenized(cfg, sample_eff(false));
    EXPECT_EQ(one.size(), 2u);
}

TEST(MacroSolver, SecondOrderInTime) {
    Mesh mesh = build_unit_square_mesh(12);
    CoupledData data;
    data.q = ScalarField::parse("50*sin(pi*x)*sin(pi*y)*cos(3*t)");
    const CoupledOperators ops = homogenized_operators(mesh, sample_eff(true));
    std::vector<FieldPair> finals;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) finals.push_back(integrate(mesh, ops, data, dt, 1.0).u.back());
    auto diff = [](const FieldPair& a, const FieldPair& b) {
        return std::max((a[0] - b[0]).cwiseAbs().maxCoeff(), (a[1] - b[1]).cwiseAbs().maxCoeff());
    };
    for (std::size_t k = 0; k + 2 < finals.size(); ++k) {
        const double ratio = diff(finals[k], finals[k + 1]) / diff(finals[k + 1], finals[k + 2]);
        EXPECT_GE(ratio, 3.2);
        EXPECT_LE(ratio, 4.8) << "dt level " << k;
    }
}

TEST(MacroSolver, ExchangeBlocksShareTheMassMatrix) {
    Mesh mesh = build_unit_square_mesh(6);
    const EffectiveCoefficients eff = sample_eff(false);
    const CoupledOperators ops = homogenized_operators(mesh, eff);
    CoupledStepper stepper(mesh, ops, 0.1);
    const Eigen::MatrixXd lhs(stepper.lhs());
    const Eigen::MatrixXd rhs(stepper.rhs_operator());
    const Eigen::MatrixXd mass(ops.mass);
    const Index n = mass.rows();
    const Eigen::MatrixXd b12 = lhs.block(0, n, n, n), b21 = lhs.block(n, 0, n, n);
    EXPECT_LT((b12 / eff.q_star[0] + 0.5 * mass).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((b21 / eff.q_star[1] + 0.5 * mass).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((rhs.block(0, n, n, n) + b12).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((rhs.block(n, 0, n, n) + b21).cwiseAbs().maxCoeff(), 1e-14);
    // Own blocks carry +½Q* M on the left, so a uniform state has no net exchange when
    // both continua agree.
    const Eigen::MatrixXd a11 = lhs.block(0, 0, n, n) - Eigen::MatrixXd(ops.capacity[0]) / 0.1 -
                                0.5 * Eigen::MatrixXd(ops.stiffness[0]);
    EXPECT_LT((a11 - 0.5 * eff.q_star[0] * mass).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MacroSolver, StepMatchesIntegrate) {
    Mesh mesh = build_unit_square_mesh(6);
    CoupledData data;
    data.q = 20.0;
    data.initial = {1.0, 2.0};
    data.bc = 1.5;
    const EffectiveCoefficients eff = sample_eff(true);
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, eff), data, 0.1, 0.2);
    FieldPair s = initial_state(mesh, data);
    s = step_homogenized(mesh, s, 0.0, 0.1, eff, data);
    s = step_homogenized(mesh, s, 0.1, 0.1, eff, data);
    for (int l = 0; l < 2; ++l) EXPECT_LT((s[l] - traj.u[2][l]).cwiseAbs().maxCoeff(), 1e-12);
    // Backward differences and their t=0 convention.
    for (int l = 0; l < 2; ++l) {
        EXPECT_LT(((traj.u[2][l] - traj.u[1][l]) / 0.1 - traj.dudt[2][l]).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(traj.dudt[0][l], traj.dudt[1][l]);
    }
}

TEST(MacroSolver, BoundaryCarriesPrescribedValues) {
    Mesh mesh = build_unit_square_mesh(8);
    CoupledData data;
    data.q = 5.0;
    data.initial = {0.0, 0.0};
    data.bc = ScalarField::parse("x + 2*y + t");
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, sample_eff(true)), data, 0.1, 0.5);
    for (std::size_t k = 0; k < traj.size(); ++k)
        for (std::size_t b : mesh.boundary_nodes()) {
            const Point p = mesh.node(b);
            for (int l = 0; l < 2; ++l)
                EXPECT_NEAR(traj.u[k][l][static_cast<Index>(b)], p[0] + 2 * p[1] + traj.times[k], 1e-12);
        }
    for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_NEAR(traj.times[k] - traj.times[k - 1], 0.1, 1e-12);
}

TEST(MacroSolver, ExampleOneRunStaysAboveBoundaryValue) {
    RunConfig cfg;
    cfg.n_cell = 16;
    cfg.n_macro = 32;
    Mesh cell_mesh = build_unit_square_mesh(cfg.n_cell, cfg.materials.geometry);
    CellSolutions first = solve_first_order(cell_mesh, cfg.materials);
    EffectiveCoefficients eff = compute_effective(cell_mesh, cfg.materials, first);
    MacroTrajectory traj = solve_homogenized(cfg, eff);
    ASSERT_EQ(traj.size(), 51u);
    for (const auto& u : traj.u) {
        EXPECT_TRUE(u[0].allFinite());
        EXPECT_TRUE(u[1].allFinite());
    }
    for (int l = 0; l < 2; ++l) EXPECT_GE(traj.u.back()[l].minCoeff(), 10.0 - 1e-9);
}

TEST(MacroSolver, Deterministic) {
    Mesh mesh = build_unit_square_mesh(10);
    CoupledData data;
    data.q = ScalarField::parse("1e3*x*y");
    data.initial = {3.0, 4.0};
    data.bc = 3.5;
    const CoupledOperators ops = homogenized_operators(mesh, sample_eff(true));
    MacroTrajectory a = integrate(mesh, ops, data, 0.05, 0.5);
    MacroTrajectory b = integrate(mesh, ops, data, 0.05, 0.5);
    for (std::size_t k = 0; k < a.size(); ++k)
        for (int l = 0; l < 2; ++l) EXPECT_EQ(a.u[k][l], b.u[k][l]);
}

TEST(MacroSolver, ArchiveAndSummary) {
    Mesh mesh = build_unit_square_mesh(5);
    CoupledData data;
    data.q = 7.0;
    data.initial = {1.0, 1.0};
    data.bc = 1.0;
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, sample_eff(true)), data, 0.1, 0.3);
    std::stringstream ss;
    write_trajectory_archive(ss, traj);
    MacroTrajectory back = read_trajectory_archive(ss);
    ASSERT_EQ(back.size(), traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        EXPECT_EQ(back.times[k], traj.times[k]);
        for (int l = 0; l < 2; ++l) {
            EXPECT_EQ(back.u[k][l], traj.u[k][l]);
            EXPECT_EQ(back.dudt[k][l], traj.dudt[k][l]);
        }
    }
    std::ostringstream sum;
    write_trajectory_summary(sum, traj);
    const std::string text = sum.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "step,time,min_u1,max_u1,min_u2,max_u2");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);

    std::istringstream bad("# something else\n");
    EXPECT_THROW(read_trajectory_archive(bad), IoError);
    std::string full;
    {
        std::stringstream again;
        write_trajectory_archive(again, traj);
        full = again.str();
    }
    std::istringstream cut(full.substr(0, full.size() / 2));
    EXPECT_THROW(read_trajectory_archive(cut), IoError);
}

TEST(MacroSolver, TimeLookup) {
    Mesh mesh = build_unit_square_mesh(3);
    MacroTrajectory traj = integrate(mesh, homogenized_operators(mesh, sample_eff(false)), CoupledData{}, 0.02, 1.0);
    EXPECT_EQ(traj.index_of(1.0), 50u);
    EXPECT_EQ(traj.index_of(0.5), 25u);
    EXPECT_THROW(traj.index_of(0.51), PreconditionError);
}

TEST(MacroSolver, ErrorPaths) {
    Mesh mesh = build_unit_square_mesh(4);
    const CoupledOperators ops = homogenized_operators(mesh, sample_eff(false));
    EXPECT_THROW(CoupledStepper(mesh, ops, 0.0), InvalidArgument);
    EXPECT_THROW(integrate(mesh, ops, CoupledData{}, 0.1, 0.05), InvalidArgument);
    Mesh other = build_unit_square_mesh(5);
    EXPECT_THROW(CoupledStepper(other, ops, 0.1), PreconditionError);

    CoupledStepper stepper(mesh, ops, 0.1);
    EXPECT_THROW(stepper.step({NodalField::Zero(3), NodalField::Zero(3)}, 0.0, CoupledData{}), PreconditionError);

    CoupledData nan_source;
    nan_source.q = ScalarField::parse("sqrt(-1)");
    try {
        integrate(mesh, ops, nan_source, 0.1, 0.3);
        ADD_FAILURE() << "expected a blowup";
    } catch (const BlowupError& e) {
        EXPECT_EQ(e.step(), 1u);
    }

    EffectiveCoefficients bad = sample_eff(false);
    bad.c_star[1] = 0.0;
    EXPECT_THROW(homogenized_operators(mesh, bad), InvalidMaterial);
}
