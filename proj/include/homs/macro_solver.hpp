#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "homs/config.hpp"
#include "homs/effective.hpp"
#include "homs/expression.hpp"
#include "homs/fem.hpp"
#include "homs/mesh.hpp"

namespace homs {

using FieldPair = std::array<NodalField, 2>;

/// Nodal states of both continua at uniformly spaced times, plus backward differences.
struct MacroTrajectory {
    std::vector<double> times;
    std::vector<FieldPair> u;
    /// dudt[n] = (u[n] - u[n-1]) / dt for n >= 1; dudt[0] repeats dudt[1].
    std::vector<FieldPair> dudt;

    std::size_t size() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

    /// Index of the stored time equal to t within 1e-9·dt; throws PreconditionError otherwise.
    std::size_t index_of(double t) const;
};

/// Semi-discrete operators of one coupled two-field parabolic system
///   C_l u_l' + A_l u_l + X_l (u_l - u_o) + D_l u_l - E_l u_o = M q,   o = other continuum,
/// with X_l the exchange, D_l the own-gradient drift and E_l the cross-gradient drift.
/// Empty drift matrices mean no drift.
struct CoupledOperators {
    SparseMatrix mass;
    std::array<SparseMatrix, 2> capacity;
    std::array<SparseMatrix, 2> stiffness;
    std::array<SparseMatrix, 2> exchange;
    std::array<SparseMatrix, 2> drift_own;
    std::array<SparseMatrix, 2> drift_cross;
};

/// Operators of the homogenized system on a macro mesh.
CoupledOperators homogenized_operators(const Mesh& macro_mesh, const EffectiveCoefficients& eff);

/// Boundary and forcing data of a coupled run.
struct CoupledData {
    ScalarField q = 0.0;
    std::array<ScalarField, 2> initial{0.0, 0.0};
    ScalarField bc = 0.0;
};

/// Crank-Nicolson step of the coupled system with every term averaged between the two
/// levels, solved monolithically. The 2N x 2N operator is factored once.
class CoupledStepper {
public:
    CoupledStepper(const Mesh& mesh, const CoupledOperators& ops, double dt, double rel_tol = 1e-10);
    ~CoupledStepper();
    CoupledStepper(CoupledStepper&&) noexcept;
    CoupledStepper& operator=(CoupledStepper&&) noexcept;

    /// State at t_n + dt. `step_index` only labels a BlowupError.
    FieldPair step(const FieldPair& state, double t_n, const CoupledData& data, std::size_t step_index = 0) const;

    /// The assembled (unconstrained) left-hand block operator.
    const SparseMatrix& lhs() const { return lhs_; }
    const SparseMatrix& rhs_operator() const { return rhs_; }
    double dt() const { return dt_; }

private:
    const Mesh* mesh_;
    double dt_;
    SparseMatrix mass_;
    SparseMatrix lhs_;
    SparseMatrix rhs_;
    ConstraintLift lift_;
    std::unique_ptr<GeneralSolver> solver_;
};

/// Initial state: g_l at the nodes, boundary nodes set to bc(x, 0).
FieldPair initial_state(const Mesh& mesh, const CoupledData& data);

/// N = round(t_end/dt) steps from the initial state.
MacroTrajectory integrate(const Mesh& mesh, const CoupledOperators& ops, const CoupledData& data, double dt,
                          double t_end, double rel_tol = 1e-10);

/// One step of the homogenized system (assembles and factors on every call).
FieldPair step_homogenized(const Mesh& macro_mesh, const FieldPair& state, double t_n, double dt,
                           const EffectiveCoefficients& eff, const CoupledData& data, double rel_tol = 1e-10);

CoupledData run_data(const RunConfig& config);

/// Homogenized trajectory on the config's macro mesh.
MacroTrajectory solve_homogenized(const RunConfig& config, const EffectiveCoefficients& eff);
MacroTrajectory solve_homogenized(const RunConfig& config, const EffectiveCoefficients& eff, const Mesh& macro_mesh);

/// step,time,min_u1,max_u1,min_u2,max_u2
void write_trajectory_summary(std::ostream& out, const MacroTrajectory& traj);

/// Text archive in the cell-archive style; values round-trip exactly.
void write_trajectory_archive(std::ostream& out, const MacroTrajectory& traj);
MacroTrajectory read_trajectory_archive(std::istream& in);

}  // namespace homs
