#pragma once

#include <string>
#include <vector>

#include "homs/cells.hpp"
#include "homs/macro_solver.hpp"
#include "homs/mesh.hpp"

namespace homs {

enum class Order { homogenized, foms, homs };

std::string order_name(Order order);

/// Both continua on the fine mesh at one time.
struct MultiscaleField {
    Order order = Order::homogenized;
    double time = 0.0;
    double eps = 0.0;
    FieldPair u;
};

/// The pieces of the asymptotic expansion at the fine nodes:
///   FOMS = u0 + ε·first,   HOMS = FOMS + ε²·second.
struct ExpansionTerms {
    double time = 0.0;
    FieldPair u0;
    FieldPair first;
    FieldPair second;  // empty unless requested
};

/// Maps fine nodes into the macro mesh and (through wrap_to_cell) into the cell mesh once,
/// so every reconstruction is a per-node sum.
class Reconstructor {
public:
    Reconstructor(const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps);

    /// Throws PreconditionError when t is not a trajectory time or inputs mismatch the meshes.
    ExpansionTerms terms(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                         bool with_second_order) const;

    /// u0 + ε·first (+ ε²·second) with the ε given here.
    static MultiscaleField combine(const ExpansionTerms& terms, Order order, double eps);

    MultiscaleField reconstruct(const MacroTrajectory& traj, double t, const CellSolutions& cells, Order order) const;

    double eps() const { return eps_; }
    const Mesh& fine_mesh() const { return *fine_; }

private:
    const Mesh* macro_;
    const Mesh* cell_;
    const Mesh* fine_;
    double eps_;
    std::vector<Location> macro_loc_;
    std::vector<Location> cell_loc_;
};

MultiscaleField reconstruct_homogenized(const MacroTrajectory& traj, double t, const Mesh& macro_mesh,
                                        const Mesh& fine_mesh);
MultiscaleField reconstruct_foms(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                 const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps);
MultiscaleField reconstruct_homs(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                 const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps);

}  // namespace homs
