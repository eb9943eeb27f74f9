#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "homs/fem.hpp"
#include "homs/materials.hpp"
#include "homs/mesh.hpp"

namespace homs {

struct EffectiveCoefficients;

/// Switches for the places where the cell equations admit two readings.
struct CellOptions {
    double rel_tol = 1e-10;
    SpdSolver::Method method = SpdSolver::Method::cholesky;
    /// true: the C_1 problem uses K̄^{1*}_{1α}; false: K̄^{1*}_{2α}, matching the
    /// own-gradient drift of the first homogenized equation.
    bool strict_signs = true;
    /// true: K̄^{l*}_{2i} uses ∂M_2 instead of ∂M_1 in its flux part.
    bool k2bar_uses_M2 = false;
};

/// The 13 auxiliary cell functions of one continuum.
struct ContinuumCellFunctions {
    std::array<NodalField, 2> N;                 // N^{α}
    NodalField M;
    NodalField G;
    std::array<std::array<NodalField, 2>, 2> NN;  // N^{α1 α2}
    std::array<NodalField, 2> C;                 // C^{α}
    std::array<NodalField, 2> F;                 // F^{α}
    NodalField K;
};

struct CellSolutions {
    int n_cell = 0;
    bool has_second_order = false;
    std::array<ContinuumCellFunctions, 2> continuum;

    /// Named view of every solved field ("l1.N1", "l2.NN12", ...). 13 per continuum once the
    /// second-order problems are solved, 3 before.
    std::vector<NamedField> fields() const;
};

/// N_l^{α} and M_l for both continua.
CellSolutions solve_first_order(const Mesh& cell_mesh, const MaterialSpec& materials,
                                const CellOptions& options = {});

/// Adds G_l, N_l^{α1α2}, C_l^{α}, F_l^{α}, K_l to a first-order solution.
CellSolutions solve_second_order(const Mesh& cell_mesh, const MaterialSpec& materials, const CellSolutions& first,
                                 const EffectiveCoefficients& eff, const CellOptions& options = {});

/// Weak-form right-hand sides, exposed for residual checks. `which` names a field as in
/// CellSolutions::fields() without the continuum prefix.
Vector cell_rhs(const Mesh& cell_mesh, const MaterialSpec& materials, const CellSolutions& cells,
                const EffectiveCoefficients* eff, int continuum, const std::string& which,
                const CellOptions& options = {});

/// Text archive: a header line per field followed by one CSV value per node.
void write_cell_archive(std::ostream& out, const CellSolutions& cells);
CellSolutions read_cell_archive(std::istream& in);

}  // namespace homs
