#pragma once

#include <array>
#include <iosfwd>

#include "homs/cells.hpp"
#include "homs/materials.hpp"
#include "homs/mesh.hpp"
#include "homs/types.hpp"

namespace homs {

/// Constant coefficients of the homogenized two-continuum system.
struct EffectiveCoefficients {
    std::array<double, 2> c_star{};
    std::array<Matrix2, 2> kappa_star{};
    std::array<Vec2, 2> kbar1{};  // K̄^{l*}_{1i}
    std::array<Vec2, 2> kbar2{};  // K̄^{l*}_{2i}
    std::array<double, 2> q_star{};
};

/// Exact element-wise integration of the homogenized coefficient formulas from the
/// first-order cell functions.
EffectiveCoefficients compute_effective(const Mesh& cell_mesh, const MaterialSpec& materials,
                                        const CellSolutions& first, const CellOptions& options = {});

/// κ* through the energy form ∫ (e_i + ∇N^i)·κ (e_j + ∇N^j) dY.
std::array<Matrix2, 2> kappa_star_energy(const Mesh& cell_mesh, const MaterialSpec& materials,
                                         const CellSolutions& first);

/// CSV rows: name,continuum,i,j,value.
void write_effective_csv(std::ostream& out, const EffectiveCoefficients& eff);
EffectiveCoefficients read_effective_csv(std::istream& in);

}  // namespace homs
