#pragma once

#include <vector>

#include "homs/config.hpp"
#include "homs/macro_solver.hpp"
#include "homs/materials.hpp"
#include "homs/mesh.hpp"

namespace homs {

/// Per-element coefficients of the ε-periodic medium on a fine mesh.
struct FineCoefficients {
    std::array<std::vector<double>, 2> capacity;
    std::array<std::vector<Tensor2>, 2> permeability;
    std::array<std::vector<double>, 2> exchange;  // Q_l(y), without the 1/ε factor
};

/// Fine mesh of the config: n_fine subdivisions tagged at the wrapped element centroids.
Mesh build_fine_mesh(const RunConfig& config);

/// Reads phase tags of an ε-tagged fine mesh and expands the material values.
FineCoefficients fine_coefficients(const Mesh& fine_mesh, const MaterialSpec& materials);

/// Operators of the original two-continuum problem with exchange (1/ε)Q_l(y)(u_o - u_l).
CoupledOperators multiscale_operators(const Mesh& fine_mesh, const FineCoefficients& coeff, double eps);

/// Reference trajectory on the config's fine mesh.
MacroTrajectory solve_multiscale(const RunConfig& config);
MacroTrajectory solve_multiscale(const RunConfig& config, const Mesh& fine_mesh);

}  // namespace homs
