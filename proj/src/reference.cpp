#include "homs/reference.hpp"

#include "homs/error.hpp"
#include "homs/fem.hpp"

namespace homs {

Mesh build_fine_mesh(const RunConfig& config) {
    config.validate();
    return build_unit_square_mesh(config.n_fine, config.materials.geometry, MeshOptions{config.pattern, config.eps});
}

FineCoefficients fine_coefficients(const Mesh& mesh, const MaterialSpec& materials) {
    materials.validate();
    FineCoefficients c;
    for (int l = 0; l < 2; ++l) {
        c.capacity[l] = per_element(mesh, materials.capacity[l]);
        c.permeability[l] = per_element(mesh, materials.permeability[l]);
        c.exchange[l] = per_element(mesh, materials.exchange[l]);
    }
    return c;
}

CoupledOperators multiscale_operators(const Mesh& mesh, const FineCoefficients& coeff, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    CoupledOperators ops;
    ops.mass = assemble_mass(mesh, 1.0);
    for (int l = 0; l < 2; ++l) {
        if (coeff.capacity[l].size() != mesh.num_elements() || coeff.permeability[l].size() != mesh.num_elements() ||
            coeff.exchange[l].size() != mesh.num_elements())
            throw PreconditionError("fine coefficients do not match the mesh");
        ops.capacity[l] = assemble_mass(mesh, coeff.capacity[l]);
        ops.stiffness[l] = assemble_stiffness(mesh, coeff.permeability[l]);
        std::vector<double> r(coeff.exchange[l]);
        for (double& v : r) v /= eps;
        ops.exchange[l] = assemble_reaction(mesh, r);
    }
    return ops;
}

MacroTrajectory solve_multiscale(const RunConfig& config, const Mesh& fine_mesh) {
    config.validate();
    if (fine_mesh.subdivisions() % config.periods() != 0)
        throw PreconditionError("fine mesh does not resolve the period");
    const auto ops = multiscale_operators(fine_mesh, fine_coefficients(fine_mesh, config.materials), config.eps);
    return integrate(fine_mesh, ops, run_data(config), config.dt, config.num_steps() * config.dt, config.solver_tol);
}

MacroTrajectory solve_multiscale(const RunConfig& config) { return solve_multiscale(config, build_fine_mesh(config)); }

}  // namespace homs
