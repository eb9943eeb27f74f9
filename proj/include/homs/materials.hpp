#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "homs/mesh.hpp"
#include "homs/types.hpp"

namespace homs {

/// Two-phase coefficients of both continua plus the unit-cell geometry that places them.
struct MaterialSpec {
    std::array<PhaseValues<double>, 2> capacity{};      // c_l
    std::array<PhaseValues<Tensor2>, 2> permeability{};  // κ_l
    std::array<PhaseValues<double>, 2> exchange{};      // Q_l
    InclusionSpec geometry = InclusionSpec::disk({0.5, 0.5}, 0.25);

    /// Throws InvalidMaterial naming the offending coefficient (e.g. "material.k1.matrix").
    void validate() const;

    /// Smallest eigenvalue over both phases of κ_l.
    double min_permeability(int l) const;

    /// Stable text form used for cache keys.
    std::string canonical() const;
};

/// Materials of the porous-media example: matrix / porous values of c, κ, Q.
MaterialSpec example1_materials();
/// Materials of the channel example.
MaterialSpec example3_materials();

/// FNV-1a, 64 bit. Used to key on-disk caches.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace homs
