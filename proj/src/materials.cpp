#include "homs/materials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "homs/error.hpp"

namespace homs {

namespace {

const char* phase_name(Phase p) { return p == Phase::matrix ? "matrix" : "inclusion"; }

}  // namespace

void MaterialSpec::validate() const {
    for (int l = 0; l < 2; ++l) {
        for (Phase p : {Phase::matrix, Phase::inclusion}) {
            const std::string suffix = std::to_string(l + 1) + "." + phase_name(p);
            const double c = capacity[l][p];
            if (!(c > 0.0) || !std::isfinite(c))
                throw InvalidMaterial("material.c" + suffix + " must be positive");
            const Tensor2& k = permeability[l][p];
            if (!std::isfinite(k.xx) || !std::isfinite(k.xy) || !std::isfinite(k.yy) || !(k.min_eigenvalue() > 0.0))
                throw InvalidMaterial("material.k" + suffix + " must be positive definite");
            const double q = exchange[l][p];
            if (!(q >= 0.0) || !std::isfinite(q))
                throw InvalidMaterial("material.Q" + suffix + " must be non-negative");
        }
    }
    geometry.validate();
}

double MaterialSpec::min_permeability(int l) const {
    return std::min(permeability[l].matrix.min_eigenvalue(), permeability[l].inclusion.min_eigenvalue());
}

std::string MaterialSpec::canonical() const {
    std::ostringstream os;
    os.precision(17);
    for (int l = 0; l < 2; ++l) {
        for (Phase p : {Phase::matrix, Phase::inclusion}) {
            const Tensor2& k = permeability[l][p];
            os << "c" << l << phase_name(p) << "=" << capacity[l][p] << ";k=" << k.xx << "," << k.xy << ","
               << k.yy << ";Q=" << exchange[l][p] << ";";
        }
    }
    os << "geom=" << geometry.describe();
    return os.str();
}

MaterialSpec example1_materials() {
    MaterialSpec m;
    m.capacity[0] = {5.0, 2.0};
    m.capacity[1] = {4.5, 1.5};
    m.permeability[0] = {Tensor2::isotropic(100.0), Tensor2::isotropic(1.0)};
    m.permeability[1] = {Tensor2::isotropic(50.0), Tensor2::isotropic(1.0)};
    m.exchange[0] = {20.0, 0.25};
    m.exchange[1] = {20.0, 0.25};
    m.geometry = InclusionSpec::disk({0.5, 0.5}, 0.25);
    return m;
}

MaterialSpec example3_materials() {
    MaterialSpec m;
    m.capacity[0] = {50.0, 25.0};
    m.capacity[1] = {30.0, 10.0};
    m.permeability[0] = {Tensor2::isotropic(100.0), Tensor2::isotropic(4.0)};
    m.permeability[1] = {Tensor2::isotropic(50.0), Tensor2::isotropic(5.0)};
    m.exchange[0] = {30.0, 30.0};
    m.exchange[1] = {30.0, 30.0};
    m.geometry = InclusionSpec::axis_cross(0.125);
    return m;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace homs
