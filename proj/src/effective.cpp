#include "homs/effective.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "homs/error.hpp"
#include "homs/io.hpp"

namespace homs {

namespace {

Vec2 grad_on(const Mesh& mesh, std::size_t e, const Vector& field) {
    const auto& t = mesh.element(e);
    const auto g = mesh.basis_gradients(e);
    Vec2 out{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        out[0] += field[static_cast<Index>(t[a])] * g[a][0];
        out[1] += field[static_cast<Index>(t[a])] * g[a][1];
    }
    return out;
}

double mean_on(const Mesh& mesh, std::size_t e, const Vector& field) {
    const auto& t = mesh.element(e);
    return (field[static_cast<Index>(t[0])] + field[static_cast<Index>(t[1])] + field[static_cast<Index>(t[2])]) /
           3.0;
}

void check_inputs(const Mesh& mesh, const CellSolutions& first) {
    for (const auto& c : first.continuum)
        for (const auto* f : {&c.N[0], &c.N[1], &c.M})
            if (static_cast<std::size_t>(f->size()) != mesh.num_nodes())
                throw PreconditionError("cell functions do not match the cell mesh");
}

}  // namespace

EffectiveCoefficients compute_effective(const Mesh& mesh, const MaterialSpec& materials, const CellSolutions& first,
                                        const CellOptions& options) {
    check_inputs(mesh, first);
    EffectiveCoefficients eff;
    const auto& m1 = first.continuum[0].M;
    const auto& m2 = first.continuum[1].M;
    for (int l = 0; l < 2; ++l) {
        const auto& own = first.continuum[l];
        const Vector& m_for_k2 = options.k2bar_uses_M2 ? m2 : m1;
        Matrix2 kappa{};
        Vec2 kb1{0.0, 0.0};
        Vec2 kb2{0.0, 0.0};
        double c = 0.0;
        double q = 0.0;
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            const double area = mesh.signed_area(e);
            const Phase p = mesh.tag(e);
            const Tensor2& k = materials.permeability[l][p];
            const double ql = materials.exchange[l][p];
            c += area * materials.capacity[l][p];
            const std::array<Vec2, 2> gn{grad_on(mesh, e, own.N[0]), grad_on(mesh, e, own.N[1])};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    kappa[i][j] += area * (k(i, j) + k(i, 0) * gn[j][0] + k(i, 1) * gn[j][1]);
            const Vec2 gm1 = grad_on(mesh, e, m1);
            const Vec2 gmk = grad_on(mesh, e, m_for_k2);
            for (int i = 0; i < 2; ++i) {
                kb1[i] += area * (k(i, 0) * gm1[0] + k(i, 1) * gm1[1] +
                                  ql * mean_on(mesh, e, first.continuum[1].N[i]));
                kb2[i] += area * (k(i, 0) * gmk[0] + k(i, 1) * gmk[1] +
                                  ql * mean_on(mesh, e, first.continuum[0].N[i]));
            }
            q -= area * ql * (mean_on(mesh, e, m1) + mean_on(mesh, e, m2));
        }
        eff.c_star[l] = c;
        eff.kappa_star[l] = kappa;
        eff.kbar1[l] = kb1;
        eff.kbar2[l] = kb2;
        eff.q_star[l] = q;
    }
    return eff;
}

std::array<Matrix2, 2> kappa_star_energy(const Mesh& mesh, const MaterialSpec& materials, const CellSolutions& first) {
    check_inputs(mesh, first);
    std::array<Matrix2, 2> out{};
    for (int l = 0; l < 2; ++l) {
        const auto& own = first.continuum[l];
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            const double area = mesh.signed_area(e);
            const Tensor2& k = materials.permeability[l][mesh.tag(e)];
            std::array<Vec2, 2> v{grad_on(mesh, e, own.N[0]), grad_on(mesh, e, own.N[1])};
            v[0][0] += 1.0;
            v[1][1] += 1.0;
            for (int i = 0; i < 2; ++i) {
                const Vec2 kv{k.xx * v[i][0] + k.xy * v[i][1], k.xy * v[i][0] + k.yy * v[i][1]};
                for (int j = 0; j < 2; ++j) out[l][i][j] += area * (kv[0] * v[j][0] + kv[1] * v[j][1]);
            }
        }
    }
    return out;
}

void write_effective_csv(std::ostream& out, const EffectiveCoefficients& eff) {
    out << "name,continuum,i,j,value\n";
    for (int l = 0; l < 2; ++l) {
        const int cl = l + 1;
        out << "c_star," << cl << ",0,0," << format_double(eff.c_star[l]) << "\n";
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out << "kappa_star," << cl << "," << i + 1 << "," << j + 1 << ","
                    << format_double(eff.kappa_star[l][i][j]) << "\n";
        for (int i = 0; i < 2; ++i) out << "kbar1," << cl << "," << i + 1 << ",0," << format_double(eff.kbar1[l][i]) << "\n";
        for (int i = 0; i < 2; ++i) out << "kbar2," << cl << "," << i + 1 << ",0," << format_double(eff.kbar2[l][i]) << "\n";
        out << "q_star," << cl << ",0,0," << format_double(eff.q_star[l]) << "\n";
    }
}

EffectiveCoefficients read_effective_csv(std::istream& in) {
    EffectiveCoefficients eff;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "name,continuum,i,j,value")
        throw IoError("effective-coefficient CSV has an unexpected header");
    int rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto parts = split(trim(line), ',');
        if (parts.size() != 5) throw IoError("effective-coefficient CSV: malformed row '" + line + "'");
        const int l = std::stoi(parts[1]) - 1;
        const int i = std::stoi(parts[2]) - 1;
        const int j = std::stoi(parts[3]) - 1;
        const double v = parse_double(parts[4]);
        if (l < 0 || l > 1) throw IoError("effective-coefficient CSV: bad continuum");
        const std::string& name = parts[0];
        if (name == "c_star") eff.c_star[l] = v;
        else if (name == "q_star") eff.q_star[l] = v;
        else if (name == "kappa_star" && i >= 0 && i < 2 && j >= 0 && j < 2) eff.kappa_star[l][i][j] = v;
        else if (name == "kbar1" && i >= 0 && i < 2) eff.kbar1[l][i] = v;
        else if (name == "kbar2" && i >= 0 && i < 2) eff.kbar2[l][i] = v;
        else throw IoError("effective-coefficient CSV: unknown row '" + line + "'");
        ++rows;
    }
    if (rows != 20) throw IoError("effective-coefficient CSV: expected 20 rows");
    return eff;
}

}  // namespace homs
