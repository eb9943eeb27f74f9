#include "homs/cells.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "homs/effective.hpp"
#include "homs/error.hpp"
#include "homs/io.hpp"

namespace homs {

namespace {

// Every cell problem reads  div(κ_l ∇X) = f + div(g)  with X = 0 on ∂Y. Its weak form is
//   ∫ κ_l ∇X·∇φ = -∫ f φ + ∫ g·∇φ,
// so divergence-form terms never need a derivative of the piecewise-constant κ.

struct ElementData {
    std::vector<Tensor2> kappa;
    std::vector<double> capacity;
    std::vector<double> exchange;
};

ElementData element_data(const Mesh& mesh, const MaterialSpec& m, int l) {
    return {per_element(mesh, m.permeability[l]), per_element(mesh, m.capacity[l]), per_element(mesh, m.exchange[l])};
}

Vec2 element_gradient(const Mesh& mesh, std::size_t e, const Vector& field) {
    const auto& t = mesh.element(e);
    const auto g = mesh.basis_gradients(e);
    Vec2 out{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        out[0] += field[static_cast<Index>(t[a])] * g[a][0];
        out[1] += field[static_cast<Index>(t[a])] * g[a][1];
    }
    return out;
}

// κ_{·a} scaled by s, per element.
std::vector<Vec2> kappa_column(const ElementData& d, int a, double s) {
    std::vector<Vec2> out(d.kappa.size());
    for (std::size_t e = 0; e < out.size(); ++e) out[e] = {s * d.kappa[e](0, a), s * d.kappa[e](1, a)};
    return out;
}

// Σ_j κ_{a j} ∂M/∂y_j per element.
std::vector<double> kappa_row_dot_grad(const Mesh& mesh, const ElementData& d, int a, const Vector& field) {
    std::vector<double> out(mesh.num_elements());
    for (std::size_t e = 0; e < out.size(); ++e) {
        const Vec2 g = element_gradient(mesh, e, field);
        out[e] = d.kappa[e](a, 0) * g[0] + d.kappa[e](a, 1) * g[1];
    }
    return out;
}

std::vector<double> scaled(std::vector<double> v, double s) {
    for (double& x : v) x *= s;
    return v;
}

void require_first_order(const Mesh& mesh, const CellSolutions& cells) {
    for (const auto& c : cells.continuum) {
        for (const auto& f : {&c.N[0], &c.N[1], &c.M}) {
            if (static_cast<std::size_t>(f->size()) != mesh.num_nodes())
                throw PreconditionError("first-order cell functions are missing or belong to another mesh");
        }
    }
}

const EffectiveCoefficients& require_eff(const EffectiveCoefficients* eff) {
    if (eff == nullptr) throw PreconditionError("second-order cell problems need effective coefficients");
    return *eff;
}

}  // namespace

Vector cell_rhs(const Mesh& mesh, const MaterialSpec& materials, const CellSolutions& cells,
                const EffectiveCoefficients* eff, int l, const std::string& which, const CellOptions& options) {
    const ElementData d = element_data(mesh, materials, l);
    const int other = 1 - l;
    const auto& own = cells.continuum[l];
    Vector rhs = Vector::Zero(static_cast<Index>(mesh.num_nodes()));
    const std::size_t ne = mesh.num_elements();

    if (which == "N1" || which == "N2") {
        const int a = which[1] - '1';
        add_load_flux(mesh, kappa_column(d, a, -1.0), nullptr, rhs);
        return rhs;
    }
    if (which == "M") {
        add_load_constant(mesh, scaled(d.exchange, -1.0), rhs);
        return rhs;
    }

    require_first_order(mesh, cells);
    const EffectiveCoefficients& e = require_eff(eff);

    if (which == "G") {
        std::vector<double> f(ne);
        for (std::size_t k = 0; k < ne; ++k) f[k] = -(d.capacity[k] - e.c_star[l]);
        add_load_constant(mesh, f, rhs);
        return rhs;
    }
    if (which.size() == 4 && which.rfind("NN", 0) == 0) {
        const int a = which[2] - '1';
        const int b = which[3] - '1';
        const auto drift = kappa_row_dot_grad(mesh, d, a, own.N[b]);
        std::vector<double> f(ne);
        for (std::size_t k = 0; k < ne; ++k) f[k] = -(e.kappa_star[l][a][b] - d.kappa[k](a, b) - drift[k]);
        add_load_constant(mesh, f, rhs);
        add_load_flux(mesh, kappa_column(d, a, -1.0), &own.N[b], rhs);
        return rhs;
    }
    if (which == "C1" || which == "C2") {
        const int a = which[1] - '1';
        // strict: continuum 1 uses K̄^{1*}_{1α}, continuum 2 uses K̄^{2*}_{1α}
        double kbar = e.kbar1[l][a];
        if (l == 0 && !options.strict_signs) kbar = e.kbar2[0][a];
        const auto flux = kappa_row_dot_grad(mesh, d, a, own.M);
        std::vector<double> f(ne);
        for (std::size_t k = 0; k < ne; ++k) f[k] = -(flux[k] - kbar);
        add_load_constant(mesh, f, rhs);
        add_load_p1(mesh, scaled(d.exchange, -1.0), own.N[a], rhs);
        add_load_flux(mesh, kappa_column(d, a, 1.0), &own.M, rhs);
        return rhs;
    }
    if (which == "F1" || which == "F2") {
        const int a = which[1] - '1';
        const double kbar = l == 0 ? e.kbar1[0][a] : e.kbar2[1][a];
        const auto flux = kappa_row_dot_grad(mesh, d, a, own.M);
        std::vector<double> f(ne);
        for (std::size_t k = 0; k < ne; ++k) f[k] = -(kbar - flux[k]);
        add_load_constant(mesh, f, rhs);
        add_load_p1(mesh, d.exchange, cells.continuum[other].N[a], rhs);
        add_load_flux(mesh, kappa_column(d, a, -1.0), &own.M, rhs);
        return rhs;
    }
    if (which == "K") {
        add_load_constant(mesh, std::vector<double>(ne, -e.q_star[l]), rhs);
        const Vector msum = cells.continuum[0].M + cells.continuum[1].M;
        add_load_p1(mesh, scaled(d.exchange, -1.0), msum, rhs);
        return rhs;
    }
    throw InvalidArgument("unknown cell function '" + which + "'");
}

namespace {

std::vector<std::size_t> boundary_list(const Mesh& mesh) {
    return {mesh.boundary_nodes().begin(), mesh.boundary_nodes().end()};
}

}  // namespace

CellSolutions solve_first_order(const Mesh& mesh, const MaterialSpec& materials, const CellOptions& options) {
    materials.validate();
    CellSolutions out;
    out.n_cell = mesh.subdivisions();
    for (int l = 0; l < 2; ++l) {
        const SpdSolver solver(assemble_stiffness(mesh, materials.permeability[l]), boundary_list(mesh),
                               options.method, options.rel_tol);
        auto& c = out.continuum[l];
        c.N[0] = solver.solve(cell_rhs(mesh, materials, out, nullptr, l, "N1", options));
        c.N[1] = solver.solve(cell_rhs(mesh, materials, out, nullptr, l, "N2", options));
        c.M = solver.solve(cell_rhs(mesh, materials, out, nullptr, l, "M", options));
    }
    return out;
}

CellSolutions solve_second_order(const Mesh& mesh, const MaterialSpec& materials, const CellSolutions& first,
                                 const EffectiveCoefficients& eff, const CellOptions& options) {
    require_first_order(mesh, first);
    materials.validate();
    CellSolutions out = first;
    for (int l = 0; l < 2; ++l) {
        const SpdSolver solver(assemble_stiffness(mesh, materials.permeability[l]), boundary_list(mesh),
                               options.method, options.rel_tol);
        auto rhs = [&](const char* which) { return cell_rhs(mesh, materials, first, &eff, l, which, options); };
        auto& c = out.continuum[l];
        c.G = solver.solve(rhs("G"));
        c.NN[0][0] = solver.solve(rhs("NN11"));
        c.NN[0][1] = solver.solve(rhs("NN12"));
        c.NN[1][0] = solver.solve(rhs("NN21"));
        c.NN[1][1] = solver.solve(rhs("NN22"));
        c.C[0] = solver.solve(rhs("C1"));
        c.C[1] = solver.solve(rhs("C2"));
        c.F[0] = solver.solve(rhs("F1"));
        c.F[1] = solver.solve(rhs("F2"));
        c.K = solver.solve(rhs("K"));
    }
    out.has_second_order = true;
    return out;
}

std::vector<NamedField> CellSolutions::fields() const {
    std::vector<NamedField> out;
    auto view = [](const NodalField& f) { return std::span<const double>(f.data(), static_cast<std::size_t>(f.size())); };
    for (int l = 0; l < 2; ++l) {
        const std::string p = "l" + std::to_string(l + 1) + ".";
        const auto& c = continuum[l];
        out.push_back({p + "N1", view(c.N[0])});
        out.push_back({p + "N2", view(c.N[1])});
        out.push_back({p + "M", view(c.M)});
        if (!has_second_order) continue;
        out.push_back({p + "G", view(c.G)});
        out.push_back({p + "NN11", view(c.NN[0][0])});
        out.push_back({p + "NN12", view(c.NN[0][1])});
        out.push_back({p + "NN21", view(c.NN[1][0])});
        out.push_back({p + "NN22", view(c.NN[1][1])});
        out.push_back({p + "C1", view(c.C[0])});
        out.push_back({p + "C2", view(c.C[1])});
        out.push_back({p + "F1", view(c.F[0])});
        out.push_back({p + "F2", view(c.F[1])});
        out.push_back({p + "K", view(c.K)});
    }
    return out;
}

void write_cell_archive(std::ostream& out, const CellSolutions& cells) {
    out << "# homs cell archive v1\n";
    out << "n_cell," << cells.n_cell << "\n";
    out << "second_order," << (cells.has_second_order ? 1 : 0) << "\n";
    for (const auto& f : cells.fields()) {
        out << "field," << f.name << "," << f.values.size() << "\n";
        for (double v : f.values) out << format_double(v) << "\n";
    }
    if (!out) throw IoError("failed writing cell archive");
}

CellSolutions read_cell_archive(std::istream& in) {
    std::string line;
    auto next = [&]() -> std::string {
        if (!std::getline(in, line)) throw IoError("cell archive ended early");
        return line;
    };
    if (next().rfind("# homs cell archive v1", 0) != 0) throw IoError("not a cell archive");
    auto header = [&](const char* key) {
        const auto parts = split(next(), ',');
        if (parts.size() != 2 || parts[0] != key) throw IoError(std::string("cell archive: expected ") + key);
        return std::stoi(parts[1]);
    };
    CellSolutions cells;
    cells.n_cell = header("n_cell");
    cells.has_second_order = header("second_order") != 0;

    auto slot = [&cells](const std::string& name) -> NodalField& {
        if (name.size() < 4 || name[0] != 'l' || (name[1] != '1' && name[1] != '2') || name[2] != '.')
            throw IoError("cell archive: bad field name '" + name + "'");
        auto& c = cells.continuum[name[1] - '1'];
        const std::string f = name.substr(3);
        if (f == "N1") return c.N[0];
        if (f == "N2") return c.N[1];
        if (f == "M") return c.M;
        if (f == "G") return c.G;
        if (f == "NN11") return c.NN[0][0];
        if (f == "NN12") return c.NN[0][1];
        if (f == "NN21") return c.NN[1][0];
        if (f == "NN22") return c.NN[1][1];
        if (f == "C1") return c.C[0];
        if (f == "C2") return c.C[1];
        if (f == "F1") return c.F[0];
        if (f == "F2") return c.F[1];
        if (f == "K") return c.K;
        throw IoError("cell archive: unknown field '" + name + "'");
    };
    const std::size_t expected = cells.has_second_order ? 26 : 6;
    for (std::size_t k = 0; k < expected; ++k) {
        const auto parts = split(next(), ',');
        if (parts.size() != 3 || parts[0] != "field") throw IoError("cell archive: expected a field header");
        NodalField& target = slot(parts[1]);
        const auto count = static_cast<Index>(std::stoll(parts[2]));
        target.resize(count);
        for (Index i = 0; i < count; ++i) target[i] = parse_double(next());
    }
    return cells;
}

}  // namespace homs
