#include "homs/reconstruct.hpp"

#include "homs/error.hpp"
#include "homs/fem.hpp"

namespace homs {

std::string order_name(Order order) {
    switch (order) {
    case Order::homogenized: return "homogenized";
    case Order::foms: return "FOMS";
    case Order::homs: return "HOMS";
    }
    return "?";
}

Reconstructor::Reconstructor(const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps)
    : macro_(&macro_mesh), cell_(&cell_mesh), fine_(&fine_mesh), eps_(eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    macro_loc_.reserve(fine_mesh.num_nodes());
    cell_loc_.reserve(fine_mesh.num_nodes());
    for (const Point& x : fine_mesh.nodes()) {
        macro_loc_.push_back(macro_mesh.locate(x));
        cell_loc_.push_back(cell_mesh.locate(wrap_to_cell(x, eps)));
    }
}

ExpansionTerms Reconstructor::terms(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                    bool with_second_order) const {
    const std::size_t k = traj.index_of(t);
    const auto& u = traj.u[k];
    const auto nm = static_cast<Index>(macro_->num_nodes());
    if (u[0].size() != nm || u[1].size() != nm) throw PreconditionError("trajectory does not match the macro mesh");
    if (cells.n_cell != cell_->subdivisions()) throw PreconditionError("cell solutions do not match the cell mesh");
    if (with_second_order && !cells.has_second_order)
        throw PreconditionError("second-order cell functions are required");
    if (with_second_order && (traj.dudt.size() != traj.size() || traj.dudt[k][0].size() != nm))
        throw PreconditionError("time derivatives are missing from the trajectory");

    const std::array<GradientField, 2> grad{recover_gradient(*macro_, u[0]), recover_gradient(*macro_, u[1])};
    std::array<HessianField, 2> hess;
    if (with_second_order) hess = {recover_hessian(*macro_, u[0]), recover_hessian(*macro_, u[1])};

    const auto nf = static_cast<Index>(fine_->num_nodes());
    ExpansionTerms out;
    out.time = traj.times[k];
    for (int l = 0; l < 2; ++l) {
        out.u0[l] = Vector(nf);
        out.first[l] = Vector(nf);
        if (with_second_order) out.second[l] = Vector(nf);
    }

    auto macro = [&](const Vector& f, Index i) { return interpolate(*macro_, f, macro_loc_[i]); };
    auto cell = [&](const Vector& f, Index i) { return interpolate(*cell_, f, cell_loc_[i]); };

    for (Index i = 0; i < nf; ++i) {
        const std::array<double, 2> val{macro(u[0], i), macro(u[1], i)};
        const std::array<Vec2, 2> du{Vec2{macro(grad[0].dx, i), macro(grad[0].dy, i)},
                                     Vec2{macro(grad[1].dx, i), macro(grad[1].dy, i)}};
        for (int l = 0; l < 2; ++l) {
            const int o = 1 - l;
            const auto& cf = cells.continuum[l];
            const double jump = val[o] - val[l];
            out.u0[l][i] = val[l];
            out.first[l][i] = cell(cf.N[0], i) * du[l][0] + cell(cf.N[1], i) * du[l][1] + cell(cf.M, i) * jump;
            if (!with_second_order) continue;
            const auto& h = hess[l];
            const Matrix2 d2{{{macro(h.xx, i), macro(h.xy, i)}, {macro(h.yx, i), macro(h.yy, i)}}};
            double b = cell(cf.G, i) * macro(traj.dudt[k][l], i) + cell(cf.K, i) * jump;
            for (int a = 0; a < 2; ++a) {
                b += cell(cf.C[a], i) * du[l][a] + cell(cf.F[a], i) * du[o][a];
                for (int c = 0; c < 2; ++c) b += cell(cf.NN[a][c], i) * d2[a][c];
            }
            out.second[l][i] = b;
        }
    }
    return out;
}

MultiscaleField Reconstructor::combine(const ExpansionTerms& terms, Order order, double eps) {
    MultiscaleField f;
    f.order = order;
    f.time = terms.time;
    f.eps = eps;
    for (int l = 0; l < 2; ++l) {
        f.u[l] = terms.u0[l];
        if (order == Order::homogenized) continue;
        f.u[l] += eps * terms.first[l];
        if (order == Order::foms) continue;
        if (terms.second[l].size() != terms.u0[l].size())
            throw PreconditionError("second-order terms were not computed");
        f.u[l] += (eps * eps) * terms.second[l];
    }
    return f;
}

MultiscaleField Reconstructor::reconstruct(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                           Order order) const {
    return combine(terms(traj, t, cells, order == Order::homs), order, eps_);
}

MultiscaleField reconstruct_homogenized(const MacroTrajectory& traj, double t, const Mesh& macro_mesh,
                                        const Mesh& fine_mesh) {
    const std::size_t k = traj.index_of(t);
    MultiscaleField f;
    f.time = traj.times[k];
    for (int l = 0; l < 2; ++l) {
        f.u[l] = Vector(static_cast<Index>(fine_mesh.num_nodes()));
        for (std::size_t i = 0; i < fine_mesh.num_nodes(); ++i)
            f.u[l][static_cast<Index>(i)] = interpolate(macro_mesh, traj.u[k][l], fine_mesh.node(i));
    }
    return f;
}

MultiscaleField reconstruct_foms(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                 const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps) {
    return Reconstructor(macro_mesh, cell_mesh, fine_mesh, eps).reconstruct(traj, t, cells, Order::foms);
}

MultiscaleField reconstruct_homs(const MacroTrajectory& traj, double t, const CellSolutions& cells,
                                 const Mesh& macro_mesh, const Mesh& cell_mesh, const Mesh& fine_mesh, double eps) {
    return Reconstructor(macro_mesh, cell_mesh, fine_mesh, eps).reconstruct(traj, t, cells, Order::homs);
}

}  // namespace homs
