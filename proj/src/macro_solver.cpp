#include "homs/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "homs/error.hpp"
#include "homs/io.hpp"

namespace homs {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& t, const SparseMatrix& m, Index row0, Index col0, double scale) {
    if (m.size() == 0 || scale == 0.0) return;
    for (Index col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it)
            t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

Vector nodal_values(const Mesh& mesh, const ScalarField& f, double t) {
    Vector v(static_cast<Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[static_cast<Index>(i)] = f(mesh.node(i)[0], mesh.node(i)[1], t);
    return v;
}

Tensor2 symmetric_part(const Matrix2& m) { return {m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]}; }

void check_operators(const Mesh& mesh, const CoupledOperators& ops) {
    const auto n = static_cast<Index>(mesh.num_nodes());
    auto ok = [n](const SparseMatrix& m, bool optional) {
        if (optional && m.size() == 0) return true;
        return m.rows() == n && m.cols() == n;
    };
    bool good = ok(ops.mass, false);
    for (int l = 0; l < 2; ++l)
        good = good && ok(ops.capacity[l], false) && ok(ops.stiffness[l], false) && ok(ops.exchange[l], true) &&
               ok(ops.drift_own[l], true) && ok(ops.drift_cross[l], true);
    if (!good) throw PreconditionError("coupled operators do not match the mesh");
}

}  // namespace

std::size_t MacroTrajectory::index_of(double t) const {
    const double tol = 1e-9 * std::max(dt(), 1e-300);
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= tol) return i;
    throw PreconditionError("time " + format_double(t) + " is not stored in the trajectory");
}

CoupledOperators homogenized_operators(const Mesh& mesh, const EffectiveCoefficients& eff) {
    CoupledOperators ops;
    ops.mass = assemble_mass(mesh, 1.0);
    for (int l = 0; l < 2; ++l) {
        if (!(eff.c_star[l] > 0.0)) throw InvalidMaterial("effective capacity must be positive");
        ops.capacity[l] = eff.c_star[l] * ops.mass;
        const std::vector<Tensor2> k(mesh.num_elements(), symmetric_part(eff.kappa_star[l]));
        ops.stiffness[l] = assemble_stiffness(mesh, k);
        ops.exchange[l] = eff.q_star[l] * ops.mass;
    }
    // Continuum 1 carries -K̄^{1*}_2·∇u1 + K̄^{1*}_1·∇u2, continuum 2 carries
    // -K̄^{2*}_1·∇u2 + K̄^{2*}_2·∇u1.
    ops.drift_own[0] = assemble_convection(mesh, eff.kbar2[0]);
    ops.drift_cross[0] = assemble_convection(mesh, eff.kbar1[0]);
    ops.drift_own[1] = assemble_convection(mesh, eff.kbar1[1]);
    ops.drift_cross[1] = assemble_convection(mesh, eff.kbar2[1]);
    return ops;
}

CoupledStepper::CoupledStepper(const Mesh& mesh, const CoupledOperators& ops, double dt, double rel_tol)
    : mesh_(&mesh), dt_(dt), mass_(ops.mass) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    check_operators(mesh, ops);
    const auto n = static_cast<Index>(mesh.num_nodes());

    Triplets tl;
    Triplets tr;
    for (int l = 0; l < 2; ++l) {
        const Index own = l * n;
        const Index other = (1 - l) * n;
        add_block(tl, ops.capacity[l], own, own, 1.0 / dt);
        add_block(tr, ops.capacity[l], own, own, 1.0 / dt);
        for (const SparseMatrix* m : {&ops.stiffness[l], &ops.exchange[l], &ops.drift_own[l]}) {
            add_block(tl, *m, own, own, 0.5);
            add_block(tr, *m, own, own, -0.5);
        }
        for (const SparseMatrix* m : {&ops.exchange[l], &ops.drift_cross[l]}) {
            add_block(tl, *m, own, other, -0.5);
            add_block(tr, *m, own, other, 0.5);
        }
    }
    lhs_.resize(2 * n, 2 * n);
    lhs_.setFromTriplets(tl.begin(), tl.end());
    rhs_.resize(2 * n, 2 * n);
    rhs_.setFromTriplets(tr.begin(), tr.end());

    std::vector<std::size_t> constrained;
    for (int l = 0; l < 2; ++l)
        for (std::size_t b : mesh.boundary_nodes()) constrained.push_back(static_cast<std::size_t>(l * n) + b);
    lift_ = ConstraintLift(lhs_, std::move(constrained));
    solver_ = std::make_unique<GeneralSolver>(lift_.constrained_operator(lhs_), rel_tol);
}

CoupledStepper::~CoupledStepper() = default;
CoupledStepper::CoupledStepper(CoupledStepper&&) noexcept = default;
CoupledStepper& CoupledStepper::operator=(CoupledStepper&&) noexcept = default;

FieldPair CoupledStepper::step(const FieldPair& state, double t_n, const CoupledData& data,
                               std::size_t step_index) const {
    const auto n = static_cast<Index>(mesh_->num_nodes());
    if (state[0].size() != n || state[1].size() != n) throw PreconditionError("state does not match the mesh");
    Vector x(2 * n);
    x << state[0], state[1];

    Vector b = rhs_ * x;
    const Vector load = mass_ * nodal_values(*mesh_, data.q, t_n + 0.5 * dt_);
    b.head(n) += load;
    b.tail(n) += load;

    const double t_next = t_n + dt_;
    const auto bnodes = mesh_->boundary_nodes();
    std::vector<double> values;
    values.reserve(2 * bnodes.size());
    for (int l = 0; l < 2; ++l)
        for (std::size_t v : bnodes) values.push_back(data.bc(mesh_->node(v)[0], mesh_->node(v)[1], t_next));
    lift_.lift(b, values);
    if (!b.allFinite()) throw BlowupError(step_index);

    const Vector y = solver_->solve(b);
    if (!y.allFinite()) throw BlowupError(step_index);
    return {y.head(n), y.tail(n)};
}

FieldPair initial_state(const Mesh& mesh, const CoupledData& data) {
    FieldPair s{nodal_values(mesh, data.initial[0], 0.0), nodal_values(mesh, data.initial[1], 0.0)};
    for (std::size_t v : mesh.boundary_nodes()) {
        const double g = data.bc(mesh.node(v)[0], mesh.node(v)[1], 0.0);
        s[0][static_cast<Index>(v)] = g;
        s[1][static_cast<Index>(v)] = g;
    }
    return s;
}

MacroTrajectory integrate(const Mesh& mesh, const CoupledOperators& ops, const CoupledData& data, double dt,
                          double t_end, double rel_tol) {
    if (!(t_end >= dt * (1.0 - 1e-12))) throw InvalidArgument("t_end must be at least dt");
    const CoupledStepper stepper(mesh, ops, dt, rel_tol);
    const auto steps = static_cast<std::size_t>(std::lround(t_end / dt));

    MacroTrajectory traj;
    traj.times.reserve(steps + 1);
    traj.u.reserve(steps + 1);
    traj.dudt.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.u.push_back(initial_state(mesh, data));
    if (!traj.u[0][0].allFinite() || !traj.u[0][1].allFinite()) throw BlowupError(0);
    traj.dudt.push_back({});
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_n = static_cast<double>(k - 1) * dt;
        traj.u.push_back(stepper.step(traj.u.back(), t_n, data, k));
        traj.times.push_back(static_cast<double>(k) * dt);
        const auto& cur = traj.u[k];
        const auto& prev = traj.u[k - 1];
        traj.dudt.push_back({(cur[0] - prev[0]) / dt, (cur[1] - prev[1]) / dt});
    }
    traj.dudt[0] = traj.dudt[1];
    return traj;
}

FieldPair step_homogenized(const Mesh& macro_mesh, const FieldPair& state, double t_n, double dt,
                           const EffectiveCoefficients& eff, const CoupledData& data, double rel_tol) {
    const CoupledStepper stepper(macro_mesh, homogenized_operators(macro_mesh, eff), dt, rel_tol);
    return stepper.step(state, t_n, data, 1);
}

CoupledData run_data(const RunConfig& config) {
    CoupledData d;
    d.q = config.q;
    d.initial = {config.g1, config.g2};
    d.bc = config.bc;
    return d;
}

MacroTrajectory solve_homogenized(const RunConfig& config, const EffectiveCoefficients& eff, const Mesh& macro_mesh) {
    config.validate();
    return integrate(macro_mesh, homogenized_operators(macro_mesh, eff), run_data(config), config.dt,
                     config.num_steps() * config.dt, config.solver_tol);
}

MacroTrajectory solve_homogenized(const RunConfig& config, const EffectiveCoefficients& eff) {
    const MeshOptions opts{config.pattern, 1.0};
    const Mesh macro = build_unit_square_mesh(config.n_macro, InclusionSpec::none(), opts);
    return solve_homogenized(config, eff, macro);
}

void write_trajectory_summary(std::ostream& out, const MacroTrajectory& traj) {
    out << "step,time,min_u1,max_u1,min_u2,max_u2\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << k << "," << format_double(traj.times[k]);
        for (int l = 0; l < 2; ++l)
            out << "," << format_double(traj.u[k][l].minCoeff()) << "," << format_double(traj.u[k][l].maxCoeff());
        out << "\n";
    }
}

void write_trajectory_archive(std::ostream& out, const MacroTrajectory& traj) {
    const Index n = traj.size() ? traj.u[0][0].size() : 0;
    out << "# homs trajectory archive v1\n";
    out << "steps," << traj.size() << "\n";
    out << "nodes," << n << "\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << "time," << format_double(traj.times[k]) << "\n";
        for (int l = 0; l < 2; ++l)
            for (Index i = 0; i < n; ++i) out << format_double(traj.u[k][l][i]) << "\n";
    }
}

MacroTrajectory read_trajectory_archive(std::istream& in) {
    std::string line;
    auto next = [&]() -> std::string {
        if (!std::getline(in, line)) throw IoError("trajectory archive is truncated");
        return trim(line);
    };
    if (next() != "# homs trajectory archive v1") throw IoError("not a trajectory archive");
    auto header = [&](const std::string& name) {
        const auto parts = split(next(), ',');
        if (parts.size() != 2 || parts[0] != name) throw IoError("trajectory archive: expected '" + name + "'");
        try {
            return static_cast<std::size_t>(std::stoull(parts[1]));
        } catch (const std::exception&) {
            throw IoError("trajectory archive: bad count for '" + name + "'");
        }
    };
    const std::size_t steps = header("steps");
    const auto n = static_cast<Index>(header("nodes"));
    MacroTrajectory traj;
    try {
        for (std::size_t k = 0; k < steps; ++k) {
            const auto parts = split(next(), ',');
            if (parts.size() != 2 || parts[0] != "time") throw IoError("trajectory archive: expected 'time'");
            traj.times.push_back(parse_double(parts[1]));
            FieldPair u{Vector(n), Vector(n)};
            for (int l = 0; l < 2; ++l)
                for (Index i = 0; i < n; ++i) u[l][i] = parse_double(next());
            traj.u.push_back(std::move(u));
        }
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("trajectory archive: ") + e.what());
    }
    traj.dudt.resize(steps);
    if (steps >= 2) {
        const double dt = traj.dt();
        for (std::size_t k = 1; k < steps; ++k) {
            traj.dudt[k] = {(traj.u[k][0] - traj.u[k - 1][0]) / dt, (traj.u[k][1] - traj.u[k - 1][1]) / dt};
        }
        traj.dudt[0] = traj.dudt[1];
    }
    return traj;
}

}  // namespace homs
