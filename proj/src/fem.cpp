#include "homs/fem.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "homs/error.hpp"

namespace homs {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_tensor(const Tensor2& k) {
    if (!std::isfinite(k.xx) || !std::isfinite(k.xy) || !std::isfinite(k.yy))
        throw InvalidMaterial("permeability tensor has non-finite entries");
    if (!(k.min_eigenvalue() > 0.0))
        throw InvalidMaterial("permeability tensor is not positive definite");
}

SparseMatrix from_triplets(const Mesh& mesh, const Triplets& t) {
    const auto n = static_cast<Index>(mesh.num_nodes());
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

template <class LocalFn>
SparseMatrix assemble(const Mesh& mesh, LocalFn&& local) {
    Triplets t;
    t.reserve(9 * mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto k = local(e);
        const auto& tri = mesh.element(e);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                t.emplace_back(static_cast<Index>(tri[a]), static_cast<Index>(tri[b]), k[a][b]);
    }
    return from_triplets(mesh, t);
}

SolverStats pcg(const SparseMatrix& a, const Vector& inv_diag, const Vector& b, Vector& x, double rel_tol,
                int max_iter) {
    SolverStats stats;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero(b.size());
        return stats;
    }
    if (x.size() != b.size()) x.setZero(b.size());
    Vector r = b - a * x;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    double rnorm = r.norm();
    Vector ap(b.size());
    int it = 0;
    while (rnorm > rel_tol * bnorm && it < max_iter) {
        ap.noalias() = a * p;
        const double alpha = rz / p.dot(ap);
        x.noalias() += alpha * p;
        r.noalias() -= alpha * ap;
        rnorm = r.norm();
        ++it;
        if (rnorm <= rel_tol * bnorm) break;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    // recompute against the true residual; the recurrence drifts on long runs
    rnorm = (b - a * x).norm();
    stats.iterations = it;
    stats.relative_residual = rnorm / bnorm;
    if (!(stats.relative_residual <= rel_tol))
        throw SolverFailure("conjugate gradients did not converge in " + std::to_string(it) + " iterations",
                            stats.relative_residual);
    return stats;
}

Vector inverse_diagonal(const SparseMatrix& a) {
    Vector d = a.diagonal();
    for (Index i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) throw SolverFailure("operator has a non-positive diagonal entry", 1.0);
        d[i] = 1.0 / d[i];
    }
    return d;
}

}  // namespace

std::array<std::array<double, 3>, 3> local_stiffness(const Mesh& mesh, std::size_t e, const Tensor2& k) {
    const double area = mesh.signed_area(e);
    const auto g = mesh.basis_gradients(e);
    std::array<std::array<double, 3>, 3> out{};
    for (int a = 0; a < 3; ++a) {
        const Vec2 kg{k.xx * g[a][0] + k.xy * g[a][1], k.xy * g[a][0] + k.yy * g[a][1]};
        for (int b = 0; b < 3; ++b) out[a][b] = area * (kg[0] * g[b][0] + kg[1] * g[b][1]);
    }
    return out;
}

std::array<std::array<double, 3>, 3> local_mass(const Mesh& mesh, std::size_t e, double c) {
    const double s = c * mesh.signed_area(e) / 12.0;
    return {{{2 * s, s, s}, {s, 2 * s, s}, {s, s, 2 * s}}};
}

SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const Tensor2> per_element) {
    if (per_element.size() != mesh.num_elements())
        throw InvalidArgument("stiffness coefficient count does not match the element count");
    for (const auto& k : per_element) check_tensor(k);
    return assemble(mesh, [&](std::size_t e) { return local_stiffness(mesh, e, per_element[e]); });
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const PhaseValues<Tensor2>& coeff) {
    check_tensor(coeff.matrix);
    check_tensor(coeff.inclusion);
    return assemble_stiffness(mesh, per_element(mesh, coeff));
}

SparseMatrix assemble_mass(const Mesh& mesh, std::span<const double> per_element) {
    if (per_element.size() != mesh.num_elements())
        throw InvalidArgument("mass coefficient count does not match the element count");
    for (double c : per_element)
        if (!(c > 0.0) || !std::isfinite(c)) throw InvalidMaterial("capacity coefficient must be positive");
    return assemble(mesh, [&](std::size_t e) { return local_mass(mesh, e, per_element[e]); });
}

SparseMatrix assemble_mass(const Mesh& mesh, const PhaseValues<double>& coeff) {
    for (double c : {coeff.matrix, coeff.inclusion})
        if (!(c > 0.0) || !std::isfinite(c)) throw InvalidMaterial("capacity coefficient must be positive");
    return assemble_mass(mesh, per_element(mesh, coeff));
}

SparseMatrix assemble_mass(const Mesh& mesh, double coeff) {
    return assemble_mass(mesh, std::vector<double>(mesh.num_elements(), coeff));
}

SparseMatrix assemble_reaction(const Mesh& mesh, std::span<const double> per_element) {
    if (per_element.size() != mesh.num_elements())
        throw InvalidArgument("reaction coefficient count does not match the element count");
    for (double r : per_element)
        if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidMaterial("exchange coefficient must be non-negative");
    return assemble(mesh, [&](std::size_t e) { return local_mass(mesh, e, per_element[e]); });
}

SparseMatrix assemble_convection(const Mesh& mesh, Vec2 b) {
    return assemble(mesh, [&](std::size_t e) {
        const double third = mesh.signed_area(e) / 3.0;
        const auto g = mesh.basis_gradients(e);
        std::array<std::array<double, 3>, 3> out{};
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 3; ++c) out[a][c] = third * (b[0] * g[c][0] + b[1] * g[c][1]);
        return out;
    });
}

void add_load_constant(const Mesh& mesh, std::span<const double> f, Vector& rhs) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double share = f[e] * mesh.signed_area(e) / 3.0;
        for (std::size_t v : mesh.element(e)) rhs[static_cast<Index>(v)] += share;
    }
}

void add_load_p1(const Mesh& mesh, std::span<const double> scale, const Vector& w, Vector& rhs) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (scale[e] == 0.0) continue;
        const auto& t = mesh.element(e);
        const double s = scale[e] * mesh.signed_area(e) / 12.0;
        const double w0 = w[static_cast<Index>(t[0])];
        const double w1 = w[static_cast<Index>(t[1])];
        const double w2 = w[static_cast<Index>(t[2])];
        const double sum = w0 + w1 + w2;
        rhs[static_cast<Index>(t[0])] += s * (sum + w0);
        rhs[static_cast<Index>(t[1])] += s * (sum + w1);
        rhs[static_cast<Index>(t[2])] += s * (sum + w2);
    }
}

void add_load_flux(const Mesh& mesh, std::span<const Vec2> g, const Vector* w, Vector& rhs) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        double mean = 1.0;
        if (w != nullptr)
            mean = ((*w)[static_cast<Index>(t[0])] + (*w)[static_cast<Index>(t[1])] +
                    (*w)[static_cast<Index>(t[2])]) /
                   3.0;
        const double scale = mean * mesh.signed_area(e);
        const auto grads = mesh.basis_gradients(e);
        for (int a = 0; a < 3; ++a)
            rhs[static_cast<Index>(t[a])] += scale * (g[e][0] * grads[a][0] + g[e][1] * grads[a][1]);
    }
}

void apply_constraints(SparseSystem& system) {
    const Index n = system.matrix.rows();
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Vector values = Vector::Zero(n);
    for (const auto& [node, value] : system.constrained) {
        if (static_cast<Index>(node) >= n) throw InvalidArgument("constraint refers to a node outside the system");
        fixed[node] = 1;
        values[static_cast<Index>(node)] = value;
    }
    SparseMatrix& a = system.matrix;
    for (Index col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const Index row = it.row();
            if (fixed[col] && !fixed[row]) system.rhs[row] -= it.value() * values[col];
            if (fixed[col] || fixed[row]) it.valueRef() = (row == col) ? 1.0 : 0.0;
        }
    }
    for (const auto& [node, value] : system.constrained) {
        if (a.coeff(static_cast<Index>(node), static_cast<Index>(node)) != 1.0)
            a.coeffRef(static_cast<Index>(node), static_cast<Index>(node)) = 1.0;
        system.rhs[static_cast<Index>(node)] = value;
    }
    a.prune(0.0);
    system.constrained.clear();
}

ConstraintLift::ConstraintLift(const SparseMatrix& a, std::vector<std::size_t> constrained_nodes)
    : nodes_(std::move(constrained_nodes)), is_constrained_(static_cast<std::size_t>(a.rows()), 0) {
    for (std::size_t v : nodes_) is_constrained_[v] = 1;
    Triplets t;
    for (Index col = 0; col < a.outerSize(); ++col) {
        if (!is_constrained_[col]) continue;
        for (SparseMatrix::InnerIterator it(a, col); it; ++it)
            if (!is_constrained_[it.row()]) t.emplace_back(it.row(), col, it.value());
    }
    coupling_.resize(a.rows(), a.cols());
    coupling_.setFromTriplets(t.begin(), t.end());
}

SparseMatrix ConstraintLift::constrained_operator(const SparseMatrix& a) const {
    SparseMatrix out = a;
    for (Index col = 0; col < out.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(out, col); it; ++it)
            if (is_constrained_[col] || is_constrained_[it.row()])
                it.valueRef() = (it.row() == col) ? 1.0 : 0.0;
    for (std::size_t v : nodes_) out.coeffRef(static_cast<Index>(v), static_cast<Index>(v)) = 1.0;
    out.prune(0.0);
    out.makeCompressed();
    return out;
}

void ConstraintLift::lift(Vector& rhs, std::span<const double> values) const {
    if (values.empty()) {
        for (std::size_t v : nodes_) rhs[static_cast<Index>(v)] = 0.0;
        return;
    }
    if (values.size() != nodes_.size()) throw InvalidArgument("constraint value count mismatch");
    Vector g = Vector::Zero(rhs.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) g[static_cast<Index>(nodes_[k])] = values[k];
    rhs.noalias() -= coupling_ * g;
    for (std::size_t k = 0; k < nodes_.size(); ++k) rhs[static_cast<Index>(nodes_[k])] = values[k];
}

NodalField solve_spd(const SparseSystem& system, double rel_tol, SolverStats* stats) {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-4)) throw InvalidArgument("rel_tol must lie in (0, 1e-4]");
    SparseSystem s = system;
    if (!s.constrained.empty()) apply_constraints(s);
    const Vector inv_diag = inverse_diagonal(s.matrix);
    Vector x = Vector::Zero(s.rhs.size());
    const auto st = pcg(s.matrix, inv_diag, s.rhs, x, rel_tol, 20 * static_cast<int>(s.rhs.size()));
    if (stats) *stats = st;
    return x;
}

struct SpdSolver::Factor {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

SpdSolver::SpdSolver(const SparseMatrix& unconstrained, std::vector<std::size_t> constrained_nodes, Method method,
                     double rel_tol)
    : lift_(unconstrained, std::move(constrained_nodes)), method_(method), rel_tol_(rel_tol) {
    matrix_ = lift_.constrained_operator(unconstrained);
    inv_diag_ = inverse_diagonal(matrix_);
    if (method_ == Method::cholesky) {
        factor_ = std::make_unique<Factor>();
        factor_->ldlt.compute(matrix_);
        if (factor_->ldlt.info() != Eigen::Success)
            throw SolverFailure("sparse Cholesky factorization failed", 1.0);
    }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

NodalField SpdSolver::solve(Vector rhs, std::span<const double> constrained_values) const {
    if (rhs.size() != matrix_.rows()) throw InvalidArgument("rhs length does not match the operator");
    lift_.lift(rhs, constrained_values);
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) return Vector::Zero(rhs.size());
    Vector x;
    if (method_ == Method::cholesky) {
        x = factor_->ldlt.solve(rhs);
        const double res = (rhs - matrix_ * x).norm() / bnorm;
        if (!(res <= rel_tol_)) throw SolverFailure("sparse Cholesky solve lost accuracy", res);
    } else {
        x = Vector::Zero(rhs.size());
        pcg(matrix_, inv_diag_, rhs, x, rel_tol_, 20 * static_cast<int>(rhs.size()));
    }
    return x;
}

struct GeneralSolver::Factor {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

GeneralSolver::GeneralSolver(const SparseMatrix& matrix, double rel_tol)
    : matrix_(matrix), rel_tol_(rel_tol), factor_(std::make_unique<Factor>()) {
    matrix_.makeCompressed();
    factor_->lu.analyzePattern(matrix_);
    factor_->lu.factorize(matrix_);
    if (factor_->lu.info() != Eigen::Success)
        throw SolverFailure("sparse LU factorization failed: " + factor_->lu.lastErrorMessage(), 1.0);
}

GeneralSolver::~GeneralSolver() = default;
GeneralSolver::GeneralSolver(GeneralSolver&&) noexcept = default;
GeneralSolver& GeneralSolver::operator=(GeneralSolver&&) noexcept = default;

Vector GeneralSolver::solve(const Vector& rhs) const {
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) return Vector::Zero(rhs.size());
    Vector x = factor_->lu.solve(rhs);
    const double res = (rhs - matrix_ * x).norm() / bnorm;
    if (!(res <= rel_tol_)) throw SolverFailure("sparse LU solve lost accuracy", res);
    return x;
}

GradientField recover_gradient(const Mesh& mesh, const NodalField& field) {
    if (static_cast<std::size_t>(field.size()) != mesh.num_nodes())
        throw InvalidArgument("field length does not match the mesh node count");
    const auto n = static_cast<Index>(mesh.num_nodes());
    GradientField g{Vector::Zero(n), Vector::Zero(n)};
    Vector weight = Vector::Zero(n);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto grads = mesh.basis_gradients(e);
        double gx = 0.0;
        double gy = 0.0;
        for (int a = 0; a < 3; ++a) {
            gx += field[static_cast<Index>(t[a])] * grads[a][0];
            gy += field[static_cast<Index>(t[a])] * grads[a][1];
        }
        const double area = mesh.signed_area(e);
        for (std::size_t v : t) {
            g.dx[static_cast<Index>(v)] += area * gx;
            g.dy[static_cast<Index>(v)] += area * gy;
            weight[static_cast<Index>(v)] += area;
        }
    }
    g.dx = g.dx.cwiseQuotient(weight);
    g.dy = g.dy.cwiseQuotient(weight);
    return g;
}

HessianField recover_hessian(const Mesh& mesh, const NodalField& field) {
    const GradientField g = recover_gradient(mesh, field);
    GradientField gx = recover_gradient(mesh, g.dx);
    GradientField gy = recover_gradient(mesh, g.dy);
    return {std::move(gx.dx), std::move(gx.dy), std::move(gy.dx), std::move(gy.dy)};
}

double interpolate(const Mesh& mesh, const NodalField& field, const Location& loc) {
    const auto& t = mesh.element(loc.element);
    return loc.bary[0] * field[static_cast<Index>(t[0])] + loc.bary[1] * field[static_cast<Index>(t[1])] +
           loc.bary[2] * field[static_cast<Index>(t[2])];
}

double interpolate(const Mesh& mesh, const NodalField& field, Point p) {
    if (static_cast<std::size_t>(field.size()) != mesh.num_nodes())
        throw InvalidArgument("field length does not match the mesh node count");
    return interpolate(mesh, field, mesh.locate(p));
}

}  // namespace homs
