#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "homs/mesh.hpp"
#include "homs/types.hpp"

namespace homs {

// ---------------------------------------------------------------------------
// Assembly. Coefficients are piecewise constant, so every element integral is
// evaluated in closed form.
// ---------------------------------------------------------------------------

/// Entries ∫ κ ∇φ_j·∇φ_i. Throws InvalidMaterial for non-positive tensors.
SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const Tensor2> per_element);
SparseMatrix assemble_stiffness(const Mesh& mesh, const PhaseValues<Tensor2>& coeff);

/// Entries ∫ c φ_j φ_i with c > 0.
SparseMatrix assemble_mass(const Mesh& mesh, std::span<const double> per_element);
SparseMatrix assemble_mass(const Mesh& mesh, const PhaseValues<double>& coeff);
SparseMatrix assemble_mass(const Mesh& mesh, double coeff = 1.0);

/// Zero-order term ∫ r φ_j φ_i with r ≥ 0 (exchange terms may vanish).
SparseMatrix assemble_reaction(const Mesh& mesh, std::span<const double> per_element);

/// Entries ∫ (b·∇φ_j) φ_i for a constant vector b.
SparseMatrix assemble_convection(const Mesh& mesh, Vec2 b);

/// Expand per-phase values onto elements.
template <class T>
std::vector<T> per_element(const Mesh& mesh, const PhaseValues<T>& values) {
    std::vector<T> out(mesh.num_elements());
    for (std::size_t e = 0; e < out.size(); ++e) out[e] = values[mesh.tag(e)];
    return out;
}

/// Local P1 stiffness for the element (κ ∇φ_j·∇φ_i |T|).
std::array<std::array<double, 3>, 3> local_stiffness(const Mesh& mesh, std::size_t e, const Tensor2& k);
std::array<std::array<double, 3>, 3> local_mass(const Mesh& mesh, std::size_t e, double c);

// ---------------------------------------------------------------------------
// Load-vector helpers. Each adds ∫ f φ_i (or ∫ g·∇φ_i) into `rhs`.
// ---------------------------------------------------------------------------

/// f constant on each element.
void add_load_constant(const Mesh& mesh, std::span<const double> f_per_element, Vector& rhs);
/// f = s_e · w with w a P1 field and s_e constant on each element.
void add_load_p1(const Mesh& mesh, std::span<const double> scale_per_element, const Vector& w, Vector& rhs);
/// ∫ (g_e w)·∇φ_i with g_e constant per element and w a P1 field (w == nullptr means w ≡ 1).
void add_load_flux(const Mesh& mesh, std::span<const Vec2> g_per_element, const Vector* w, Vector& rhs);

// ---------------------------------------------------------------------------
// Constraints and solvers.
// ---------------------------------------------------------------------------

using Constraint = std::pair<std::size_t, double>;

struct SparseSystem {
    SparseMatrix matrix;
    Vector rhs;
    std::vector<Constraint> constrained;
};

/// Row/column elimination: known columns move to the rhs, constrained rows and
/// columns become identity, rhs carries the prescribed value.
void apply_constraints(SparseSystem& system);

/// Lifting data so repeated solves with one operator only touch the rhs.
class ConstraintLift {
public:
    ConstraintLift() = default;
    ConstraintLift(const SparseMatrix& unconstrained, std::vector<std::size_t> constrained_nodes);

    /// Returns the operator with constrained rows/columns replaced by identity.
    SparseMatrix constrained_operator(const SparseMatrix& unconstrained) const;
    /// rhs -= A_{:,c} g; rhs[c] = g.
    void lift(Vector& rhs, std::span<const double> values) const;
    std::span<const std::size_t> nodes() const { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
    std::vector<char> is_constrained_;
    SparseMatrix coupling_;  // A restricted to (all rows, constrained columns), rows of c zeroed
};

struct SolverStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Diagonally preconditioned conjugate gradients. Applies the constraints of
/// `system` first. Throws SolverFailure past 20·n iterations.
NodalField solve_spd(const SparseSystem& system, double rel_tol = 1e-10, SolverStats* stats = nullptr);

/// Reusable SPD solve for a fixed operator and a fixed set of homogeneous-or-not
/// Dirichlet nodes.
class SpdSolver {
public:
    enum class Method { conjugate_gradient, cholesky };

    SpdSolver(const SparseMatrix& unconstrained, std::vector<std::size_t> constrained_nodes,
              Method method = Method::cholesky, double rel_tol = 1e-10);
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    /// Solves with the given prescribed values (empty = zero on all constrained nodes).
    NodalField solve(Vector rhs, std::span<const double> constrained_values = {}) const;

    const SparseMatrix& matrix() const { return matrix_; }

private:
    struct Factor;
    SparseMatrix matrix_;
    ConstraintLift lift_;
    Method method_;
    double rel_tol_;
    Vector inv_diag_;
    std::unique_ptr<Factor> factor_;
};

/// Sparse LU for non-symmetric operators with a residual check on every solve.
class GeneralSolver {
public:
    explicit GeneralSolver(const SparseMatrix& matrix, double rel_tol = 1e-10);
    ~GeneralSolver();
    GeneralSolver(GeneralSolver&&) noexcept;
    GeneralSolver& operator=(GeneralSolver&&) noexcept;

    Vector solve(const Vector& rhs) const;

private:
    struct Factor;
    SparseMatrix matrix_;
    double rel_tol_;
    std::unique_ptr<Factor> factor_;
};

// ---------------------------------------------------------------------------
// Post-processing.
// ---------------------------------------------------------------------------

struct GradientField {
    Vector dx;
    Vector dy;
};

/// Element-average recovery: each node gets the area-weighted mean of the constant
/// gradients of its incident elements.
GradientField recover_gradient(const Mesh& mesh, const NodalField& field);

struct HessianField {
    Vector xx, xy, yx, yy;  // xy = ∂/∂y of the recovered ∂u/∂x
};

/// Recovery applied twice (first-order accurate).
HessianField recover_hessian(const Mesh& mesh, const NodalField& field);

double interpolate(const Mesh& mesh, const NodalField& field, Point p);
double interpolate(const Mesh& mesh, const NodalField& field, const Location& loc);

}  // namespace homs
