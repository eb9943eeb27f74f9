#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "homs/cells.hpp"
#include "homs/macro_solver.hpp"
#include "homs/mesh.hpp"
#include "homs/reconstruct.hpp"

namespace homs {

/// ‖ref − approx‖_{L2} / ‖ref‖_{L2} with the exact P1 mass matrix. Throws UndefinedMetric
/// when ‖ref‖ = 0.
double relative_l2(const NodalField& ref, const NodalField& approx, const Mesh& mesh);
/// |ref − approx|_{H1} / |ref|_{H1} with the unit-coefficient stiffness matrix.
double relative_h1_semi(const NodalField& ref, const NodalField& approx, const Mesh& mesh);

/// Holds the unit mass and stiffness matrices of one mesh for repeated norm evaluations.
class NormEvaluator {
public:
    explicit NormEvaluator(const Mesh& mesh);

    double l2(const NodalField& v) const;
    double h1_semi(const NodalField& v) const;
    double relative_l2(const NodalField& ref, const NodalField& approx) const;
    double relative_h1_semi(const NodalField& ref, const NodalField& approx) const;

private:
    double quadratic(const SparseMatrix& m, const NodalField& v) const;
    std::size_t n_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;
};

/// Error histories indexed [continuum][order] with order 0 = homogenized, 1 = FOMS, 2 = HOMS.
struct ErrorSeries {
    using Table = std::array<std::array<std::vector<double>, 3>, 2>;
    std::vector<double> times;
    Table lerr;
    Table herr;
    Table abs_l2;  // ‖ref − approx‖_{L2}
    Table abs_h1;  // |ref − approx|_{H1}

    std::size_t size() const { return times.size(); }
    /// Throws Error if any entry is negative or non-finite.
    void check_finite() const;
};

/// Errors of all three reconstructions against the reference at every `thinning`-th step
/// (the last step is always included). Starts at the first step: at t = 0 the reference
/// is usually constant and its H1 seminorm vanishes.
ErrorSeries error_evolution(const MacroTrajectory& reference, const MacroTrajectory& macro,
                            const Reconstructor& reconstructor, const CellSolutions& cells, int thinning = 1);

/// time,Lerr10,Lerr11,Lerr12,Herr10,Herr11,Herr12,Lerr20,...,Herr22
void write_error_csv(std::ostream& out, const ErrorSeries& series);

/// Σ_l ( ‖e_l(T)‖_{L2} + (∫ |e_l|²_{H1} dt)^{1/2} ) for the given order, trapezoid in time.
double error_functional(const ErrorSeries& series, Order order);

}  // namespace homs
