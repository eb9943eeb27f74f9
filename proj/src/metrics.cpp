#include "homs/metrics.hpp"

#include <cmath>
#include <ostream>

#include "homs/error.hpp"
#include "homs/fem.hpp"
#include "homs/io.hpp"

namespace homs {

NormEvaluator::NormEvaluator(const Mesh& mesh)
    : n_(mesh.num_nodes()),
      mass_(assemble_mass(mesh, 1.0)),
      stiffness_(assemble_stiffness(mesh, PhaseValues<Tensor2>{Tensor2::isotropic(1.0), Tensor2::isotropic(1.0)})) {}

double NormEvaluator::quadratic(const SparseMatrix& m, const NodalField& v) const {
    if (static_cast<std::size_t>(v.size()) != n_) throw InvalidArgument("field length does not match the mesh");
    return std::max(0.0, v.dot(m * v));
}

double NormEvaluator::l2(const NodalField& v) const { return std::sqrt(quadratic(mass_, v)); }

double NormEvaluator::h1_semi(const NodalField& v) const { return std::sqrt(quadratic(stiffness_, v)); }

double NormEvaluator::relative_l2(const NodalField& ref, const NodalField& approx) const {
    const double denom = l2(ref);
    if (!(denom > 0.0)) throw UndefinedMetric("reference field has zero L2 norm");
    return l2(ref - approx) / denom;
}

double NormEvaluator::relative_h1_semi(const NodalField& ref, const NodalField& approx) const {
    const double denom = h1_semi(ref);
    // A constant field leaves only round-off in rᵀAr.
    if (!(denom > 1e-12 * std::max(1.0, l2(ref)))) throw UndefinedMetric("reference field has zero H1 seminorm");
    return h1_semi(ref - approx) / denom;
}

double relative_l2(const NodalField& ref, const NodalField& approx, const Mesh& mesh) {
    return NormEvaluator(mesh).relative_l2(ref, approx);
}

double relative_h1_semi(const NodalField& ref, const NodalField& approx, const Mesh& mesh) {
    return NormEvaluator(mesh).relative_h1_semi(ref, approx);
}

void ErrorSeries::check_finite() const {
    for (const Table* t : {&lerr, &herr, &abs_l2, &abs_h1})
        for (const auto& per_order : *t)
            for (const auto& s : per_order)
                for (double v : s)
                    if (!std::isfinite(v) || v < 0.0) throw Error("error series contains a non-finite entry");
}

ErrorSeries error_evolution(const MacroTrajectory& reference, const MacroTrajectory& macro,
                            const Reconstructor& reconstructor, const CellSolutions& cells, int thinning) {
    if (thinning < 1) throw InvalidArgument("thinning must be positive");
    if (reference.size() != macro.size() || reference.size() < 2)
        throw PreconditionError("reference and macro trajectories have different time grids");
    const double tol = 1e-9 * macro.dt();
    for (std::size_t k = 0; k < macro.size(); ++k)
        if (std::abs(reference.times[k] - macro.times[k]) > tol)
            throw PreconditionError("reference and macro trajectories have different time grids");
    const Mesh& fine = reconstructor.fine_mesh();
    if (static_cast<std::size_t>(reference.u[0][0].size()) != fine.num_nodes())
        throw PreconditionError("reference trajectory does not live on the fine mesh");

    const NormEvaluator norms(fine);
    ErrorSeries s;
    const std::size_t last = macro.size() - 1;
    for (std::size_t k = 1; k <= last; ++k) {
        if (k % static_cast<std::size_t>(thinning) != 0 && k != last) continue;
        const double t = macro.times[k];
        const ExpansionTerms terms = reconstructor.terms(macro, t, cells, true);
        s.times.push_back(t);
        for (int o = 0; o < 3; ++o) {
            const auto order = static_cast<Order>(o);
            const MultiscaleField f = Reconstructor::combine(terms, order, reconstructor.eps());
            for (int l = 0; l < 2; ++l) {
                const NodalField& ref = reference.u[k][l];
                const NodalField e = ref - f.u[l];
                s.abs_l2[l][o].push_back(norms.l2(e));
                s.abs_h1[l][o].push_back(norms.h1_semi(e));
                s.lerr[l][o].push_back(norms.relative_l2(ref, f.u[l]));
                s.herr[l][o].push_back(norms.relative_h1_semi(ref, f.u[l]));
            }
        }
    }
    return s;
}

void write_error_csv(std::ostream& out, const ErrorSeries& s) {
    out << "time";
    for (int l = 0; l < 2; ++l) {
        for (int o = 0; o < 3; ++o) out << ",Lerr" << l + 1 << o;
        for (int o = 0; o < 3; ++o) out << ",Herr" << l + 1 << o;
    }
    out << "\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << format_double(s.times[k]);
        for (int l = 0; l < 2; ++l) {
            for (int o = 0; o < 3; ++o) out << "," << format_double(s.lerr[l][o][k]);
            for (int o = 0; o < 3; ++o) out << "," << format_double(s.herr[l][o][k]);
        }
        out << "\n";
    }
}

double error_functional(const ErrorSeries& s, Order order) {
    if (s.size() == 0) throw PreconditionError("empty error series");
    const int o = static_cast<int>(order);
    double total = 0.0;
    for (int l = 0; l < 2; ++l) {
        const auto& h = s.abs_h1[l][o];
        double integral = 0.0;
        for (std::size_t k = 1; k < s.size(); ++k)
            integral += 0.5 * (s.times[k] - s.times[k - 1]) * (h[k] * h[k] + h[k - 1] * h[k - 1]);
        total += s.abs_l2[l][o].back() + std::sqrt(integral);
    }
    return total;
}

}  // namespace homs
