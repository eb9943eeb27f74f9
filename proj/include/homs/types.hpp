#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace homs {

using Index = std::ptrdiff_t;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// One scalar per mesh node.
using NodalField = Vector;

using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 tensor stored by its three independent entries.
struct Tensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static constexpr Tensor2 isotropic(double value) { return {value, 0.0, value}; }

    constexpr double operator()(int i, int j) const {
        if (i == 0 && j == 0) return xx;
        if (i == 1 && j == 1) return yy;
        return xy;
    }

    constexpr Tensor2 scaled(double s) const { return {s * xx, s * xy, s * yy}; }

    /// Smallest eigenvalue.
    double min_eigenvalue() const;
    double max_eigenvalue() const;
};

/// General (not necessarily symmetric) 2x2 matrix, row-major.
using Matrix2 = std::array<std::array<double, 2>, 2>;

enum class Phase : std::uint8_t { matrix = 0, inclusion = 1 };

/// A value given separately for the matrix and the inclusion phase.
template <class T>
struct PhaseValues {
    T matrix{};
    T inclusion{};

    constexpr const T& operator[](Phase p) const { return p == Phase::matrix ? matrix : inclusion; }
    constexpr T& operator[](Phase p) { return p == Phase::matrix ? matrix : inclusion; }
};

}  // namespace homs
