#include "homs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "homs/error.hpp"

namespace homs {

namespace {

constexpr double kGeomTol = 1e-12;

double snap_fraction(double v) {
    double f = v - std::floor(v);
    // x/eps that should be an integer can land a few ulps below it
    if (std::abs(f - 1.0) < kGeomTol || std::abs(f) < kGeomTol) return 0.0;
    return f;
}

}  // namespace

double Tensor2::min_eigenvalue() const {
    const double mean = 0.5 * (xx + yy);
    const double diff = 0.5 * (xx - yy);
    return mean - std::sqrt(diff * diff + xy * xy);
}

double Tensor2::max_eigenvalue() const {
    const double mean = 0.5 * (xx + yy);
    const double diff = 0.5 * (xx - yy);
    return mean + std::sqrt(diff * diff + xy * xy);
}

InclusionSpec InclusionSpec::disk(Point center, double radius) {
    InclusionSpec s;
    s.kind = Kind::disk;
    s.center = center;
    s.radius = radius;
    return s;
}

InclusionSpec InclusionSpec::axis_cross(double half_width) {
    InclusionSpec s;
    s.kind = Kind::axis_cross;
    s.half_width = half_width;
    return s;
}

InclusionSpec InclusionSpec::stripes(int direction, double width) {
    InclusionSpec s;
    s.kind = Kind::stripes;
    s.direction = direction;
    s.half_width = 0.5 * width;
    return s;
}

void InclusionSpec::validate() const {
    switch (kind) {
    case Kind::none:
        return;
    case Kind::disk: {
        if (!(radius > 0.0)) throw InvalidArgument("disk inclusion needs a positive radius");
        const double margin = std::min({center[0], center[1], 1.0 - center[0], 1.0 - center[1]});
        if (!(radius < margin))
            throw InvalidArgument("disk inclusion must lie strictly inside the unit cell");
        return;
    }
    case Kind::axis_cross:
    case Kind::stripes:
        if (!(half_width > 0.0 && half_width < 0.5))
            throw InvalidArgument("channel half-width must lie in (0, 0.5)");
        if (kind == Kind::stripes && direction != 0 && direction != 1)
            throw InvalidArgument("stripe direction must be 0 or 1");
        return;
    }
}

Phase InclusionSpec::classify(Point y) const {
    switch (kind) {
    case Kind::none:
        return Phase::matrix;
    case Kind::disk: {
        const double dx = y[0] - center[0];
        const double dy = y[1] - center[1];
        return dx * dx + dy * dy < radius * radius ? Phase::inclusion : Phase::matrix;
    }
    case Kind::axis_cross:
        return (std::abs(y[0] - 0.5) < half_width || std::abs(y[1] - 0.5) < half_width) ? Phase::inclusion
                                                                                         : Phase::matrix;
    case Kind::stripes: {
        const double across = direction == 0 ? y[1] : y[0];
        return std::abs(across - 0.5) < half_width ? Phase::inclusion : Phase::matrix;
    }
    }
    return Phase::matrix;
}

std::string InclusionSpec::describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    switch (kind) {
    case Kind::none:
        os << "none";
        break;
    case Kind::disk:
        os << "disk(" << center[0] << "," << center[1] << "," << radius << ")";
        break;
    case Kind::axis_cross:
        os << "axis_cross(" << half_width << ")";
        break;
    case Kind::stripes:
        os << "stripes(" << direction << "," << 2.0 * half_width << ")";
        break;
    }
    return os.str();
}

double Mesh::signed_area(std::size_t e) const {
    const auto& t = elements_[e];
    const Point& a = nodes_[t[0]];
    const Point& b = nodes_[t[1]];
    const Point& c = nodes_[t[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

Point Mesh::centroid(std::size_t e) const {
    const auto& t = elements_[e];
    return {(nodes_[t[0]][0] + nodes_[t[1]][0] + nodes_[t[2]][0]) / 3.0,
            (nodes_[t[0]][1] + nodes_[t[1]][1] + nodes_[t[2]][1]) / 3.0};
}

double Mesh::tagged_area(Phase p) const {
    double sum = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e)
        if (tags_[e] == p) sum += signed_area(e);
    return sum;
}

std::array<Vec2, 3> Mesh::basis_gradients(std::size_t e) const {
    const auto& t = elements_[e];
    const Point& p0 = nodes_[t[0]];
    const Point& p1 = nodes_[t[1]];
    const Point& p2 = nodes_[t[2]];
    const double two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double inv = 1.0 / two_a;
    return {Vec2{(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv},
            Vec2{(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv},
            Vec2{(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv}};
}

bool Mesh::contains(std::size_t e, Point p, std::array<double, 3>& bary) const {
    const auto& t = elements_[e];
    const Point& p0 = nodes_[t[0]];
    const Point& p1 = nodes_[t[1]];
    const Point& p2 = nodes_[t[2]];
    const double two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double l1 = ((p[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p[1] - p0[1])) / two_a;
    const double l2 = ((p1[0] - p0[0]) * (p[1] - p0[1]) - (p[0] - p0[0]) * (p1[1] - p0[1])) / two_a;
    const double l0 = 1.0 - l1 - l2;
    if (l0 < -kGeomTol || l1 < -kGeomTol || l2 < -kGeomTol) return false;
    bary = {std::clamp(l0, 0.0, 1.0), std::clamp(l1, 0.0, 1.0), std::clamp(l2, 0.0, 1.0)};
    const double sum = bary[0] + bary[1] + bary[2];
    for (double& b : bary) b /= sum;
    return true;
}

Location Mesh::locate(Point p) const {
    if (!(p[0] >= -kGeomTol && p[0] <= 1.0 + kGeomTol && p[1] >= -kGeomTol && p[1] <= 1.0 + kGeomTol))
        throw OutOfDomain("point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                          ") lies outside the unit square");

    // Candidate squares: the one found by index arithmetic plus its lower neighbour when p sits
    // on a grid line, so that ties go to the lower-indexed element.
    auto candidates = [this](double coord) {
        const double s = coord * n_;
        int hi = std::clamp(static_cast<int>(std::floor(s)), 0, n_ - 1);
        int lo = hi;
        if (std::abs(s - std::round(s)) < kGeomTol * n_ && std::round(s) >= 1.0)
            lo = std::min(hi, static_cast<int>(std::round(s)) - 1);
        return std::pair<int, int>{lo, hi};
    };
    const auto [ilo, ihi] = candidates(p[0]);
    const auto [jlo, jhi] = candidates(p[1]);

    Location loc;
    for (int j = jlo; j <= jhi; ++j) {
        for (int i = ilo; i <= ihi; ++i) {
            const std::size_t first = 2 * (static_cast<std::size_t>(j) * n_ + static_cast<std::size_t>(i));
            for (std::size_t e = first; e < first + 2; ++e) {
                if (contains(e, p, loc.bary)) {
                    loc.element = e;
                    return loc;
                }
            }
        }
    }
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        if (contains(e, p, loc.bary)) {
            loc.element = e;
            return loc;
        }
    }
    throw OutOfDomain("point not covered by any element");
}

Mesh Mesh::unit_square(int n, const InclusionSpec& spec, const MeshOptions& options) {
    if (n < 1) throw InvalidArgument("mesh needs at least one subdivision per side");
    if (options.pattern == DiagonalPattern::symmetric && n % 2 != 0)
        throw InvalidArgument("symmetric diagonal pattern needs an even subdivision count");
    if (!(options.period > 0.0)) throw InvalidArgument("tagging period must be positive");
    spec.validate();

    Mesh m;
    m.n_ = n;
    const std::size_t stride = static_cast<std::size_t>(n) + 1;
    m.nodes_.reserve(stride * stride);
    m.on_boundary_.assign(stride * stride, 0);
    for (std::size_t j = 0; j < stride; ++j) {
        for (std::size_t i = 0; i < stride; ++i) {
            m.nodes_.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
            if (i == 0 || j == 0 || i == stride - 1 || j == stride - 1) {
                m.on_boundary_[j * stride + i] = 1;
                m.boundary_nodes_.push_back(j * stride + i);
            }
        }
    }

    m.elements_.reserve(2 * static_cast<std::size_t>(n) * n);
    for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            const std::size_t v00 = j * stride + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + stride;
            const std::size_t v11 = v01 + 1;
            bool forward = true;  // diagonal v00-v11
            if (options.pattern == DiagonalPattern::symmetric) {
                const bool left = 2 * i < static_cast<std::size_t>(n);
                const bool bottom = 2 * j < static_cast<std::size_t>(n);
                forward = left == bottom;
            }
            if (forward) {
                m.elements_.push_back({v00, v10, v11});
                m.elements_.push_back({v00, v11, v01});
            } else {
                m.elements_.push_back({v00, v10, v01});
                m.elements_.push_back({v10, v11, v01});
            }
        }
    }

    m.tags_.resize(m.elements_.size());
    for (std::size_t e = 0; e < m.elements_.size(); ++e)
        m.tags_[e] = spec.classify(wrap_to_cell(m.centroid(e), options.period));
    return m;
}

Mesh build_unit_square_mesh(int n, const InclusionSpec& spec, const MeshOptions& options) {
    return Mesh::unit_square(n, spec, options);
}

Location locate_point(const Mesh& mesh, Point p) { return mesh.locate(p); }

Point wrap_to_cell(Point x, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("period eps must be positive");
    return {snap_fraction(x[0] / eps), snap_fraction(x[1] / eps)};
}

void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const NamedField> point_fields,
               const std::string& title) {
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << std::setprecision(17);
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (const Point& p : mesh.nodes()) out << p[0] << ' ' << p[1] << " 0\n";
    out << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
    for (const auto& t : mesh.elements()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.num_elements() << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << "5\n";
    out << "CELL_DATA " << mesh.num_elements() << "\nSCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (Phase p : mesh.tags()) out << static_cast<int>(p) << '\n';
    if (!point_fields.empty()) {
        out << "POINT_DATA " << mesh.num_nodes() << '\n';
        for (const auto& f : point_fields) {
            if (f.values.size() != mesh.num_nodes())
                throw InvalidArgument("field '" + f.name + "' does not match the mesh node count");
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) out << v << '\n';
        }
    }
}

void write_vtk(const std::string& path, const Mesh& mesh, std::span<const NamedField> point_fields,
               const std::string& title) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_vtk(out, mesh, point_fields, title);
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace homs
