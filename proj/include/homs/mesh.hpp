#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "homs/types.hpp"

namespace homs {

/// Two-phase layout of the unit cell. Lengths are in unit-cell coordinates.
struct InclusionSpec {
    enum class Kind { none, disk, axis_cross, stripes };

    Kind kind = Kind::none;
    Point center{0.5, 0.5};  // disk
    double radius = 0.25;    // disk
    double half_width = 0.125;  // axis_cross arms, stripes band half-width
    int direction = 0;       // stripes: 0 = band parallel to y1, 1 = parallel to y2

    static InclusionSpec none() { return {}; }
    static InclusionSpec disk(Point center, double radius);
    static InclusionSpec axis_cross(double half_width);
    static InclusionSpec stripes(int direction, double width);

    /// Throws InvalidArgument when the geometry is degenerate or a disk touches ∂Y.
    void validate() const;

    /// Phase of a point given in unit-cell coordinates.
    Phase classify(Point y) const;

    std::string describe() const;
};

/// How each structured square is cut into two triangles.
enum class DiagonalPattern {
    /// every square split along its (i,j)-(i+1,j+1) diagonal
    uniform,
    /// diagonals mirrored about x=1/2 and y=1/2; requires even n
    symmetric,
};

struct MeshOptions {
    DiagonalPattern pattern = DiagonalPattern::uniform;
    /// Phase tags are taken at wrap_to_cell(centroid, period); 1 tags the unit cell itself.
    double period = 1.0;
};

/// Element containing a point plus the point's barycentric coordinates there.
struct Location {
    std::size_t element = 0;
    std::array<double, 3> bary{};
};

/// Conforming P1 triangulation of the unit square with per-element phase tags.
class Mesh {
public:
    using Triangle = std::array<std::size_t, 3>;

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    int subdivisions() const { return n_; }
    double h() const { return 1.0 / n_; }

    std::span<const Point> nodes() const { return nodes_; }
    std::span<const Triangle> elements() const { return elements_; }
    std::span<const Phase> tags() const { return tags_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    const Triangle& element(std::size_t e) const { return elements_[e]; }
    Phase tag(std::size_t e) const { return tags_[e]; }

    bool is_boundary(std::size_t node) const { return on_boundary_[node] != 0; }
    std::span<const std::size_t> boundary_nodes() const { return boundary_nodes_; }

    /// Signed area (positive for counter-clockwise elements).
    double signed_area(std::size_t e) const;
    Point centroid(std::size_t e) const;
    double tagged_area(Phase p) const;

    /// Constant gradients of the three P1 basis functions on element e.
    std::array<Vec2, 3> basis_gradients(std::size_t e) const;

    Location locate(Point p) const;

    static Mesh unit_square(int n, const InclusionSpec& spec, const MeshOptions& options);

private:
    bool contains(std::size_t e, Point p, std::array<double, 3>& bary) const;

    int n_ = 0;
    std::vector<Point> nodes_;
    std::vector<Triangle> elements_;
    std::vector<Phase> tags_;
    std::vector<std::uint8_t> on_boundary_;
    std::vector<std::size_t> boundary_nodes_;
};

/// (n+1)^2 nodes, 2n^2 counter-clockwise triangles. Node (i,j) has index j*(n+1)+i and
/// square (i,j) owns elements 2*(j*n+i) and 2*(j*n+i)+1.
Mesh build_unit_square_mesh(int n, const InclusionSpec& spec = InclusionSpec::none(),
                            const MeshOptions& options = {});

/// Element and barycentric coordinates of p; p must lie in [0,1]^2.
Location locate_point(const Mesh& mesh, Point p);

/// frac(x/eps) componentwise, in [0,1).
Point wrap_to_cell(Point x, double eps);

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// Legacy ASCII VTK unstructured grid with nodal fields and the phase tag as cell data.
void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const NamedField> point_fields = {},
               const std::string& title = "homs mesh");
void write_vtk(const std::string& path, const Mesh& mesh, std::span<const NamedField> point_fields = {},
               const std::string& title = "homs mesh");

}  // namespace homs
