#pragma once

#include "continuum/math.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace continuum {

struct Rgba {
    double r = 1.0;
    double g = 1.0;
    double b = 1.0;
    double a = 1.0;

    friend constexpr Rgba operator+(Rgba x, Rgba y) { return {x.r + y.r, x.g + y.g, x.b + y.b, x.a + y.a}; }
    friend constexpr Rgba operator*(Rgba x, double s) { return {x.r * s, x.g * s, x.b * s, x.a * s}; }
    friend constexpr bool operator==(Rgba, Rgba) = default;
};

constexpr Rgba lerp(Rgba a, Rgba b, double t) { return a * (1.0 - t) + b * t; }

using Index = std::uint32_t;
using Triangle = std::array<Index, 3>;
using Tetrahedron = std::array<Index, 4>;

// Simplex measures below this are treated as degenerate.
inline constexpr double kDegenerateMeasure = 1e-12;

double triangle_area(Vec3 a, Vec3 b, Vec3 c);
// 3-volume of a tetrahedron embedded in 4D.
double tetra_volume(Vec4 a, Vec4 b, Vec4 c, Vec4 d);

// Projected 3D triangle mesh. `colors` is either empty or parallel to
// `vertices`.
struct TriMesh3 {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<Rgba> colors;

    bool empty() const { return triangles.empty(); }
    bool has_colors() const { return !colors.empty(); }
    // Indices in range, colors parallel, every triangle above the degeneracy
    // threshold. Throws InvalidArgument.
    void validate() const;
    // Volume enclosed by a closed, consistently wound surface (positive when
    // wound counter-clockwise seen from outside).
    double signed_volume() const;
    double surface_area() const;

    friend bool operator==(const TriMesh3&, const TriMesh3&) = default;
};

// Tetrahedral mesh over 4D vertices. Each tetrahedron (a,b,c,d) carries an
// orientation: its normal is cross4(b-a, c-a, d-a). Closed primitives are
// wound with normals pointing away from the interior.
class TetraMesh4 {
public:
    TetraMesh4() = default;
    // Validates the invariants; throws InvalidArgument.
    TetraMesh4(std::vector<Vec4> vertices, std::vector<Tetrahedron> tetrahedra, std::vector<Rgba> colors = {});

    const std::vector<Vec4>& vertices() const { return vertices_; }
    const std::vector<Tetrahedron>& tetrahedra() const { return tetrahedra_; }
    const std::vector<Rgba>& colors() const { return colors_; }
    bool has_colors() const { return !colors_.empty(); }
    bool empty() const { return tetrahedra_.empty(); }
    std::size_t tetra_count() const { return tetrahedra_.size(); }

    Vec4 oriented_normal(std::size_t tetra) const;
    Vec4 centroid() const;
    TetraMesh4 with_colors(std::vector<Rgba> colors) const;

    friend bool operator==(const TetraMesh4&, const TetraMesh4&) = default;

private:
    std::vector<Vec4> vertices_;
    std::vector<Tetrahedron> tetrahedra_;
    std::vector<Rgba> colors_;
};

} // namespace continuum
