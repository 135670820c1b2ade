#include "continuum/mesh.hpp"

#include "continuum/errors.hpp"

#include <string>

namespace continuum {

double triangle_area(Vec3 a, Vec3 b, Vec3 c) { return 0.5 * norm(cross(b - a, c - a)); }

double tetra_volume(Vec4 a, Vec4 b, Vec4 c, Vec4 d) { return norm(cross4(b - a, c - a, d - a)) / 6.0; }

void TriMesh3::validate() const {
    if (!colors.empty() && colors.size() != vertices.size()) {
        throw InvalidArgument("color count does not match vertex count");
    }
    for (std::size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        for (Index v : t) {
            if (v >= vertices.size()) throw InvalidArgument("triangle " + std::to_string(i) + " index out of range");
        }
        if (triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= kDegenerateMeasure) {
            throw InvalidArgument("triangle " + std::to_string(i) + " is degenerate");
        }
    }
}

double TriMesh3::signed_volume() const {
    double v = 0.0;
    for (const auto& t : triangles) {
        v += dot(vertices[t[0]], cross(vertices[t[1]], vertices[t[2]]));
    }
    return v / 6.0;
}

double TriMesh3::surface_area() const {
    double a = 0.0;
    for (const auto& t : triangles) a += triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    return a;
}

TetraMesh4::TetraMesh4(std::vector<Vec4> vertices, std::vector<Tetrahedron> tetrahedra, std::vector<Rgba> colors)
    : vertices_(std::move(vertices)), tetrahedra_(std::move(tetrahedra)), colors_(std::move(colors)) {
    if (!colors_.empty() && colors_.size() != vertices_.size()) {
        throw InvalidArgument("color count does not match vertex count");
    }
    for (const auto& v : vertices_) {
        if (!v.is_finite()) throw InvalidArgument("vertex is not finite");
    }
    for (std::size_t i = 0; i < tetrahedra_.size(); ++i) {
        const auto& t = tetrahedra_[i];
        for (std::size_t a = 0; a < 4; ++a) {
            if (t[a] >= vertices_.size()) {
                throw InvalidArgument("tetrahedron " + std::to_string(i) + " index out of range");
            }
            for (std::size_t b = a + 1; b < 4; ++b) {
                if (t[a] == t[b]) throw InvalidArgument("tetrahedron " + std::to_string(i) + " repeats a vertex");
            }
        }
        if (tetra_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]) <= kDegenerateMeasure) {
            throw InvalidArgument("tetrahedron " + std::to_string(i) + " is degenerate");
        }
    }
}

Vec4 TetraMesh4::oriented_normal(std::size_t tetra) const {
    const auto& t = tetrahedra_.at(tetra);
    const Vec4 a = vertices_[t[0]];
    return cross4(vertices_[t[1]] - a, vertices_[t[2]] - a, vertices_[t[3]] - a);
}

Vec4 TetraMesh4::centroid() const {
    if (vertices_.empty()) throw InvalidArgument("empty mesh has no centroid");
    Vec4 c;
    for (const auto& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
}

TetraMesh4 TetraMesh4::with_colors(std::vector<Rgba> colors) const {
    return TetraMesh4(vertices_, tetrahedra_, std::move(colors));
}

} // namespace continuum
