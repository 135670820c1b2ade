#include "continuum/geometry.hpp"

#include "continuum/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

namespace continuum {

namespace {

void orient_away_from(const std::vector<Vec4>& vertices, std::vector<Tetrahedron>& tets, Vec4 center) {
    for (auto& t : tets) {
        const Vec4 a = vertices[t[0]];
        const Vec4 n = cross4(vertices[t[1]] - a, vertices[t[2]] - a, vertices[t[3]] - a);
        const Vec4 c = (vertices[t[0]] + vertices[t[1]] + vertices[t[2]] + vertices[t[3]]) * 0.25;
        if (dot(n, c - center) < 0.0) std::swap(t[2], t[3]);
    }
}

TetraMesh4 make_tesseract(double edge) {
    const double h = 0.5 * edge;
    std::vector<Vec4> vertices(16);
    for (Index i = 0; i < 16; ++i) {
        for (std::size_t k = 0; k < 4; ++k) vertices[i][k] = (i >> k) & 1U ? h : -h;
    }
    std::vector<Tetrahedron> tets;
    tets.reserve(48);
    for (std::size_t axis = 0; axis < 4; ++axis) {
        std::array<Index, 3> free{};
        std::size_t n = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            if (k != axis) free[n++] = Index{1} << k;
        }
        for (Index side = 0; side < 2; ++side) {
            const Index base = side << axis;
            // Kuhn split: one tetrahedron per monotone path from the cell's
            // lowest corner to its highest. Every square face is cut along
            // its lowest-to-highest diagonal, so adjacent cells agree.
            std::array<Index, 3> perm = free;
            std::sort(perm.begin(), perm.end());
            do {
                const Index v0 = base;
                const Index v1 = v0 | perm[0];
                const Index v2 = v1 | perm[1];
                const Index v3 = v2 | perm[2];
                tets.push_back({v0, v1, v2, v3});
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
    orient_away_from(vertices, tets, {});
    return TetraMesh4(std::move(vertices), std::move(tets));
}

TetraMesh4 make_pentachoron(double radius) {
    const double r5 = std::sqrt(5.0);
    const double s = radius / (4.0 / r5);
    std::vector<Vec4> vertices{
        Vec4{1, 1, 1, -1 / r5} * s,
        Vec4{1, -1, -1, -1 / r5} * s,
        Vec4{-1, 1, -1, -1 / r5} * s,
        Vec4{-1, -1, 1, -1 / r5} * s,
        Vec4{0, 0, 0, 4 / r5} * s,
    };
    std::vector<Tetrahedron> tets;
    for (Index skip = 0; skip < 5; ++skip) {
        Tetrahedron t{};
        std::size_t n = 0;
        for (Index v = 0; v < 5; ++v) {
            if (v != skip) t[n++] = v;
        }
        tets.push_back(t);
    }
    orient_away_from(vertices, tets, {});
    return TetraMesh4(std::move(vertices), std::move(tets));
}

std::pair<std::vector<Vec4>, std::vector<Tetrahedron>> cross_polytope(double radius) {
    std::vector<Vec4> vertices(8);
    for (std::size_t k = 0; k < 4; ++k) {
        vertices[2 * k][k] = radius;
        vertices[2 * k + 1][k] = -radius;
    }
    std::vector<Tetrahedron> tets;
    for (Index signs = 0; signs < 16; ++signs) {
        tets.push_back({0 + (signs & 1U), 2 + ((signs >> 1) & 1U), 4 + ((signs >> 2) & 1U), 6 + ((signs >> 3) & 1U)});
    }
    return {std::move(vertices), std::move(tets)};
}

void subdivide(std::vector<Vec4>& vertices, std::vector<Tetrahedron>& tets) {
    std::map<std::pair<Index, Index>, Index> midpoints;
    const auto mid = [&](Index a, Index b) {
        const auto key = std::minmax(a, b);
        auto it = midpoints.find(key);
        if (it != midpoints.end()) return it->second;
        const auto idx = static_cast<Index>(vertices.size());
        vertices.push_back((vertices[a] + vertices[b]) * 0.5);
        midpoints.emplace(key, idx);
        return idx;
    };
    std::vector<Tetrahedron> out;
    out.reserve(tets.size() * 8);
    for (const auto& t : tets) {
        const Index a = t[0], b = t[1], c = t[2], d = t[3];
        const Index ab = mid(a, b), ac = mid(a, c), ad = mid(a, d);
        const Index bc = mid(b, c), bd = mid(b, d), cd = mid(c, d);
        out.push_back({a, ab, ac, ad});
        out.push_back({b, ab, bc, bd});
        out.push_back({c, ac, bc, cd});
        out.push_back({d, ad, bd, cd});
        // Inner octahedron, split around the ab-cd diagonal.
        out.push_back({ab, cd, ac, ad});
        out.push_back({ab, cd, ad, bd});
        out.push_back({ab, cd, bd, bc});
        out.push_back({ab, cd, bc, ac});
    }
    tets = std::move(out);
}

TetraMesh4 make_hypersphere(double radius, int subdivision) {
    auto [vertices, tets] = cross_polytope(radius);
    for (int level = 0; level < subdivision; ++level) subdivide(vertices, tets);
    for (auto& v : vertices) v = v * (radius / norm(v));
    orient_away_from(vertices, tets, {});
    return TetraMesh4(std::move(vertices), std::move(tets));
}

} // namespace

std::string_view to_string(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::tesseract: return "tesseract";
    case PrimitiveKind::pentachoron: return "pentachoron";
    case PrimitiveKind::hexadecachoron: return "hexadecachoron";
    case PrimitiveKind::hypersphere: return "hypersphere";
    }
    return "unknown";
}

std::optional<PrimitiveKind> parse_primitive_kind(std::string_view name) {
    if (name == "tesseract") return PrimitiveKind::tesseract;
    if (name == "pentachoron" || name == "5-cell") return PrimitiveKind::pentachoron;
    if (name == "hexadecachoron" || name == "16-cell") return PrimitiveKind::hexadecachoron;
    if (name == "hypersphere") return PrimitiveKind::hypersphere;
    return std::nullopt;
}

TetraMesh4 make_primitive(PrimitiveKind kind, double size, int subdivision) {
    if (!(size > 0.0) || !std::isfinite(size)) throw InvalidArgument("primitive size must be positive");
    if (subdivision < 0 || subdivision > 6) throw InvalidArgument("subdivision must be in [0, 6]");
    switch (kind) {
    case PrimitiveKind::tesseract: return make_tesseract(size);
    case PrimitiveKind::pentachoron: return make_pentachoron(size);
    case PrimitiveKind::hexadecachoron: {
        auto [vertices, tets] = cross_polytope(size);
        orient_away_from(vertices, tets, {});
        return TetraMesh4(std::move(vertices), std::move(tets));
    }
    case PrimitiveKind::hypersphere: return make_hypersphere(size, subdivision);
    }
    throw InvalidArgument("unknown primitive kind");
}

TetraMesh4 extrude_lift(const TriMesh3& surface, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth)) throw InvalidArgument("extrusion depth must be positive");
    if (surface.triangles.empty()) throw InvalidArgument("cannot extrude an empty surface");
    surface.validate();

    const auto n = static_cast<Index>(surface.vertices.size());
    std::vector<Vec4> vertices;
    vertices.reserve(2 * n);
    for (const auto& v : surface.vertices) vertices.push_back(make_vec4(v, 0.0));
    for (const auto& v : surface.vertices) vertices.push_back(make_vec4(v, depth));

    std::vector<Tetrahedron> tets;
    tets.reserve(3 * surface.triangles.size());
    for (const auto& tri : surface.triangles) {
        const Vec3 normal3 = cross(surface.vertices[tri[1]] - surface.vertices[tri[0]],
                                   surface.vertices[tri[2]] - surface.vertices[tri[0]]);
        const Vec4 normal = make_vec4(normal3, 0.0);
        std::array<Index, 3> v = tri;
        std::sort(v.begin(), v.end());
        // Side quad (vi, vj), i < j, is cut along vj -- vi'.
        std::array<Tetrahedron, 3> prism{{
            {v[0], v[1], v[2], v[0] + n},
            {v[1], v[2], v[0] + n, v[1] + n},
            {v[2], v[0] + n, v[1] + n, v[2] + n},
        }};
        for (auto& t : prism) {
            const Vec4 a = vertices[t[0]];
            if (dot(cross4(vertices[t[1]] - a, vertices[t[2]] - a, vertices[t[3]] - a), normal) < 0.0) {
                std::swap(t[2], t[3]);
            }
            tets.push_back(t);
        }
    }
    std::vector<Rgba> colors;
    if (surface.has_colors()) {
        colors = surface.colors;
        colors.insert(colors.end(), surface.colors.begin(), surface.colors.end());
    }
    return TetraMesh4(std::move(vertices), std::move(tets), std::move(colors));
}

WExtent mesh_w_extent(const TetraMesh4& mesh, const Transform4& model) {
    if (mesh.vertices().empty()) throw InvalidArgument("mesh has no vertices");
    WExtent e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& v : mesh.vertices()) {
        const double w = model.apply(v).w;
        e.w_min = std::min(e.w_min, w);
        e.w_max = std::max(e.w_max, w);
    }
    return e;
}

TriMesh3 make_box_surface(Vec3 size) {
    const Vec3 h = size * 0.5;
    TriMesh3 m;
    for (Index i = 0; i < 8; ++i) {
        m.vertices.push_back({i & 1U ? h.x : -h.x, i & 2U ? h.y : -h.y, i & 4U ? h.z : -h.z});
    }
    // Two triangles per face, counter-clockwise seen from outside.
    m.triangles = {
        {0, 4, 6}, {0, 6, 2}, // -x
        {1, 3, 7}, {1, 7, 5}, // +x
        {0, 1, 5}, {0, 5, 4}, // -y
        {2, 6, 7}, {2, 7, 3}, // +y
        {0, 2, 3}, {0, 3, 1}, // -z
        {4, 5, 7}, {4, 7, 6}, // +z
    };
    return m;
}

TriMesh3 make_ground_quad(double size_x, double size_z) {
    const double hx = 0.5 * size_x, hz = 0.5 * size_z;
    TriMesh3 m;
    m.vertices = {{-hx, 0, -hz}, {hx, 0, -hz}, {hx, 0, hz}, {-hx, 0, hz}};
    m.triangles = {{0, 2, 1}, {0, 3, 2}};
    return m;
}

} // namespace continuum
