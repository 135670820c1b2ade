#include "continuum/projection.hpp"

#include "continuum/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace continuum {

namespace {

// Vertex pairs (tetra-local indices) whose edges cross the plane, in polygon
// order. count is 0, 3 or 4.
struct SlicePattern {
    std::size_t count = 0;
    std::array<std::array<std::uint8_t, 2>, 4> edges{};
};

SlicePattern classify(const std::array<double, 4>& w) {
    SlicePattern p;
    std::array<std::uint8_t, 4> neg{}, pos{};
    std::size_t n_neg = 0, n_pos = 0;
    for (std::uint8_t i = 0; i < 4; ++i) {
        if (w[i] < 0.0) {
            neg[n_neg++] = i;
        } else {
            pos[n_pos++] = i;
        }
    }
    if (n_neg == 0 || n_pos == 0) return p;
    if (n_neg == 2) {
        p.count = 4;
        p.edges = {{{neg[0], pos[0]}, {neg[0], pos[1]}, {neg[1], pos[1]}, {neg[1], pos[0]}}};
        return p;
    }
    const bool lone_negative = n_neg == 1;
    const std::uint8_t lone = lone_negative ? neg[0] : pos[0];
    const auto& others = lone_negative ? pos : neg;
    p.count = 3;
    for (std::size_t k = 0; k < 3; ++k) p.edges[k] = {lone, others[k]};
    return p;
}

double nudge(double w) { return std::abs(w) < kOnPlaneNudge ? w + kOnPlaneNudge : w; }

std::uint64_t edge_key(Index a, Index b) {
    const auto [lo, hi] = std::minmax(a, b);
    return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

// Open-addressing map from edge key to output vertex, reused across calls.
class EdgeTable {
public:
    void reset(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < 2 * expected) cap *= 2;
        keys_.assign(cap, kEmpty);
        values_.resize(cap);
        mask_ = cap - 1;
    }

    std::pair<Index&, bool> find_or_insert(std::uint64_t key) {
        std::size_t i = static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ULL) >> 17) & mask_;
        while (keys_[i] != kEmpty) {
            if (keys_[i] == key) return {values_[i], false};
            i = (i + 1) & mask_;
        }
        keys_[i] = key;
        return {values_[i], true};
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
    std::vector<std::uint64_t> keys_;
    std::vector<Index> values_;
    std::size_t mask_ = 0;
};

EdgeTable& edge_table(std::size_t expected) {
    thread_local EdgeTable table;
    table.reset(expected);
    return table;
}

Vec3 newell_normal(std::span<const Vec3> poly) {
    Vec3 n;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3 a = poly[i];
        const Vec3 b = poly[(i + 1) % poly.size()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    return n;
}

struct TriangleHash {
    std::size_t operator()(const Triangle& t) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (Index v : t) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

// Merges vertices within kMergeDistance, drops degenerate triangles and
// unused vertices. Keeps first-use order so output is deterministic.
TriMesh3 finalize(std::vector<Vec3>&& vertices, std::vector<Rgba>&& colors, std::vector<Triangle>&& triangles) {
    const std::size_t n = vertices.size();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return vertices[a].x < vertices[b].x || (vertices[a].x == vertices[b].x && a < b);
    });
    // Union-find; the smallest (earliest-created) index represents a cluster.
    std::vector<Index> rep(n);
    std::iota(rep.begin(), rep.end(), Index{0});
    const auto find = [&rep](Index v) {
        while (rep[v] != v) v = rep[v] = rep[rep[v]];
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const Index a = order[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Index b = order[j];
            if (vertices[b].x - vertices[a].x > kMergeDistance) break;
            if (std::abs(vertices[b].y - vertices[a].y) <= kMergeDistance &&
                std::abs(vertices[b].z - vertices[a].z) <= kMergeDistance) {
                const Index ra = find(a), rb = find(b);
                if (ra != rb) rep[std::max(ra, rb)] = std::min(ra, rb);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) rep[i] = find(static_cast<Index>(i));

    TriMesh3 out;
    std::vector<Index> remap(n, std::numeric_limits<Index>::max());
    out.triangles.reserve(triangles.size());
    const bool with_colors = !colors.empty();
    for (const auto& t : triangles) {
        const Triangle r{rep[t[0]], rep[t[1]], rep[t[2]]};
        if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
        if (triangle_area(vertices[r[0]], vertices[r[1]], vertices[r[2]]) <= kDegenerateMeasure) continue;
        Triangle o{};
        for (std::size_t k = 0; k < 3; ++k) {
            if (remap[r[k]] == std::numeric_limits<Index>::max()) {
                remap[r[k]] = static_cast<Index>(out.vertices.size());
                out.vertices.push_back(vertices[r[k]]);
                if (with_colors) out.colors.push_back(colors[r[k]]);
            }
            o[k] = remap[r[k]];
        }
        out.triangles.push_back(o);
    }
    return out;
}

// Collapses vertices whose removal leaves the surface unchanged: every
// surviving incident triangle keeps its plane and orientation. Slices of
// cells split by face diagonals otherwise carry extra points on flat faces
// and straight edges. Boundary vertices and vertices with distinct colors
// are kept.
TriMesh3 collapse_flat_vertices(TriMesh3 mesh) {
    const std::size_t n = mesh.vertices.size();
    const bool with_colors = mesh.has_colors();
    // Scratch reused across calls; this runs once per object per frame.
    thread_local std::vector<std::vector<std::uint32_t>> incident;
    thread_local std::vector<Index> all;
    thread_local std::vector<std::pair<Index, int>> ring_v, ring_u;
    if (incident.size() < n) incident.resize(n);
    for (std::size_t v = 0; v < n; ++v) incident[v].clear();
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
        for (Index v : mesh.triangles[t]) incident[v].push_back(t);
    }
    std::vector<bool> alive(mesh.triangles.size(), true);
    const auto has = [](const Triangle& t, Index v) { return t[0] == v || t[1] == v || t[2] == v; };
    const auto normal_of = [&](const Triangle& t, Index from, Index to) {
        std::array<Vec3, 3> p{};
        for (std::size_t k = 0; k < 3; ++k) p[k] = mesh.vertices[t[k] == from ? to : t[k]];
        return cross(p[1] - p[0], p[2] - p[0]);
    };
    // Neighbour -> number of triangles sharing the edge.
    const auto ring = [&](Index v, std::vector<std::pair<Index, int>>& r) {
        all.clear();
        for (std::uint32_t t : incident[v]) {
            for (Index w : mesh.triangles[t]) {
                if (w != v) all.push_back(w);
            }
        }
        std::sort(all.begin(), all.end());
        r.clear();
        for (Index w : all) {
            if (!r.empty() && r.back().first == w) {
                ++r.back().second;
            } else {
                r.emplace_back(w, 1);
            }
        }
    };
    const auto can_collapse = [&](Index v, Index u) {
        if (with_colors) {
            const Rgba a = mesh.colors[v], b = mesh.colors[u];
            if (std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b), std::abs(a.a - b.a)}) > 1e-12) {
                return false;
            }
        }
        const Vec3 shift = mesh.vertices[u] - mesh.vertices[v];
        for (std::uint32_t t : incident[v]) {
            const Triangle& tri = mesh.triangles[t];
            if (has(tri, u)) continue;
            const Vec3 n0 = normal_of(tri, v, v);
            const Vec3 n1 = normal_of(tri, v, u);
            const double l0 = norm(n0), l1 = norm(n1);
            if (0.5 * l1 <= kDegenerateMeasure || l0 == 0.0) return false;
            if (std::abs(dot(n0, shift)) > 1e-10 * l0 * (1.0 + norm(shift))) return false;
            if (dot(n0, n1) <= 0.0 || norm(cross(n0, n1)) > 1e-9 * l0 * l1) return false;
        }
        // Link condition: the only common neighbours are the apexes of the
        // two triangles on edge (u, v).
        ring(u, ring_u);
        int common = 0;
        for (const auto& [w, c] : ring_v) {
            if (w != u && std::binary_search(ring_u.begin(), ring_u.end(), std::make_pair(w, 0),
                                             [](const auto& x, const auto& y) { return x.first < y.first; })) {
                ++common;
            }
        }
        return common == 2;
    };

    // Corners touch three or more planes and never collapse.
    const auto on_at_most_two_planes = [&](Index v) {
        Vec3 planes[2];
        int count = 0;
        for (std::uint32_t t : incident[v]) {
            const Vec3 nt = normal_of(mesh.triangles[t], v, v);
            const double lt = norm(nt);
            if (lt == 0.0) return false;
            bool seen = false;
            for (int k = 0; k < count && !seen; ++k) {
                seen = dot(planes[k], nt) > 0.0 && norm(cross(planes[k], nt)) <= 1e-9 * lt;
            }
            if (seen) continue;
            if (count == 2) return false;
            planes[count++] = nt / lt;
        }
        return true;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (Index v = 0; v < n; ++v) {
            if (incident[v].empty() || !on_at_most_two_planes(v)) continue;
            ring(v, ring_v);
            if (std::any_of(ring_v.begin(), ring_v.end(), [](const auto& e) { return e.second != 2; })) continue;
            for (const auto& [u, count] : ring_v) {
                if (!can_collapse(v, u)) continue;
                for (std::uint32_t t : incident[v]) {
                    Triangle& tri = mesh.triangles[t];
                    if (has(tri, u)) {
                        alive[t] = false;
                        for (Index w : tri) {
                            if (w != v) std::erase(incident[w], t);
                        }
                    } else {
                        for (Index& w : tri) {
                            if (w == v) w = u;
                        }
                        incident[u].push_back(t);
                    }
                }
                incident[v].clear();
                changed = true;
                break;
            }
        }
    }

    TriMesh3 out;
    std::vector<Index> remap(n, std::numeric_limits<Index>::max());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!alive[t]) continue;
        Triangle o{};
        for (std::size_t k = 0; k < 3; ++k) {
            const Index v = mesh.triangles[t][k];
            if (remap[v] == std::numeric_limits<Index>::max()) {
                remap[v] = static_cast<Index>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[v]);
                if (with_colors) out.colors.push_back(mesh.colors[v]);
            }
            o[k] = remap[v];
        }
        out.triangles.push_back(o);
    }
    return out;
}

// Emits a polygon (3 or 4 output indices, non-self-intersecting) as
// triangles; quads are split along their shorter diagonal.
void emit_polygon(std::span<const Index> poly, const std::vector<Vec3>& vertices, std::vector<Triangle>& out) {
    if (poly.size() == 3) {
        out.push_back({poly[0], poly[1], poly[2]});
        return;
    }
    const Vec3 d02 = vertices[poly[2]] - vertices[poly[0]];
    const Vec3 d13 = vertices[poly[3]] - vertices[poly[1]];
    if (dot(d02, d02) <= dot(d13, d13)) {
        out.push_back({poly[0], poly[1], poly[2]});
        out.push_back({poly[0], poly[2], poly[3]});
    } else {
        out.push_back({poly[0], poly[1], poly[3]});
        out.push_back({poly[1], poly[2], poly[3]});
    }
}

void orient_polygon(std::span<Index> poly, const std::vector<Vec3>& vertices, Vec3 desired) {
    std::array<Vec3, 4> pts{};
    for (std::size_t i = 0; i < poly.size(); ++i) pts[i] = vertices[poly[i]];
    const Vec3 n = newell_normal(std::span<const Vec3>(pts.data(), poly.size()));
    if (dot(n, desired) < 0.0) std::reverse(poly.begin(), poly.end());
}

} // namespace

std::string_view to_string(ProjectionMode mode) {
    return mode == ProjectionMode::cross_section ? "cross_section" : "frustum";
}

std::string_view to_string(CameraSync sync) { return sync == CameraSync::synced ? "synced" : "detached"; }

void Camera4::validate() const {
    if (!(focal > 0.0) || !std::isfinite(focal)) throw InvalidArgument("camera focal must be positive");
    if (!(near_w > 0.0) || !(near_w < focal)) throw InvalidArgument("camera near_w must lie in (0, focal)");
}

Pose4 CameraRig::synced_pose() const {
    return Pose4{make_vec4(cam3.position, sync_w), Rotation4::embed(cam3.orientation)};
}

bool CameraRig::satisfies_sync_invariant(double tol) const {
    const Vec4 t = cam4.pose.translation;
    if (std::abs(t.x - cam3.position.x) > tol || std::abs(t.y - cam3.position.y) > tol ||
        std::abs(t.z - cam3.position.z) > tol) {
        return false;
    }
    if (!cam4.pose.rotation.fixes_w_axis(tol)) return false;
    const Matrix3 r = cam4.pose.rotation.upper3();
    for (std::size_t i = 0; i < 9; ++i) {
        if (std::abs(r.m[i] - cam3.orientation.m[i]) > tol) return false;
    }
    return true;
}

void CameraRig::resync() { cam4.pose = synced_pose(); }

SlicePolygon slice_tetra(Vec4 p0, Vec4 p1, Vec4 p2, Vec4 p3, const Hyperplane& plane, std::size_t source_tetra) {
    if (tetra_volume(p0, p1, p2, p3) <= kDegenerateMeasure) throw InvalidArgument("degenerate tetrahedron");
    const std::array<Vec4, 4> local{plane.pose.to_local(p0), plane.pose.to_local(p1), plane.pose.to_local(p2),
                                    plane.pose.to_local(p3)};
    std::array<double, 4> w{};
    for (std::size_t i = 0; i < 4; ++i) w[i] = nudge(local[i].w);

    SlicePolygon out;
    out.source_tetra = source_tetra;
    const SlicePattern pattern = classify(w);
    out.count = pattern.count;
    for (std::size_t k = 0; k < pattern.count; ++k) {
        const auto [i, j] = pattern.edges[k];
        const double t = w[i] / (w[i] - w[j]);
        out.vertices[k] = (local[i] + (local[j] - local[i]) * t).xyz();
    }
    if (out.count > 0) {
        const Vec4 n = cross4(local[1] - local[0], local[2] - local[0], local[3] - local[0]);
        const Vec3 normal = newell_normal(std::span<const Vec3>(out.vertices.data(), out.count));
        if (dot(normal, n.xyz()) < 0.0) std::reverse(out.vertices.begin(), out.vertices.begin() + out.count);
    }
    return out;
}

TriMesh3 cross_section(const TetraMesh4& mesh, const Transform4& model, const Hyperplane& plane) {
    const Transform4 to_local = compose(invert(plane.pose.to_transform()), model);
    const double handedness = to_local.linear().determinant() < 0.0 ? -1.0 : 1.0;
    const auto& src = mesh.vertices();
    const bool with_colors = mesh.has_colors();

    std::vector<Vec4> local(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        local[i] = to_local.apply(src[i]);
        local[i].w = nudge(local[i].w);
    }

    std::vector<Vec3> vertices;
    std::vector<Rgba> colors;
    std::vector<Triangle> triangles;
    vertices.reserve(2 * mesh.tetra_count());
    triangles.reserve(2 * mesh.tetra_count());
    EdgeTable& edge_vertex = edge_table(4 * mesh.tetra_count());

    const auto vertex_on_edge = [&](Index a, Index b) {
        auto [slot, inserted] = edge_vertex.find_or_insert(edge_key(a, b));
        if (inserted) {
            slot = static_cast<Index>(vertices.size());
            const auto [lo, hi] = std::minmax(a, b);
            const double t = local[lo].w / (local[lo].w - local[hi].w);
            vertices.push_back((local[lo] + (local[hi] - local[lo]) * t).xyz());
            if (with_colors) colors.push_back(lerp(mesh.colors()[lo], mesh.colors()[hi], t));
        }
        return slot;
    };

    for (const auto& tet : mesh.tetrahedra()) {
        const std::array<double, 4> w{local[tet[0]].w, local[tet[1]].w, local[tet[2]].w, local[tet[3]].w};
        const SlicePattern pattern = classify(w);
        if (pattern.count == 0) continue;
        std::array<Index, 4> poly{};
        for (std::size_t k = 0; k < pattern.count; ++k) {
            poly[k] = vertex_on_edge(tet[pattern.edges[k][0]], tet[pattern.edges[k][1]]);
        }
        const Vec4 a = local[tet[0]];
        const Vec4 n = cross4(local[tet[1]] - a, local[tet[2]] - a, local[tet[3]] - a) * handedness;
        const std::span<Index> polygon(poly.data(), pattern.count);
        orient_polygon(polygon, vertices, n.xyz());
        emit_polygon(polygon, vertices, triangles);
    }
    return collapse_flat_vertices(finalize(std::move(vertices), std::move(colors), std::move(triangles)));
}

Vec3 frustum_map(Vec4 local, double focal) { return local.xyz() * (focal / (focal + local.w)); }

TriMesh3 frustum_project(const TetraMesh4& mesh, const Transform4& model, const Camera4& cam) {
    if (cam.mode != ProjectionMode::frustum) throw InvalidArgument("frustum_project needs a frustum camera");
    cam.validate();
    const Transform4 to_local = compose(invert(cam.pose.to_transform()), model);
    const double clip_w = cam.near_w - cam.focal;
    const auto& src = mesh.vertices();
    const bool with_colors = mesh.has_colors();
    constexpr Index kUnset = std::numeric_limits<Index>::max();

    std::vector<Vec4> local(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) local[i] = to_local.apply(src[i]);

    std::vector<Vec3> vertices;
    std::vector<Rgba> colors;
    std::vector<Triangle> triangles;
    std::vector<Index> vertex_out(src.size(), kUnset);
    std::unordered_map<std::uint64_t, Index> clip_vertex;
    std::unordered_set<Triangle, TriangleHash> seen_faces;
    seen_faces.reserve(mesh.tetra_count() * 3);

    const auto inside = [&](Index v) { return local[v].w > clip_w; };
    const auto source_vertex = [&](Index v) {
        if (vertex_out[v] == kUnset) {
            vertex_out[v] = static_cast<Index>(vertices.size());
            vertices.push_back(frustum_map(local[v], cam.focal));
            if (with_colors) colors.push_back(mesh.colors()[v]);
        }
        return vertex_out[v];
    };
    const auto clip_point = [&](Index a, Index b) {
        const auto [it, inserted] = clip_vertex.try_emplace(edge_key(a, b), static_cast<Index>(vertices.size()));
        if (inserted) {
            const auto [lo, hi] = std::minmax(a, b);
            const double t = (local[lo].w - clip_w) / (local[lo].w - local[hi].w);
            Vec4 p = local[lo] + (local[hi] - local[lo]) * t;
            p.w = clip_w;
            vertices.push_back(frustum_map(p, cam.focal));
            if (with_colors) colors.push_back(lerp(mesh.colors()[lo], mesh.colors()[hi], t));
        }
        return it->second;
    };
    const auto emit_fan = [&](std::vector<Index>& poly, Vec3 interior) {
        if (poly.size() < 3) return;
        std::vector<Vec3> pts;
        pts.reserve(poly.size());
        for (Index i : poly) pts.push_back(vertices[i]);
        const Vec3 n = newell_normal(pts);
        if (dot(n, pts[0] - interior) < 0.0) std::reverse(poly.begin(), poly.end());
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) triangles.push_back({poly[0], poly[k], poly[k + 1]});
    };

    for (const auto& tet : mesh.tetrahedra()) {
        std::size_t n_inside = 0;
        for (Index v : tet) n_inside += inside(v) ? 1 : 0;
        if (n_inside == 0) continue;

        if (n_inside == 4) {
            for (std::size_t opposite = 0; opposite < 4; ++opposite) {
                Triangle face{};
                std::size_t n = 0;
                for (std::size_t k = 0; k < 4; ++k) {
                    if (k != opposite) face[n++] = tet[k];
                }
                Triangle key = face;
                std::sort(key.begin(), key.end());
                if (!seen_faces.insert(key).second) continue;
                std::vector<Index> poly{source_vertex(face[0]), source_vertex(face[1]), source_vertex(face[2])};
                emit_fan(poly, frustum_map(local[tet[opposite]], cam.focal));
            }
            continue;
        }

        // Partially behind the near margin: clip every face, then cap.
        Vec4 interior4;
        std::size_t n_interior = 0;
        for (Index v : tet) {
            if (inside(v)) {
                interior4 += local[v];
                ++n_interior;
            }
        }
        interior4 = interior4 / static_cast<double>(n_interior);
        interior4.w = 0.5 * (interior4.w + clip_w);
        const Vec3 interior = frustum_map(interior4, cam.focal);

        for (std::size_t opposite = 0; opposite < 4; ++opposite) {
            Triangle face{};
            std::size_t n = 0;
            for (std::size_t k = 0; k < 4; ++k) {
                if (k != opposite) face[n++] = tet[k];
            }
            Triangle key = face;
            std::sort(key.begin(), key.end());
            if (!seen_faces.insert(key).second) continue;
            std::vector<Index> poly;
            for (std::size_t k = 0; k < 3; ++k) {
                const Index a = face[k];
                const Index b = face[(k + 1) % 3];
                if (inside(a)) poly.push_back(source_vertex(a));
                if (inside(a) != inside(b)) poly.push_back(clip_point(a, b));
            }
            emit_fan(poly, interior);
        }

        std::array<double, 4> w{};
        for (std::size_t k = 0; k < 4; ++k) w[k] = local[tet[k]].w - clip_w;
        const SlicePattern cap = classify(w);
        std::vector<Index> poly;
        for (std::size_t k = 0; k < cap.count; ++k) poly.push_back(clip_point(tet[cap.edges[k][0]], tet[cap.edges[k][1]]));
        emit_fan(poly, interior);
    }
    return finalize(std::move(vertices), std::move(colors), std::move(triangles));
}

TriMesh3 project_node(const TetraMesh4& mesh, const Transform4& model, const CameraRig& rig) {
    // A synced slicing camera has no 4D rotation, so the slice can be taken
    // directly in world axes. The result then does not depend on the 3D
    // camera pose at all, which keeps meshes bit-stable while the player moves.
    if (rig.sync == CameraSync::synced && rig.cam4.mode == ProjectionMode::cross_section &&
        rig.cam4.pose.rotation.fixes_w_axis()) {
        return cross_section(mesh, model, Hyperplane::at_w(rig.cam4.pose.translation.w));
    }
    TriMesh3 out = rig.cam4.mode == ProjectionMode::cross_section
                       ? cross_section(mesh, model, rig.cam4.slice_plane())
                       : frustum_project(mesh, model, rig.cam4);
    if (rig.sync == CameraSync::synced) {
        for (auto& v : out.vertices) v = rig.cam3.orientation * v + rig.cam3.position;
    } else {
        for (auto& v : out.vertices) v = rig.cam4.pose.to_world(make_vec4(v, 0.0)).xyz();
    }
    return out;
}

TriMesh3 transform_tri3(const TriMesh3& mesh, const Transform4& model) {
    TriMesh3 out = mesh;
    for (auto& v : out.vertices) v = model.apply(make_vec4(v, 0.0)).xyz();
    if (model.linear().determinant() < 0.0) {
        for (auto& t : out.triangles) std::swap(t[1], t[2]);
    }
    return out;
}

namespace {

// Rotation in the plane (d, e_w) turning d toward -e_w by `angle`.
Rotation4 orbit_rotation(Vec4 d, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec4 e{0, 0, 0, 1};
    Matrix4 m;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            m(i, j) += (c - 1.0) * (d[i] * d[j] + e[i] * e[j]) - s * (e[i] * d[j] - d[i] * e[j]);
        }
    }
    return Rotation4::orthonormalized(m);
}

} // namespace

CameraRig orbit_update(const CameraRig& rig, double delta_angle) {
    if (!rig.orbit) throw InvalidState("camera rig has no orbit");
    if (!std::isfinite(delta_angle)) throw InvalidArgument("orbit delta must be finite");
    if (delta_angle == 0.0) return rig;
    CameraRig out = rig;
    OrbitState& o = *out.orbit;
    o.angle += delta_angle;
    const Vec4 e{0, 0, 0, 1};
    out.cam4.pose.translation = o.focus + (o.view_dir * -std::cos(o.angle) + e * std::sin(o.angle)) * o.radius;
    out.cam4.pose.rotation = orbit_rotation(o.view_dir, o.angle) * o.base_rotation;
    return out;
}

Rotation4 look_along(const Rotation4& reference, Vec4 forward) {
    const double n = norm(forward);
    if (!(n > 0.0)) return reference;
    const Matrix4& r = reference.matrix();
    return Rotation4::orthonormalized(Matrix4::from_columns(r.column(0), r.column(1), forward / n, r.column(3)));
}

CameraRig transition_step(const CameraRig& rig, double alpha) {
    if (rig.sync == CameraSync::synced) throw InvalidState("transition_step needs a detached rig");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (alpha == 0.0) return rig;
    CameraRig out = rig;
    if (alpha == 1.0) {
        out.cam4.pose = rig.synced_pose();
        out.cam4.mode = ProjectionMode::cross_section;
        out.sync = CameraSync::synced;
        out.orbit.reset();
        return out;
    }
    const Pose4 target = rig.synced_pose();
    out.cam4.pose.translation = lerp(rig.cam4.pose.translation, target.translation, alpha);
    if (rig.orbit) {
        out.cam4.pose.rotation = look_along(rig.cam4.pose.rotation, rig.orbit->focus - out.cam4.pose.translation);
    } else {
        Matrix4 blend;
        const Matrix4& a = rig.cam4.pose.rotation.matrix();
        const Matrix4& b = target.rotation.matrix();
        for (std::size_t i = 0; i < 16; ++i) blend.m[i] = a.m[i] + (b.m[i] - a.m[i]) * alpha;
        out.cam4.pose.rotation = Rotation4::orthonormalized(blend);
    }
    return out;
}

} // namespace continuum
