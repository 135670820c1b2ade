#pragma once

#include "continuum/math.hpp"
#include "continuum/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

namespace continuum::testing {

inline std::filesystem::path scenes_dir() { return CONTINUUM_SCENES_DIR; }

inline PlaneAngles random_angles(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> a(-M_PI, M_PI);
    return {a(rng), a(rng), a(rng), a(rng), a(rng), a(rng)};
}

inline Vec4 random_vec4(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng), u(rng)};
}

inline double max_abs(const Matrix4& a, const Matrix4& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < 16; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
    return m;
}

template <std::size_t N>
double max_abs(const std::array<double, N>& a, const std::array<double, N>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(Vec4 a, Vec4 b) {
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(Vec3 a, Vec3 b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

// Distinct positions, merging points closer than tol in max-norm.
inline std::vector<Vec3> unique_points(const std::vector<Vec3>& pts, double tol = 1e-9) {
    std::vector<Vec3> out;
    for (const Vec3& p : pts) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Vec3& q) { return max_abs(p, q) <= tol; });
        if (!seen) out.push_back(p);
    }
    return out;
}

// Every point of `a` has a partner in `b` within tol, and vice versa.
inline bool same_point_set(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol) {
    const auto covered = [tol](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
        return std::all_of(x.begin(), x.end(), [&](const Vec3& p) {
            return std::any_of(y.begin(), y.end(), [&](const Vec3& q) { return max_abs(p, q) <= tol; });
        });
    };
    return covered(a, b) && covered(b, a);
}

// Point-in-closed-surface test by ray parity along a slightly skewed ray.
inline bool inside_surface(const TriMesh3& mesh, Vec3 p) {
    const Vec3 dir{0.5773502691896258, 0.5773512691896258, 0.5773492691896258};
    int crossings = 0;
    for (const Triangle& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
        const Vec3 e1 = b - a, e2 = c - a;
        const Vec3 h = cross(dir, e2);
        const double det = dot(e1, h);
        if (std::abs(det) < 1e-15) continue;
        const double f = 1.0 / det;
        const Vec3 s = p - a;
        const double u = f * dot(s, h);
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 q = cross(s, e1);
        const double v = f * dot(dir, q);
        if (v < 0.0 || u + v > 1.0) continue;
        if (f * dot(e2, q) > 0.0) ++crossings;
    }
    return crossings % 2 == 1;
}

} // namespace continuum::testing
