#pragma once

// 4D linear algebra: vectors, plane rotations, affine transforms, poses and
// hyperplanes. Rotations are always carried as matrices; plane angles are an
// input convenience and are never extracted back out of a matrix.

#include <array>
#include <cmath>
#include <cstddef>

namespace continuum {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    Vec3& operator+=(Vec3 b) { return *this = *this + b; }
    Vec3& operator-=(Vec3 b) { return *this = *this - b; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct Vec4 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 0.0;

    constexpr double& operator[](std::size_t i) {
        switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
        default: return w;
        }
    }
    constexpr double operator[](std::size_t i) const {
        switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
        default: return w;
        }
    }

    constexpr Vec3 xyz() const { return {x, y, z}; }
    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(w);
    }

    friend constexpr Vec4 operator+(Vec4 a, Vec4 b) { return {a.x + b.x, a.y + b.y, a.z + b.z, a.w + b.w}; }
    friend constexpr Vec4 operator-(Vec4 a, Vec4 b) { return {a.x - b.x, a.y - b.y, a.z - b.z, a.w - b.w}; }
    friend constexpr Vec4 operator-(Vec4 a) { return {-a.x, -a.y, -a.z, -a.w}; }
    friend constexpr Vec4 operator*(Vec4 a, double s) { return {a.x * s, a.y * s, a.z * s, a.w * s}; }
    friend constexpr Vec4 operator*(double s, Vec4 a) { return a * s; }
    friend constexpr Vec4 operator/(Vec4 a, double s) { return {a.x / s, a.y / s, a.z / s, a.w / s}; }
    Vec4& operator+=(Vec4 b) { return *this = *this + b; }
    Vec4& operator-=(Vec4 b) { return *this = *this - b; }
    friend constexpr bool operator==(Vec4, Vec4) = default;
};

constexpr Vec4 make_vec4(Vec3 v, double w) { return {v.x, v.y, v.z, w}; }
constexpr double dot(Vec4 a, Vec4 b) { return a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w; }
inline double norm(Vec4 a) { return std::sqrt(dot(a, a)); }
constexpr Vec4 lerp(Vec4 a, Vec4 b, double t) { return a + (b - a) * t; }

// Vector orthogonal to a, b and c, oriented so that det[a b c result] > 0
// (zero when the inputs are linearly dependent). Its length is the 3-volume
// of the parallelepiped spanned by a, b, c.
Vec4 cross4(Vec4 a, Vec4 b, Vec4 c);

// Row-major 3x3 matrix.
struct Matrix3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr Matrix3 identity() { return {}; }
    static Matrix3 from_columns(Vec3 c0, Vec3 c1, Vec3 c2);
    // Rotation about +y by `yaw`, then about the rotated +x by `pitch`.
    static Matrix3 from_yaw_pitch(double yaw, double pitch);

    constexpr double operator()(std::size_t r, std::size_t c) const { return m[r * 3 + c]; }
    constexpr double& operator()(std::size_t r, std::size_t c) { return m[r * 3 + c]; }
    Vec3 column(std::size_t c) const { return {m[c], m[3 + c], m[6 + c]}; }
    Matrix3 transposed() const;
    double determinant() const;

    friend Matrix3 operator*(const Matrix3& a, const Matrix3& b);
    friend Vec3 operator*(const Matrix3& a, Vec3 v);
    friend bool operator==(const Matrix3&, const Matrix3&) = default;
};

// Row-major general 4x4 matrix.
struct Matrix4 {
    std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

    static constexpr Matrix4 identity() { return {}; }
    static Matrix4 diagonal(Vec4 d);
    static Matrix4 from_columns(Vec4 c0, Vec4 c1, Vec4 c2, Vec4 c3);

    constexpr double operator()(std::size_t r, std::size_t c) const { return m[r * 4 + c]; }
    constexpr double& operator()(std::size_t r, std::size_t c) { return m[r * 4 + c]; }
    Vec4 column(std::size_t c) const { return {m[c], m[4 + c], m[8 + c], m[12 + c]}; }
    Vec4 row(std::size_t r) const { return {m[r * 4], m[r * 4 + 1], m[r * 4 + 2], m[r * 4 + 3]}; }
    Matrix4 transposed() const;
    double determinant() const;
    // Throws InvalidArgument when |det| is below 1e-300.
    Matrix4 inverse() const;
    bool is_finite() const;

    friend Matrix4 operator*(const Matrix4& a, const Matrix4& b);
    friend Vec4 operator*(const Matrix4& a, Vec4 v);
    friend bool operator==(const Matrix4&, const Matrix4&) = default;
};

// Angles in radians for the six coordinate planes. xw, yw, zw are the
// "hyper" planes that mix the fourth axis into 3D space.
struct PlaneAngles {
    double xy = 0.0;
    double xz = 0.0;
    double yz = 0.0;
    double xw = 0.0;
    double yw = 0.0;
    double zw = 0.0;

    bool is_finite() const;
    bool is_zero() const { return xy == 0 && xz == 0 && yz == 0 && xw == 0 && yw == 0 && zw == 0; }
    friend PlaneAngles operator*(const PlaneAngles& a, double s) {
        return {a.xy * s, a.xz * s, a.yz * s, a.xw * s, a.yw * s, a.zw * s};
    }
    friend bool operator==(const PlaneAngles&, const PlaneAngles&) = default;
};

inline constexpr double kOrthonormalTolerance = 1e-9;

// Proper orthogonal 4x4 matrix (mᵀm = I, det = +1 within 1e-9 per entry).
class Rotation4 {
public:
    Rotation4() = default;

    static Rotation4 identity() { return {}; }
    // Validates orthonormality and orientation; throws InvalidArgument.
    static Rotation4 from_matrix(const Matrix4& m);
    // Rotation by `angle` in the plane of axes (a, b), a < b, turning +a toward +b.
    static Rotation4 plane(std::size_t a, std::size_t b, double angle);
    // Product R_xy · R_xz · R_yz · R_xw · R_yw · R_zw (R_zw acts first).
    static Rotation4 from_plane_angles(const PlaneAngles& angles);
    // 3D rotation acting on x, y, z; w is left fixed.
    static Rotation4 embed(const Matrix3& r3);
    // Minimal rotation (in the plane spanned by the two vectors) taking
    // direction `from` onto direction `to`. Both must be nonzero.
    static Rotation4 aligning(Vec4 from, Vec4 to);
    // Gram-Schmidt re-orthonormalization of an approximate rotation
    // (columns processed in order z, w, y, x so that view axes dominate).
    static Rotation4 orthonormalized(const Matrix4& approx);

    const Matrix4& matrix() const { return m_; }
    Vec4 column(std::size_t c) const { return m_.column(c); }
    double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
    Rotation4 inverse() const;
    // True when the w axis is mapped to itself, i.e. a pure 3D rotation.
    bool fixes_w_axis(double tol = 0.0) const;
    Matrix3 upper3() const;

    friend Rotation4 operator*(const Rotation4& a, const Rotation4& b);
    friend Vec4 operator*(const Rotation4& a, Vec4 v) { return a.m_ * v; }
    friend bool operator==(const Rotation4&, const Rotation4&) = default;

private:
    explicit Rotation4(const Matrix4& m) : m_(m) {}
    Matrix4 m_{};
};

// Canonical six-angle rotation; see Rotation4::from_plane_angles.
// Throws InvalidArgument on non-finite input.
Rotation4 rotation_from_plane_angles(const PlaneAngles& angles);

// Affine map p -> linear · p + translation; the 5x5 homogeneous form has last
// row (0,0,0,0,1). Built from scale-then-rotate-then-translate; composites of
// anisotropic scales and rotations stay exact because the linear block is a
// general matrix.
class Transform4 {
public:
    Transform4() = default;

    static Transform4 identity() { return {}; }
    static Transform4 translate(Vec4 t);
    // Throws InvalidArgument unless every component is > 0 and finite.
    static Transform4 scale(Vec4 s);
    static Transform4 rotate(const Rotation4& r);
    static Transform4 trs(Vec4 translation, const Rotation4& rotation, Vec4 scale);
    static Transform4 from_affine(const Matrix4& linear, Vec4 translation);

    const Matrix4& linear() const { return linear_; }
    Vec4 translation() const { return translation_; }
    std::array<double, 25> homogeneous() const;

    Vec4 apply(Vec4 p) const { return linear_ * p + translation_; }
    Vec4 apply_direction(Vec4 d) const { return linear_ * d; }

    friend bool operator==(const Transform4&, const Transform4&) = default;

private:
    Transform4(const Matrix4& linear, Vec4 translation) : linear_(linear), translation_(translation) {}
    Matrix4 linear_{};
    Vec4 translation_{};
};

// a ∘ b: applies b first, then a.
Transform4 compose(const Transform4& a, const Transform4& b);
inline Vec4 apply(const Transform4& t, Vec4 p) { return t.apply(p); }
// Throws InvalidArgument when the linear block is singular.
Transform4 invert(const Transform4& t);
double max_abs_difference(const Transform4& a, const Transform4& b);

struct Pose4 {
    Vec4 translation{};
    Rotation4 rotation{};

    Transform4 to_transform() const { return Transform4::trs(translation, rotation, {1, 1, 1, 1}); }
    Vec4 to_local(Vec4 world) const { return rotation.inverse() * (world - translation); }
    Vec4 to_world(Vec4 local) const { return rotation * local + translation; }
    friend bool operator==(const Pose4&, const Pose4&) = default;
};

// The set of points whose pose-local w coordinate is zero.
struct Hyperplane {
    Pose4 pose{};

    static Hyperplane at_w(double w) { return {Pose4{{0, 0, 0, w}, Rotation4::identity()}}; }
    Vec4 normal() const { return pose.rotation.column(3); }
    double signed_distance(Vec4 p) const { return dot(normal(), p - pose.translation); }
};

} // namespace continuum
