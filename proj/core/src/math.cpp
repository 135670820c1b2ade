#include "continuum/math.hpp"

#include "continuum/errors.hpp"

#include <algorithm>
#include <utility>

namespace continuum {

namespace {

double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

} // namespace

Vec4 cross4(Vec4 a, Vec4 b, Vec4 c) {
    // Cofactors of the last column of [a b c ·]; this makes
    // det[a b c r] = |r|² >= 0.
    Vec4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        std::array<std::size_t, 3> rows{};
        std::size_t k = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != i) rows[k++] = j;
        }
        const double minor = det3(a[rows[0]], b[rows[0]], c[rows[0]],
                                  a[rows[1]], b[rows[1]], c[rows[1]],
                                  a[rows[2]], b[rows[2]], c[rows[2]]);
        const double sign = ((i + 3) % 2 == 0) ? 1.0 : -1.0;
        r[i] = sign * minor;
    }
    return r;
}

// --- Matrix3 ---------------------------------------------------------------

Matrix3 Matrix3::from_columns(Vec3 c0, Vec3 c1, Vec3 c2) {
    Matrix3 r;
    for (std::size_t i = 0; i < 3; ++i) {
        r(i, 0) = c0[i];
        r(i, 1) = c1[i];
        r(i, 2) = c2[i];
    }
    return r;
}

Matrix3 Matrix3::from_yaw_pitch(double yaw, double pitch) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const Matrix3 ry{{cy, 0, sy, 0, 1, 0, -sy, 0, cy}};
    // Positive pitch tilts the forward (+z) axis toward +y.
    const Matrix3 rx{{1, 0, 0, 0, cp, sp, 0, -sp, cp}};
    return ry * rx;
}

Matrix3 Matrix3::transposed() const {
    Matrix3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
}

double Matrix3::determinant() const {
    return det3(m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8]);
}

Matrix3 operator*(const Matrix3& a, const Matrix3& b) {
    Matrix3 r;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    }
    return r;
}

Vec3 operator*(const Matrix3& a, Vec3 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

// --- Matrix4 ---------------------------------------------------------------

Matrix4 Matrix4::diagonal(Vec4 d) {
    Matrix4 r;
    for (std::size_t i = 0; i < 4; ++i) r(i, i) = d[i];
    return r;
}

Matrix4 Matrix4::from_columns(Vec4 c0, Vec4 c1, Vec4 c2, Vec4 c3) {
    Matrix4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        r(i, 0) = c0[i];
        r(i, 1) = c1[i];
        r(i, 2) = c2[i];
        r(i, 3) = c3[i];
    }
    return r;
}

Matrix4 Matrix4::transposed() const {
    Matrix4 r;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r(i, j) = (*this)(j, i);
    return r;
}

double Matrix4::determinant() const {
    std::array<double, 16> a = m;
    double det = 1.0;
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 4; ++r) {
            if (std::abs(a[r * 4 + col]) > std::abs(a[pivot * 4 + col])) pivot = r;
        }
        if (a[pivot * 4 + col] == 0.0) return 0.0;
        if (pivot != col) {
            for (std::size_t k = 0; k < 4; ++k) std::swap(a[pivot * 4 + k], a[col * 4 + k]);
            det = -det;
        }
        const double p = a[col * 4 + col];
        det *= p;
        for (std::size_t r = col + 1; r < 4; ++r) {
            const double f = a[r * 4 + col] / p;
            for (std::size_t k = col; k < 4; ++k) a[r * 4 + k] -= f * a[col * 4 + k];
        }
    }
    return det;
}

Matrix4 Matrix4::inverse() const {
    std::array<double, 16> a = m;
    Matrix4 inv;
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 4; ++r) {
            if (std::abs(a[r * 4 + col]) > std::abs(a[pivot * 4 + col])) pivot = r;
        }
        if (std::abs(a[pivot * 4 + col]) < 1e-300) throw InvalidArgument("matrix is singular");
        if (pivot != col) {
            for (std::size_t k = 0; k < 4; ++k) {
                std::swap(a[pivot * 4 + k], a[col * 4 + k]);
                std::swap(inv.m[pivot * 4 + k], inv.m[col * 4 + k]);
            }
        }
        const double p = a[col * 4 + col];
        for (std::size_t k = 0; k < 4; ++k) {
            a[col * 4 + k] /= p;
            inv.m[col * 4 + k] /= p;
        }
        for (std::size_t r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r * 4 + col];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < 4; ++k) {
                a[r * 4 + k] -= f * a[col * 4 + k];
                inv.m[r * 4 + k] -= f * inv.m[col * 4 + k];
            }
        }
    }
    return inv;
}

bool Matrix4::is_finite() const {
    return std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); });
}

Matrix4 operator*(const Matrix4& a, const Matrix4& b) {
    Matrix4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    }
    return r;
}

Vec4 operator*(const Matrix4& a, Vec4 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z + a(0, 3) * v.w,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z + a(1, 3) * v.w,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z + a(2, 3) * v.w,
            a(3, 0) * v.x + a(3, 1) * v.y + a(3, 2) * v.z + a(3, 3) * v.w};
}

// --- PlaneAngles / Rotation4 -----------------------------------------------

bool PlaneAngles::is_finite() const {
    return std::isfinite(xy) && std::isfinite(xz) && std::isfinite(yz) && std::isfinite(xw) &&
           std::isfinite(yw) && std::isfinite(zw);
}

Rotation4 Rotation4::from_matrix(const Matrix4& m) {
    if (!m.is_finite()) throw InvalidArgument("rotation matrix has non-finite entries");
    const Matrix4 g = m.transposed() * m;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            if (std::abs(g(i, j) - expected) > kOrthonormalTolerance) {
                throw InvalidArgument("matrix is not orthonormal");
            }
        }
    }
    if (std::abs(m.determinant() - 1.0) > kOrthonormalTolerance) {
        throw InvalidArgument("matrix is not a proper rotation (det != +1)");
    }
    return Rotation4(m);
}

Rotation4 Rotation4::plane(std::size_t a, std::size_t b, double angle) {
    if (a >= 4 || b >= 4 || a == b) throw InvalidArgument("invalid rotation plane");
    if (!std::isfinite(angle)) throw InvalidArgument("rotation angle is not finite");
    const double c = std::cos(angle), s = std::sin(angle);
    Matrix4 m;
    m(a, a) = c;
    m(a, b) = -s;
    m(b, a) = s;
    m(b, b) = c;
    return Rotation4(m);
}

Rotation4 Rotation4::from_plane_angles(const PlaneAngles& angles) {
    if (!angles.is_finite()) throw InvalidArgument("plane angles must be finite");
    Rotation4 r;
    // Each zero angle contributes an exact identity factor.
    const auto mul = [&r](std::size_t a, std::size_t b, double angle) {
        if (angle != 0.0) r = r * plane(a, b, angle);
    };
    mul(0, 1, angles.xy);
    mul(0, 2, angles.xz);
    mul(1, 2, angles.yz);
    mul(0, 3, angles.xw);
    mul(1, 3, angles.yw);
    mul(2, 3, angles.zw);
    return r;
}

Rotation4 Rotation4::embed(const Matrix3& r3) {
    Matrix4 m;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = r3(i, j);
    return Rotation4(m);
}

Rotation4 Rotation4::aligning(Vec4 from, Vec4 to) {
    const double nf = norm(from), nt = norm(to);
    if (!(nf > 0.0) || !(nt > 0.0)) throw InvalidArgument("cannot align zero vectors");
    const Vec4 u = from / nf;
    const Vec4 v = to / nt;
    const double c = std::clamp(dot(u, v), -1.0, 1.0);
    Vec4 p;
    if (c > 1.0 - 1e-15) return identity();
    if (c < -1.0 + 1e-15) {
        // Any direction orthogonal to u works; take the least aligned axis.
        std::size_t axis = 0;
        for (std::size_t i = 1; i < 4; ++i) {
            if (std::abs(u[i]) < std::abs(u[axis])) axis = i;
        }
        Vec4 e;
        e[axis] = 1.0;
        p = e - u * dot(e, u);
    } else {
        p = v - u * c;
    }
    p = p / norm(p);
    const double s = c < -1.0 + 1e-15 ? 0.0 : std::sqrt(std::max(0.0, 1.0 - c * c));
    Matrix4 m;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            m(i, j) += (c - 1.0) * (u[i] * u[j] + p[i] * p[j]) + s * (p[i] * u[j] - u[i] * p[j]);
        }
    }
    return Rotation4(m);
}

Rotation4 Rotation4::orthonormalized(const Matrix4& approx) {
    std::array<Vec4, 4> cols{approx.column(0), approx.column(1), approx.column(2), approx.column(3)};
    constexpr std::array<std::size_t, 4> order{2, 3, 1, 0};
    for (std::size_t k = 0; k < 4; ++k) {
        Vec4 v = cols[order[k]];
        for (std::size_t j = 0; j < k; ++j) v -= cols[order[j]] * dot(v, cols[order[j]]);
        double n = norm(v);
        if (n < 1e-12) {
            // Degenerate input: complete the basis with the first usable axis.
            for (std::size_t axis = 0; axis < 4 && n < 1e-12; ++axis) {
                Vec4 e;
                e[axis] = 1.0;
                v = e;
                for (std::size_t j = 0; j < k; ++j) v -= cols[order[j]] * dot(v, cols[order[j]]);
                n = norm(v);
            }
        }
        cols[order[k]] = v / n;
    }
    Matrix4 m = Matrix4::from_columns(cols[0], cols[1], cols[2], cols[3]);
    if (m.determinant() < 0.0) m = Matrix4::from_columns(-cols[0], cols[1], cols[2], cols[3]);
    return Rotation4(m);
}

Rotation4 Rotation4::inverse() const { return Rotation4(m_.transposed()); }

bool Rotation4::fixes_w_axis(double tol) const {
    for (std::size_t i = 0; i < 3; ++i) {
        if (std::abs(m_(i, 3)) > tol || std::abs(m_(3, i)) > tol) return false;
    }
    return std::abs(m_(3, 3) - 1.0) <= tol;
}

Matrix3 Rotation4::upper3() const {
    Matrix3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r(i, j) = m_(i, j);
    return r;
}

Rotation4 operator*(const Rotation4& a, const Rotation4& b) { return Rotation4(a.m_ * b.m_); }

Rotation4 rotation_from_plane_angles(const PlaneAngles& angles) { return Rotation4::from_plane_angles(angles); }

// --- Transform4 ------------------------------------------------------------

Transform4 Transform4::translate(Vec4 t) {
    if (!t.is_finite()) throw InvalidArgument("translation must be finite");
    return Transform4(Matrix4::identity(), t);
}

Transform4 Transform4::scale(Vec4 s) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (!(s[i] > 0.0) || !std::isfinite(s[i])) throw InvalidArgument("scale components must be positive");
    }
    return Transform4(Matrix4::diagonal(s), {});
}

Transform4 Transform4::rotate(const Rotation4& r) { return Transform4(r.matrix(), {}); }

Transform4 Transform4::trs(Vec4 translation, const Rotation4& rotation, Vec4 s) {
    const Transform4 scaled = scale(s);
    if (!translation.is_finite()) throw InvalidArgument("translation must be finite");
    return Transform4(rotation.matrix() * scaled.linear_, translation);
}

Transform4 Transform4::from_affine(const Matrix4& linear, Vec4 translation) {
    if (!linear.is_finite() || !translation.is_finite()) throw InvalidArgument("transform must be finite");
    return Transform4(linear, translation);
}

std::array<double, 25> Transform4::homogeneous() const {
    std::array<double, 25> h{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) h[i * 5 + j] = linear_(i, j);
        h[i * 5 + 4] = translation_[i];
    }
    h[24] = 1.0;
    return h;
}

Transform4 compose(const Transform4& a, const Transform4& b) {
    return Transform4::from_affine(a.linear() * b.linear(), a.linear() * b.translation() + a.translation());
}

Transform4 invert(const Transform4& t) {
    const Matrix4 inv = t.linear().inverse();
    return Transform4::from_affine(inv, -(inv * t.translation()));
}

double max_abs_difference(const Transform4& a, const Transform4& b) {
    const auto ha = a.homogeneous();
    const auto hb = b.homogeneous();
    double d = 0.0;
    for (std::size_t i = 0; i < ha.size(); ++i) d = std::max(d, std::abs(ha[i] - hb[i]));
    return d;
}

} // namespace continuum
