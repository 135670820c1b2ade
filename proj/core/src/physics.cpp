#include "continuum/physics.hpp"

#include "continuum/errors.hpp"

#include <algorithm>
#include <limits>

namespace continuum {

std::string_view to_string(ColliderKind kind) {
    switch (kind) {
    case ColliderKind::hypersphere: return "hypersphere";
    case ColliderKind::hyperbox: return "hyperbox";
    case ColliderKind::halfspace: return "halfspace";
    }
    return "unknown";
}

Collider4 Collider4::hypersphere(double radius) {
    Collider4 c;
    c.kind = ColliderKind::hypersphere;
    c.radius = radius;
    c.validate();
    return c;
}

Collider4 Collider4::hyperbox(Vec4 half_extents) {
    Collider4 c;
    c.kind = ColliderKind::hyperbox;
    c.half_extents = half_extents;
    c.validate();
    return c;
}

Collider4 Collider4::halfspace(const Hyperplane& plane) {
    Collider4 c;
    c.kind = ColliderKind::halfspace;
    c.plane = plane;
    return c;
}

Collider4 Collider4::halfspace(Vec4 normal, double offset) {
    const double n = norm(normal);
    if (!(n > 0.0) || !std::isfinite(offset)) throw InvalidArgument("halfspace normal must be nonzero");
    const Vec4 unit = normal / n;
    Hyperplane plane;
    plane.pose.rotation = Rotation4::aligning({0, 0, 0, 1}, unit);
    plane.pose.translation = unit * (offset / n);
    return halfspace(plane);
}

void Collider4::validate() const {
    switch (kind) {
    case ColliderKind::hypersphere:
        if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("hypersphere radius must be positive");
        break;
    case ColliderKind::hyperbox:
        for (std::size_t i = 0; i < 4; ++i) {
            if (!(half_extents[i] > 0.0) || !std::isfinite(half_extents[i])) {
                throw InvalidArgument("hyperbox half extents must be positive");
            }
        }
        break;
    case ColliderKind::halfspace: break;
    }
}

double RigidBody4::inverse_mass() const {
    if (kinematic || sensor || collider.kind == ColliderKind::halfspace) return 0.0;
    return 1.0 / mass;
}

void RigidBody4::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("body mass must be positive");
    if (!(restitution >= 0.0 && restitution <= 1.0)) throw InvalidArgument("restitution must lie in [0, 1]");
    collider.validate();
}

Vec4 box_world_half_extents(const RigidBody4& body) {
    const Matrix4& r = body.pose.rotation.matrix();
    Vec4 e;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) e[i] += std::abs(r(i, j)) * body.collider.half_extents[j];
    }
    return e;
}

Hyperplane halfspace_world_plane(const RigidBody4& body) {
    const Pose4& local = body.collider.plane.pose;
    return Hyperplane{Pose4{body.pose.to_world(local.translation), body.pose.rotation * local.rotation}};
}

void integrate(std::span<RigidBody4> bodies, Vec4 gravity, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (gravity.w != 0.0) throw InvalidArgument("gravity has no w component in this universe");
    for (auto& b : bodies) {
        if (b.collider.kind == ColliderKind::halfspace && !b.kinematic) {
            // Static geometry; only scripted angular motion applies.
        } else {
            if (!b.kinematic && b.affected_by_gravity) b.linear_velocity += gravity * dt;
            b.pose.translation += b.linear_velocity * dt;
        }
        if (!b.angular_velocity.is_zero()) {
            b.pose.rotation = rotation_from_plane_angles(b.angular_velocity * dt) * b.pose.rotation;
        }
    }
}

namespace {

std::optional<Contact> sphere_sphere(const RigidBody4& a, const RigidBody4& b) {
    const Vec4 d = b.pose.translation - a.pose.translation;
    const double dist = norm(d);
    const double reach = a.collider.radius + b.collider.radius;
    if (dist >= reach) return std::nullopt;
    const Vec4 n = dist > 0.0 ? d / dist : Vec4{0, 1, 0, 0};
    return Contact{a.id, b.id, n, reach - dist, a.pose.translation + n * (a.collider.radius - 0.5 * (reach - dist))};
}

// Contact of a sphere against a halfspace; normal points out of the solid.
std::optional<Contact> halfspace_sphere(const RigidBody4& half, const RigidBody4& sphere) {
    const Hyperplane plane = halfspace_world_plane(half);
    const double d = plane.signed_distance(sphere.pose.translation);
    if (d >= sphere.collider.radius) return std::nullopt;
    const Vec4 n = plane.normal();
    return Contact{half.id, sphere.id, n, sphere.collider.radius - d, sphere.pose.translation - n * d};
}

std::optional<Contact> halfspace_box(const RigidBody4& half, const RigidBody4& box) {
    const Hyperplane plane = halfspace_world_plane(half);
    double deepest = std::numeric_limits<double>::infinity();
    Vec4 point;
    for (unsigned corner = 0; corner < 16; ++corner) {
        Vec4 local;
        for (std::size_t k = 0; k < 4; ++k) {
            local[k] = (corner >> k) & 1U ? box.collider.half_extents[k] : -box.collider.half_extents[k];
        }
        const Vec4 p = box.pose.to_world(local);
        const double d = plane.signed_distance(p);
        if (d < deepest) {
            deepest = d;
            point = p;
        }
    }
    if (deepest >= 0.0) return std::nullopt;
    return Contact{half.id, box.id, plane.normal(), -deepest, point};
}

// Sphere against the world AABB of a box; normal points from box to sphere.
std::optional<Contact> box_sphere(const RigidBody4& box, const RigidBody4& sphere) {
    const Vec4 c = sphere.pose.translation;
    const Vec4 center = box.pose.translation;
    const Vec4 e = box_world_half_extents(box);
    Vec4 q;
    bool inside = true;
    for (std::size_t k = 0; k < 4; ++k) {
        q[k] = std::clamp(c[k], center[k] - e[k], center[k] + e[k]);
        if (q[k] != c[k]) inside = false;
    }
    const double r = sphere.collider.radius;
    if (!inside) {
        const Vec4 d = c - q;
        const double dist = norm(d);
        if (dist >= r) return std::nullopt;
        return Contact{box.id, sphere.id, d / dist, r - dist, q};
    }
    std::size_t axis = 0;
    double best = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double to_max = center[k] + e[k] - c[k];
        const double to_min = c[k] - (center[k] - e[k]);
        if (to_max < best) {
            best = to_max;
            axis = k;
            sign = 1.0;
        }
        if (to_min < best) {
            best = to_min;
            axis = k;
            sign = -1.0;
        }
    }
    Vec4 n;
    n[axis] = sign;
    return Contact{box.id, sphere.id, n, r + best, c};
}

std::optional<Contact> box_box(const RigidBody4& a, const RigidBody4& b) {
    const Vec4 ea = box_world_half_extents(a);
    const Vec4 eb = box_world_half_extents(b);
    const Vec4 d = b.pose.translation - a.pose.translation;
    std::size_t axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 4; ++k) {
        const double overlap = ea[k] + eb[k] - std::abs(d[k]);
        if (overlap <= 0.0) return std::nullopt;
        if (overlap < best) {
            best = overlap;
            axis = k;
        }
    }
    Vec4 n;
    n[axis] = d[axis] < 0.0 ? -1.0 : 1.0;
    return Contact{a.id, b.id, n, best, a.pose.translation + d * 0.5};
}

Contact flipped(Contact c) {
    std::swap(c.body_a, c.body_b);
    c.normal = -c.normal;
    return c;
}

std::optional<Contact> collide(const RigidBody4& a, const RigidBody4& b) {
    const ColliderKind ka = a.collider.kind, kb = b.collider.kind;
    const auto as_pair = [&](std::optional<Contact> c, bool swapped) -> std::optional<Contact> {
        if (!c) return c;
        return swapped ? flipped(*c) : *c;
    };
    using K = ColliderKind;
    if (ka == K::halfspace && kb == K::halfspace) return std::nullopt;
    if (ka == K::hypersphere && kb == K::hypersphere) return sphere_sphere(a, b);
    if (ka == K::halfspace && kb == K::hypersphere) return halfspace_sphere(a, b);
    if (ka == K::hypersphere && kb == K::halfspace) return as_pair(halfspace_sphere(b, a), true);
    if (ka == K::halfspace && kb == K::hyperbox) return halfspace_box(a, b);
    if (ka == K::hyperbox && kb == K::halfspace) return as_pair(halfspace_box(b, a), true);
    if (ka == K::hyperbox && kb == K::hypersphere) return box_sphere(a, b);
    if (ka == K::hypersphere && kb == K::hyperbox) return as_pair(box_sphere(b, a), true);
    return box_box(a, b);
}

} // namespace

std::vector<Contact> detect_collisions(std::span<const RigidBody4> bodies) {
    std::vector<Contact> contacts;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        for (std::size_t j = i + 1; j < bodies.size(); ++j) {
            if (auto c = collide(bodies[i], bodies[j])) contacts.push_back(*c);
        }
    }
    return contacts;
}

void resolve_contact(const Contact& contact, std::span<RigidBody4> bodies) {
    RigidBody4* a = find_body(bodies, contact.body_a);
    RigidBody4* b = find_body(bodies, contact.body_b);
    if (a == nullptr || b == nullptr || a->sensor || b->sensor) return;
    const double inv_a = a->inverse_mass();
    const double inv_b = b->inverse_mass();
    const double inv_sum = inv_a + inv_b;
    if (inv_sum == 0.0) return;

    const Vec4 n = contact.normal;
    const double vn = dot(b->linear_velocity - a->linear_velocity, n);
    if (vn < 0.0) {
        const double e = std::min(a->restitution, b->restitution);
        const double j = -(1.0 + e) * vn / inv_sum;
        a->linear_velocity -= n * (j * inv_a);
        b->linear_velocity += n * (j * inv_b);
    }
    const double correction = kPositionCorrection * contact.depth / inv_sum;
    a->pose.translation -= n * (correction * inv_a);
    b->pose.translation += n * (correction * inv_b);
}

RigidBody4* find_body(std::span<RigidBody4> bodies, BodyId id) {
    auto it = std::find_if(bodies.begin(), bodies.end(), [id](const RigidBody4& b) { return b.id == id; });
    return it == bodies.end() ? nullptr : &*it;
}

const RigidBody4* find_body(std::span<const RigidBody4> bodies, BodyId id) {
    auto it = std::find_if(bodies.begin(), bodies.end(), [id](const RigidBody4& b) { return b.id == id; });
    return it == bodies.end() ? nullptr : &*it;
}

double kinetic_energy(std::span<const RigidBody4> bodies) {
    double e = 0.0;
    for (const auto& b : bodies) {
        if (b.inverse_mass() > 0.0) e += 0.5 * b.mass * dot(b.linear_velocity, b.linear_velocity);
    }
    return e;
}

Vec4 linear_momentum(std::span<const RigidBody4> bodies) {
    Vec4 p;
    for (const auto& b : bodies) {
        if (b.inverse_mass() > 0.0) p += b.linear_velocity * b.mass;
    }
    return p;
}

} // namespace continuum
