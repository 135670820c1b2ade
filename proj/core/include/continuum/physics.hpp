#pragma once

// Simple 4D rigid-body dynamics: semi-implicit Euler, hypersphere / hyperbox
// / halfspace colliders and linear impulse contacts. Angular velocity is
// integrated but never produced by contacts; scripted responses set it.

#include "continuum/math.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace continuum {

using BodyId = std::uint32_t;

inline constexpr Vec4 kDefaultGravity{0.0, -9.81, 0.0, 0.0};
inline constexpr double kFixedTimestep = 1.0 / 120.0;
inline constexpr double kPositionCorrection = 0.8;

enum class ColliderKind { hypersphere, hyperbox, halfspace };

std::string_view to_string(ColliderKind kind);

struct Collider4 {
    ColliderKind kind = ColliderKind::hypersphere;
    double radius = 0.5;
    Vec4 half_extents{0.5, 0.5, 0.5, 0.5};
    // Body-local plane; the solid side is where plane-local w < 0.
    Hyperplane plane{};

    static Collider4 hypersphere(double radius);
    static Collider4 hyperbox(Vec4 half_extents);
    static Collider4 halfspace(const Hyperplane& plane);
    // Halfspace {p : dot(normal, p) < offset}; normal need not be unit.
    static Collider4 halfspace(Vec4 normal, double offset);
    // Throws InvalidArgument for non-positive extents.
    void validate() const;
};

struct RigidBody4 {
    BodyId id = 0;
    Pose4 pose{};
    Vec4 linear_velocity{};
    PlaneAngles angular_velocity{}; // rad/s per plane
    double mass = 1.0;
    Collider4 collider{};
    double restitution = 0.5;
    // Moves only by its own velocity; unaffected by gravity and impulses.
    bool kinematic = false;
    // Reports contacts but is never pushed and never pushes.
    bool sensor = false;
    bool affected_by_gravity = true;

    double inverse_mass() const;
    // Throws InvalidArgument when mass <= 0 or restitution is outside [0, 1].
    void validate() const;
};

struct Contact {
    BodyId body_a = 0;
    BodyId body_b = 0;
    Vec4 normal{};   // unit, from a toward b
    double depth = 0.0;
    Vec4 point{};
};

// World-frame axis-aligned bounds of a box collider.
Vec4 box_world_half_extents(const RigidBody4& body);
Hyperplane halfspace_world_plane(const RigidBody4& body);

// Velocities first, then positions. Angular rates turn the pose by
// rotation_from_plane_angles(rates * dt). Throws InvalidArgument for
// dt <= 0 or a gravity vector with a w component.
void integrate(std::span<RigidBody4> bodies, Vec4 gravity, double dt);

// Contacts for every overlapping pair, ordered by position in `bodies`
// (bodies are kept sorted by id, so this is (id_a, id_b) order).
std::vector<Contact> detect_collisions(std::span<const RigidBody4> bodies);

// Impulse along the normal with the smaller restitution of the pair and
// kPositionCorrection of the depth removed, split by inverse mass.
void resolve_contact(const Contact& contact, std::span<RigidBody4> bodies);

RigidBody4* find_body(std::span<RigidBody4> bodies, BodyId id);
const RigidBody4* find_body(std::span<const RigidBody4> bodies, BodyId id);

double kinetic_energy(std::span<const RigidBody4> bodies);
Vec4 linear_momentum(std::span<const RigidBody4> bodies);

} // namespace continuum
