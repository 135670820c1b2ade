#pragma once

// Hybrid 3D/4D scene model and its JSON document format
// (`{"continuum_scene": 1, ...}`; see docs/scene_format.md).

#include "continuum/geometry.hpp"
#include "continuum/math.hpp"
#include "continuum/mesh.hpp"
#include "continuum/physics.hpp"
#include "continuum/projection.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace continuum {

using NodeId = std::uint32_t;

inline constexpr int kSceneFormatVersion = 1;

enum class GeometryKind { tri3, tetra4 };

struct Material {
    Rgba color{0.8, 0.8, 0.8, 1.0};
    bool wireframe = false;
    friend bool operator==(const Material&, const Material&) = default;
};

// Scale, then rotate, then translate.
struct NodePose {
    Vec4 translation{};
    Rotation4 rotation{};
    Vec4 scale{1, 1, 1, 1};

    Transform4 to_transform() const { return Transform4::trs(translation, rotation, scale); }
    friend bool operator==(const NodePose&, const NodePose&) = default;
};

struct Keyframe {
    double time = 0.0;
    NodePose pose{};
};

// Keyframed rototranslation. Translation and scale are interpolated
// linearly; rotations by an orthonormalized matrix blend.
struct AnimationTrack {
    std::vector<Keyframe> keys; // strictly increasing time
    bool loop = true;

    double duration() const { return keys.empty() ? 0.0 : keys.back().time; }
    NodePose sample(double time) const;
};

// Scripted enemy reactions, evaluated against the player's 4D position.
enum class BehaviorKind { approach, flee_w, attack };

struct Behavior {
    BehaviorKind kind = BehaviorKind::approach;
    double radius = 5.0;   // trigger distance (m, 4D)
    double speed = 1.0;    // m/s for approach / flee_w
    double amount = 2.0;   // flee_w: max w offset (m); attack: energy damage
    double cooldown = 2.0; // attack only (s)
};

struct BodySpec {
    double mass = 1.0;
    Collider4 collider{};
    double restitution = 0.5;
    bool kinematic = false;
    bool sensor = false;
    bool gravity = true;
    Vec4 velocity{};
    PlaneAngles angular_velocity{};
    // Angular rates given to the body when a projectile first hits it.
    std::optional<PlaneAngles> spin_on_hit;
};

struct SceneNode {
    NodeId id = 0;
    std::string name;
    GeometryKind kind = GeometryKind::tri3;
    std::shared_ptr<const TriMesh3> tri3;
    std::shared_ptr<const TetraMesh4> tetra4;
    NodePose pose{};
    Material material{};
    std::optional<BodySpec> body;
    std::optional<AnimationTrack> animation;
    std::set<std::string> tags;
    std::vector<Behavior> behaviors;

    bool has_tag(std::string_view tag) const { return tags.find(std::string(tag)) != tags.end(); }
    bool is_4d() const { return kind == GeometryKind::tetra4; }
    Transform4 transform() const { return pose.to_transform(); }
};

struct EnergyConfig {
    double max = 100.0;
    double initial = 100.0;
    double move_w_cost = 5.0;      // per metre of w travel
    double frustum_cost = 2.0;     // per second in frustum mode
    double manipulation_cost = 10.0;
    double fire_cost = 5.0;
    double blast_cost = 15.0;
    double wireframe_cost = 5.0;
    double crystal_value = 25.0;
};

struct CameraConfig {
    double focal = kDefaultFocal;
    double near_w = kDefaultNearW;
    double focus_distance = 4.0;  // orbit focus ahead of the player (m)
    double orbit_speed = 1.0;     // rad/s while an orbit key is held
    double transition_time = 0.5; // s to rejoin the 3D camera
    double eye_height = 0.6;      // above the player body's center
};

struct RadarConfig {
    double radius = 50.0;
    double altitude_scale = 1.0;
};

struct ProjectileConfig {
    double amplitude = 1.0;        // m
    double omega = 2.0 * 3.14159265358979323846; // rad/s
    double speed = 12.0;           // m/s
    double radius = 0.2;           // m
    double lifetime = 6.0;         // s
    double restitution = 0.6;
    int subdivision = 1;
};

struct PlayerConfig {
    double radius = 0.4;
    double mass = 70.0;
    double move_speed = 4.0;         // m/s
    double w_speed = 1.0;            // m/s
    double mouse_sensitivity = 0.0025; // rad per mouse unit
};

struct WeaponConfig {
    double blast_radius = 8.0;
    double wireframe_radius = 8.0;
};

struct SpawnPoint {
    Vec4 position{0, 1, 0, 0};
    double yaw = 0.0;
    double pitch = 0.0;
};

struct Scene {
    std::string name = "untitled";
    std::vector<SceneNode> nodes; // sorted by id
    Vec4 gravity = kDefaultGravity;
    double w_lo = -5.0;
    double w_hi = 5.0;
    SpawnPoint player_spawn{};
    EnergyConfig energy{};
    CameraConfig camera{};
    RadarConfig radar{};
    ProjectileConfig projectile{};
    PlayerConfig player{};
    WeaponConfig weapons{};

    const SceneNode* find(NodeId id) const;
    SceneNode* find(NodeId id);
};

// Parses and validates a scene document. Relative mesh paths resolve
// against base_dir. Throws ParseError (schema, with a JSON-pointer path) or
// ValidationError (semantic invariants).
Scene load_scene(std::string_view text, const std::filesystem::path& base_dir = {});
Scene load_scene_file(const std::filesystem::path& path);

// Throws ValidationError unless the node is a well-formed native 3D node:
// translation.w = 0, unit w scale, rotation fixing the w axis.
void validate_tri3_pose(const NodePose& pose, const std::string& path);

} // namespace continuum
