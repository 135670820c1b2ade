#pragma once

// Game session: player, energy, projectiles, hyper-manipulation and the
// fixed-step tick that turns (state, inputs) into the next state and a Frame.

#include "continuum/physics.hpp"
#include "continuum/projection.hpp"
#include "continuum/scene.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace continuum {

inline constexpr BodyId kPlayerBody = 0;

// Sinusoidal bullets oscillate along w until their first contact; straight
// ones stay at the firing w.
enum class ProjectileKind { sinusoidal, straight };

enum class ActionKind { toggle_projection, fire, manipulate, preview, blast, wireframe };

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view name);

struct Action {
    ActionKind kind = ActionKind::fire;
    NodeId node = 0;                     // manipulate / preview target
    PlaneAngles rotation{};              // manipulate
    std::vector<PlaneAngles> candidates; // preview
    ProjectileKind projectile = ProjectileKind::sinusoidal; // fire
};

// Held keys: W A S D move in 3D, Q / E move along -w / +w, Z / X orbit the
// detached 4D camera. Mouse deltas turn the view.
struct InputFrame {
    std::uint64_t tick = 0;
    std::vector<std::string> keys;
    double mouse_dx = 0.0;
    double mouse_dy = 0.0;
    std::vector<Action> actions;
};

enum class EventKind {
    collision,
    pickup,
    projectile_fired,
    projectile_hit,
    projectile_expired,
    manipulated,
    blast,
    wireframe,
    mode_changed,
    transition_done,
    energy_depleted,
    insufficient_energy,
    attack,
    invalid_input,
    node_appeared,
    node_vanished,
};

std::string_view to_string(EventKind kind);

struct Event {
    EventKind kind = EventKind::collision;
    std::uint32_t a = 0; // node or body id (the player is body 0)
    std::uint32_t b = 0;
    double amount = 0.0;
    std::string detail;
};

struct Projectile {
    NodeId node = 0;
    double w0 = 0.0;
    double amplitude = 1.0;
    double omega = 0.0;
    double t0 = 0.0;
    bool oscillating = true; // until the first contact
};

struct RadarPin {
    NodeId node_id = 0;
    double x = 0.0;        // planar offset from the player
    double z = 0.0;
    double altitude = 0.0; // altitude_scale * (w_node_center - w_player)
};

struct FrameMesh {
    NodeId node_id = 0;
    bool is_4d = false;
    std::shared_ptr<const TriMesh3> mesh;
    Material material{};
    bool changed = true; // differs from the last frame that carried this node
};

struct CameraSummary {
    ProjectionMode mode = ProjectionMode::cross_section;
    CameraSync sync = CameraSync::synced;
    Pose4 cam4{};
    Pose3 cam3{};
    double player_w = 0.0;
    bool transitioning = false;
    std::optional<OrbitState> orbit;
};

struct GhostSet {
    NodeId node_id = 0;
    std::vector<TriMesh3> ghosts;
};

struct Frame {
    std::uint64_t tick = 0;
    double time = 0.0;
    double energy = 0.0;
    double energy_gained = 0.0;
    double energy_spent = 0.0;
    std::vector<FrameMesh> meshes;
    std::vector<RadarPin> radar;
    CameraSummary camera{};
    std::vector<Event> events;
    std::vector<GhostSet> previews;
};

// Last projection sent for a node, keyed by everything it depends on.
struct MeshCacheEntry {
    std::vector<double> key;
    std::shared_ptr<const TriMesh3> mesh;
};

struct SessionState {
    Scene scene;                      // live nodes; poses evolve
    std::vector<RigidBody4> bodies;   // sorted by id; player is kPlayerBody
    CameraRig rig{};
    double yaw = 0.0;
    double pitch = 0.0;
    double energy = 0.0;
    double time = 0.0;
    std::uint64_t tick = 0;
    std::uint64_t seed = 0;
    std::uint64_t rng_draws = 0;
    std::vector<Projectile> projectiles;
    NodeId next_node_id = 1;
    std::optional<int> transition_ticks_left;
    std::set<std::pair<BodyId, BodyId>> touching;
    std::map<NodeId, double> attack_ready_at;
    std::map<NodeId, Vec4> behavior_offset;
    // Derived data, excluded from state_hash.
    std::map<NodeId, MeshCacheEntry> mesh_cache;

    const RigidBody4& player() const;
    RigidBody4& player();
    double player_w() const { return player().pose.translation.w; }
};

// Throws ValidationError when the scene cannot host a session (e.g. the
// camera configuration is inconsistent).
SessionState start_session(Scene scene, std::uint64_t seed = 0);

// Advances by dt (a positive multiple of kFixedTimestep) in place. Invalid
// inputs are ignored and reported as events.
Frame advance(SessionState& state, const InputFrame& input, double dt = kFixedTimestep);

// Value form of advance.
std::pair<SessionState, Frame> tick(SessionState state, const InputFrame& input, double dt = kFixedTimestep);

// Spawns a hypersphere bullet from the eye along the view with
// w(t) = w0 + A sin(omega (t - t_fire)). Throws InvalidState when energy is
// insufficient.
SessionState fire_projectile(SessionState state, ProjectileKind kind = ProjectileKind::sinusoidal);

// Pose after rotating the node rigidly about its world-space centroid.
NodePose manipulated_pose(const SceneNode& node, const Rotation4& rotation);

// Projections of the node as it would look after each candidate rotation,
// for the current camera. Does not modify the state. Throws InvalidArgument
// for an unknown or non-manipulable node.
std::vector<TriMesh3> ghost_previews(const SessionState& state, NodeId node, std::span<const PlaneAngles> candidates);

// Throws InvalidArgument unless the node is a manipulable, non-animated 4D
// node, and InvalidState when energy is insufficient.
SessionState apply_manipulation(SessionState state, NodeId node, const PlaneAngles& rotation);

// Pins for 4D nodes within the radar radius, ordered by node id.
std::vector<RadarPin> radar_pins(const SessionState& state);

// FNV-1a over the bit patterns of the simulation state.
std::uint64_t state_hash(const SessionState& state);

// World-space mesh of one node for the current rig.
TriMesh3 render_node(const SceneNode& node, const CameraRig& rig);

// World-space centroid of a node's mesh vertices.
Vec4 node_center(const SceneNode& node);

} // namespace continuum
