#include "continuum/session.hpp"

#include "continuum/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>

namespace continuum {

std::string_view to_string(ActionKind kind) {
    switch (kind) {
    case ActionKind::toggle_projection: return "toggle_projection";
    case ActionKind::fire: return "fire";
    case ActionKind::manipulate: return "manipulate";
    case ActionKind::preview: return "preview";
    case ActionKind::blast: return "blast";
    case ActionKind::wireframe: return "wireframe";
    }
    return "unknown";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) {
    for (ActionKind k : {ActionKind::toggle_projection, ActionKind::fire, ActionKind::manipulate, ActionKind::preview,
                         ActionKind::blast, ActionKind::wireframe}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::collision: return "collision";
    case EventKind::pickup: return "pickup";
    case EventKind::projectile_fired: return "projectile-fired";
    case EventKind::projectile_hit: return "projectile-hit";
    case EventKind::projectile_expired: return "projectile-expired";
    case EventKind::manipulated: return "manipulated";
    case EventKind::blast: return "blast";
    case EventKind::wireframe: return "wireframe";
    case EventKind::mode_changed: return "mode-changed";
    case EventKind::transition_done: return "transition-done";
    case EventKind::energy_depleted: return "energy-depleted";
    case EventKind::insufficient_energy: return "insufficient-energy";
    case EventKind::attack: return "attack";
    case EventKind::invalid_input: return "invalid-input";
    case EventKind::node_appeared: return "node-appeared";
    case EventKind::node_vanished: return "node-vanished";
    }
    return "unknown";
}

const RigidBody4& SessionState::player() const {
    const RigidBody4* p = find_body(std::span<const RigidBody4>(bodies), kPlayerBody);
    if (p == nullptr) throw InvalidState("session has no player body");
    return *p;
}

RigidBody4& SessionState::player() {
    RigidBody4* p = find_body(std::span<RigidBody4>(bodies), kPlayerBody);
    if (p == nullptr) throw InvalidState("session has no player body");
    return *p;
}

Vec4 node_center(const SceneNode& node) {
    if (node.is_4d()) return node.transform().apply(node.tetra4->centroid());
    Vec3 sum;
    for (const Vec3& v : node.tri3->vertices) sum += v;
    if (!node.tri3->vertices.empty()) sum = sum / static_cast<double>(node.tri3->vertices.size());
    return node.transform().apply(make_vec4(sum, 0.0));
}

TriMesh3 render_node(const SceneNode& node, const CameraRig& rig) {
    if (node.is_4d()) return project_node(*node.tetra4, node.transform(), rig);
    return transform_tri3(*node.tri3, node.transform());
}

NodePose manipulated_pose(const SceneNode& node, const Rotation4& rotation) {
    if (rotation == Rotation4::identity()) return node.pose;
    const Vec4 c = node_center(node);
    NodePose out = node.pose;
    out.rotation = rotation * node.pose.rotation;
    out.translation = rotation * (node.pose.translation - c) + c;
    return out;
}

namespace {

constexpr double kEnergyEpsilon = 1e-12;
constexpr double kMaxPitch = 1.45;
constexpr double kProjectileMass = 0.5;
constexpr Rgba kProjectileColor{1.0, 0.55, 0.1, 1.0};

bool node_drives_body(const SceneNode& node) { return node.animation.has_value() || !node.behaviors.empty(); }

bool is_projectile(const SessionState& s, std::uint32_t id) {
    return std::any_of(s.projectiles.begin(), s.projectiles.end(), [id](const Projectile& p) { return p.node == id; });
}

Projectile* find_projectile(SessionState& s, std::uint32_t id) {
    auto it = std::find_if(s.projectiles.begin(), s.projectiles.end(), [id](const Projectile& p) { return p.node == id; });
    return it == s.projectiles.end() ? nullptr : &*it;
}

RigidBody4* body_of(SessionState& s, std::uint32_t id) { return find_body(std::span<RigidBody4>(s.bodies), id); }

bool try_spend(SessionState& s, Frame& f, double cost) {
    if (cost <= 0.0) return true;
    if (s.energy + kEnergyEpsilon < cost) return false;
    const double paid = std::min(s.energy, cost);
    s.energy -= paid;
    f.energy_spent += paid;
    return true;
}

// Takes up to `amount`; returns what was actually taken.
double drain(SessionState& s, Frame& f, double amount) {
    const double paid = std::min(s.energy, amount);
    s.energy -= paid;
    f.energy_spent += paid;
    return paid;
}

double gain(SessionState& s, Frame& f, double amount) {
    const double got = std::max(0.0, std::min(amount, s.scene.energy.max - s.energy));
    s.energy += got;
    f.energy_gained += got;
    return got;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double next_unit(SessionState& s) {
    ++s.rng_draws;
    return static_cast<double>(splitmix64(s.seed ^ splitmix64(s.rng_draws)) >> 11) * 0x1.0p-53;
}

void sync_camera(SessionState& s) {
    const Vec4 p = s.player().pose.translation;
    s.rig.cam3.position = p.xyz() + Vec3{0.0, s.scene.camera.eye_height, 0.0};
    s.rig.cam3.orientation = Matrix3::from_yaw_pitch(s.yaw, s.pitch);
    s.rig.sync_w = p.w;
    if (s.rig.sync == CameraSync::synced) s.rig.resync();
}

void set_node_pose(SessionState& s, SceneNode& node, const NodePose& pose) {
    node.pose = pose;
    if (RigidBody4* b = body_of(s, node.id)) {
        b->pose.translation = pose.translation;
        b->pose.rotation = pose.rotation;
    }
}

// Moves a node by a world offset; animated nodes keep the offset on top of
// their keyframes.
void shift_node(SessionState& s, SceneNode& node, Vec4 delta) {
    if (node.animation) s.behavior_offset[node.id] += delta;
    NodePose pose = node.pose;
    pose.translation += delta;
    set_node_pose(s, node, pose);
}

void remove_node(SessionState& s, NodeId id) {
    std::erase_if(s.scene.nodes, [id](const SceneNode& n) { return n.id == id; });
    std::erase_if(s.bodies, [id](const RigidBody4& b) { return b.id == id; });
    std::erase_if(s.projectiles, [id](const Projectile& p) { return p.node == id; });
    std::erase_if(s.touching, [id](const auto& pair) { return pair.first == id || pair.second == id; });
    s.mesh_cache.erase(id);
    s.attack_ready_at.erase(id);
    s.behavior_offset.erase(id);
}

void fire_in_place(SessionState& s, ProjectileKind kind) {
    const ProjectileConfig& cfg = s.scene.projectile;
    const double amplitude = kind == ProjectileKind::sinusoidal ? cfg.amplitude : 0.0;
    const Vec3 dir = s.rig.cam3.orientation.column(2);
    const Vec3 origin = s.rig.cam3.position + dir * (s.scene.player.radius + cfg.radius + 0.1);
    const double w0 = s.player_w();

    SceneNode node;
    node.id = s.next_node_id++;
    node.name = "projectile-" + std::to_string(node.id);
    node.kind = GeometryKind::tetra4;
    node.tetra4 = std::make_shared<const TetraMesh4>(make_primitive(PrimitiveKind::hypersphere, cfg.radius, cfg.subdivision));
    node.pose.translation = make_vec4(origin, w0);
    node.material.color = kProjectileColor;
    node.tags.insert("projectile");

    RigidBody4 body;
    body.id = node.id;
    body.pose.translation = node.pose.translation;
    body.linear_velocity = make_vec4(dir * cfg.speed, 0.0);
    body.mass = kProjectileMass;
    body.collider = Collider4::hypersphere(cfg.radius);
    body.restitution = cfg.restitution;
    body.affected_by_gravity = false;

    s.scene.nodes.push_back(std::move(node));
    s.bodies.push_back(body);
    s.projectiles.push_back(Projectile{body.id, w0, amplitude, cfg.omega, s.time, true});
}

SceneNode& manipulable_node(SessionState& s, NodeId id) {
    SceneNode* node = s.scene.find(id);
    if (node == nullptr) throw InvalidArgument("unknown node " + std::to_string(id));
    if (!node->is_4d() || !node->has_tag("manipulable")) {
        throw InvalidArgument("node " + std::to_string(id) + " is not manipulable");
    }
    if (node_drives_body(*node)) throw InvalidArgument("node " + std::to_string(id) + " is script-driven");
    return *node;
}

void manipulate_in_place(SessionState& s, Frame& f, NodeId id, const PlaneAngles& angles) {
    SceneNode& node = manipulable_node(s, id);
    const Rotation4 r = rotation_from_plane_angles(angles);
    if (!try_spend(s, f, s.scene.energy.manipulation_cost)) {
        throw InvalidState("not enough energy to manipulate");
    }
    set_node_pose(s, node, manipulated_pose(node, r));
}

void begin_exit_transition(SessionState& s, double dt) {
    const long ticks = std::lround(s.scene.camera.transition_time / dt);
    s.transition_ticks_left = static_cast<int>(std::max(1L, ticks));
}

void handle_action(SessionState& s, Frame& f, const Action& action, double dt) {
    const auto insufficient = [&](std::string what) {
        f.events.push_back({EventKind::insufficient_energy, 0, 0, s.energy, std::move(what)});
    };
    switch (action.kind) {
    case ActionKind::toggle_projection: {
        if (s.transition_ticks_left) {
            f.events.push_back({EventKind::invalid_input, 0, 0, 0.0, "camera transition in progress"});
            return;
        }
        if (s.rig.cam4.mode == ProjectionMode::cross_section) {
            if (s.energy <= 0.0) {
                insufficient("frustum");
                return;
            }
            s.rig.resync();
            s.rig.sync = CameraSync::detached;
            s.rig.cam4.mode = ProjectionMode::frustum;
            OrbitState orbit;
            orbit.view_dir = s.rig.cam4.pose.rotation.column(2);
            orbit.radius = s.scene.camera.focus_distance;
            orbit.focus = s.rig.cam4.pose.translation + orbit.view_dir * orbit.radius;
            orbit.base_rotation = s.rig.cam4.pose.rotation;
            s.rig.orbit = orbit;
            f.events.push_back({EventKind::mode_changed, 0, 0, 0.0, "frustum"});
        } else {
            begin_exit_transition(s, dt);
            f.events.push_back({EventKind::mode_changed, 0, 0, 0.0, "cross_section"});
        }
        return;
    }
    case ActionKind::fire:
        if (!try_spend(s, f, s.scene.energy.fire_cost)) {
            insufficient("fire");
            return;
        }
        fire_in_place(s, action.projectile);
        f.events.push_back({EventKind::projectile_fired, s.projectiles.back().node, 0, 0.0, {}});
        return;
    case ActionKind::manipulate:
        try {
            manipulate_in_place(s, f, action.node, action.rotation);
            f.events.push_back({EventKind::manipulated, action.node, 0, 0.0, {}});
        } catch (const InvalidState&) {
            insufficient("manipulate");
        } catch (const InvalidArgument& e) {
            f.events.push_back({EventKind::invalid_input, action.node, 0, 0.0, e.what()});
        }
        return;
    case ActionKind::preview:
        try {
            f.previews.push_back({action.node, ghost_previews(s, action.node, action.candidates)});
        } catch (const InvalidArgument& e) {
            f.events.push_back({EventKind::invalid_input, action.node, 0, 0.0, e.what()});
        }
        return;
    case ActionKind::blast: {
        if (!try_spend(s, f, s.scene.energy.blast_cost)) {
            insufficient("blast");
            return;
        }
        const Vec4 p = s.player().pose.translation;
        int moved = 0;
        for (SceneNode& node : s.scene.nodes) {
            if (!node.is_4d() || node.has_tag("projectile")) continue;
            const Vec4 c = node_center(node);
            if (norm(c.xyz() - p.xyz()) > s.scene.weapons.blast_radius) continue;
            const double dw = p.w - mesh_w_extent(*node.tetra4, node.transform()).center();
            shift_node(s, node, {0, 0, 0, dw});
            ++moved;
        }
        f.events.push_back({EventKind::blast, 0, 0, static_cast<double>(moved), {}});
        return;
    }
    case ActionKind::wireframe: {
        if (!try_spend(s, f, s.scene.energy.wireframe_cost)) {
            insufficient("wireframe");
            return;
        }
        const Vec3 p = s.player().pose.translation.xyz();
        int toggled = 0;
        for (SceneNode& node : s.scene.nodes) {
            if (!node.is_4d() || node.has_tag("projectile")) continue;
            if (norm(node_center(node).xyz() - p) > s.scene.weapons.wireframe_radius) continue;
            node.material.wireframe = !node.material.wireframe;
            ++toggled;
        }
        f.events.push_back({EventKind::wireframe, 0, 0, static_cast<double>(toggled), {}});
        return;
    }
    }
}

struct HeldKeys {
    bool w = false, a = false, s = false, d = false, q = false, e = false, z = false, x = false;
};

HeldKeys read_keys(const InputFrame& input, Frame& f) {
    HeldKeys k;
    for (const std::string& raw : input.keys) {
        std::string key = raw;
        for (char& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (key == "W") k.w = true;
        else if (key == "A") k.a = true;
        else if (key == "S") k.s = true;
        else if (key == "D") k.d = true;
        else if (key == "Q") k.q = true;
        else if (key == "E") k.e = true;
        else if (key == "Z") k.z = true;
        else if (key == "X") k.x = true;
        else f.events.push_back({EventKind::invalid_input, 0, 0, 0.0, "unknown key '" + raw + "'"});
    }
    return k;
}

void apply_behaviors(SessionState& s, Frame& f, SceneNode& node, double h, double t_next) {
    const Vec4 player = s.player().pose.translation;
    for (const Behavior& b : node.behaviors) {
        const Vec4 c = node_center(node);
        const double dist = norm(player - c);
        if (dist > b.radius) continue;
        switch (b.kind) {
        case BehaviorKind::approach: {
            Vec3 d = player.xyz() - c.xyz();
            const double n = norm(d);
            if (n <= 1e-9) break;
            const double step = std::min(b.speed * h, n);
            shift_node(s, node, make_vec4(d / n * step, 0.0));
            break;
        }
        case BehaviorKind::flee_w: {
            Vec4& offset = s.behavior_offset[node.id];
            double dir = c.w - player.w;
            if (dir == 0.0) dir = next_unit(s) < 0.5 ? -1.0 : 1.0;
            dir = dir > 0.0 ? 1.0 : -1.0;
            const double target = std::clamp(offset.w + dir * b.speed * h, -b.amount, b.amount);
            const double dw = target - offset.w;
            if (dw == 0.0) break;
            offset.w = target;
            NodePose pose = node.pose;
            pose.translation.w += dw;
            set_node_pose(s, node, pose);
            break;
        }
        case BehaviorKind::attack: {
            auto it = s.attack_ready_at.find(node.id);
            if (it != s.attack_ready_at.end() && t_next < it->second) break;
            const double taken = drain(s, f, b.amount);
            s.attack_ready_at[node.id] = t_next + b.cooldown;
            f.events.push_back({EventKind::attack, node.id, kPlayerBody, taken, {}});
            break;
        }
        }
    }
}

std::string pair_detail(const RigidBody4& a, const RigidBody4& b) {
    return std::string(to_string(a.collider.kind)) + "-" + std::string(to_string(b.collider.kind));
}

void substep(SessionState& s, Frame& f, double h) {
    const double t_next = s.time + h;

    // Scripted nodes compute their pose for the end of the step and drive
    // their bodies kinematically.
    for (SceneNode& node : s.scene.nodes) {
        if (!node_drives_body(node)) continue;
        if (node.animation) {
            NodePose pose = node.animation->sample(t_next);
            auto off = s.behavior_offset.find(node.id);
            if (off != s.behavior_offset.end()) pose.translation += off->second;
            node.pose = pose;
        }
        apply_behaviors(s, f, node, h, t_next);
        if (RigidBody4* b = body_of(s, node.id)) {
            b->linear_velocity = (node.pose.translation - b->pose.translation) / h;
        }
    }

    const double player_w = s.player_w();
    integrate(s.bodies, s.scene.gravity, h);

    for (SceneNode& node : s.scene.nodes) {
        if (!node_drives_body(node)) continue;
        if (RigidBody4* b = body_of(s, node.id)) {
            b->pose.translation = node.pose.translation;
            b->pose.rotation = node.pose.rotation;
        }
    }
    for (const Projectile& p : s.projectiles) {
        if (!p.oscillating) continue;
        if (RigidBody4* b = body_of(s, p.node)) {
            b->pose.translation.w = p.w0 + p.amplitude * std::sin(p.omega * (t_next - p.t0));
            b->linear_velocity.w = 0.0;
        }
    }
    s.player().pose.translation.w = player_w;
    s.player().linear_velocity.w = 0.0;

    std::vector<Contact> contacts = detect_collisions(s.bodies);
    std::erase_if(contacts, [&](const Contact& c) {
        return (c.body_a == kPlayerBody && is_projectile(s, c.body_b)) ||
               (c.body_b == kPlayerBody && is_projectile(s, c.body_a));
    });

    std::set<std::pair<BodyId, BodyId>> touching;
    std::vector<NodeId> collected;
    for (const Contact& c : contacts) {
        const auto key = std::make_pair(c.body_a, c.body_b);
        touching.insert(key);
        RigidBody4* a = body_of(s, c.body_a);
        RigidBody4* b = body_of(s, c.body_b);
        if (s.touching.find(key) == s.touching.end()) {
            f.events.push_back({EventKind::collision, c.body_a, c.body_b, c.depth, pair_detail(*a, *b)});
        }
        for (int side = 0; side < 2; ++side) {
            const BodyId self = side == 0 ? c.body_a : c.body_b;
            const BodyId other = side == 0 ? c.body_b : c.body_a;
            RigidBody4* other_body = side == 0 ? b : a;
            Projectile* p = find_projectile(s, self);
            if (p != nullptr && p->oscillating && !other_body->sensor) {
                p->oscillating = false;
                body_of(s, self)->affected_by_gravity = true;
                const SceneNode* target = s.scene.find(other);
                if (target != nullptr && target->body && target->body->spin_on_hit) {
                    other_body->angular_velocity = *target->body->spin_on_hit;
                }
                f.events.push_back({EventKind::projectile_hit, self, other, c.depth,
                                    side == 0 ? pair_detail(*a, *b) : pair_detail(*b, *a)});
            }
            if (self == kPlayerBody) {
                const SceneNode* crystal = s.scene.find(other);
                if (crystal != nullptr && crystal->has_tag("crystal") &&
                    std::find(collected.begin(), collected.end(), other) == collected.end()) {
                    collected.push_back(other);
                }
            }
        }
    }
    for (const Contact& c : contacts) resolve_contact(c, s.bodies);

    RigidBody4& player = s.player();
    player.pose.translation.w = std::clamp(player_w, s.scene.w_lo, s.scene.w_hi);
    player.linear_velocity.w = 0.0;

    for (SceneNode& node : s.scene.nodes) {
        if (node_drives_body(node)) continue;
        if (const RigidBody4* b = body_of(s, node.id)) {
            node.pose.translation = b->pose.translation;
            node.pose.rotation = b->pose.rotation;
        }
    }
    for (NodeId id : collected) {
        const double got = gain(s, f, s.scene.energy.crystal_value);
        f.events.push_back({EventKind::pickup, kPlayerBody, id, got, {}});
        remove_node(s, id);
        std::erase_if(touching, [id](const auto& pair) { return pair.first == id || pair.second == id; });
    }
    s.touching = std::move(touching);
    s.time = t_next;
}

std::vector<double> camera_key(const CameraRig& rig) {
    std::vector<double> key;
    if (rig.sync == CameraSync::synced && rig.cam4.mode == ProjectionMode::cross_section &&
        rig.cam4.pose.rotation.fixes_w_axis()) {
        key.push_back(0.0);
        key.push_back(rig.cam4.pose.translation.w);
        return key;
    }
    key.push_back(rig.cam4.mode == ProjectionMode::frustum ? 1.0 : 2.0);
    key.push_back(rig.sync == CameraSync::synced ? 1.0 : 0.0);
    key.push_back(rig.cam4.focal);
    key.push_back(rig.cam4.near_w);
    for (std::size_t i = 0; i < 4; ++i) key.push_back(rig.cam4.pose.translation[i]);
    key.insert(key.end(), rig.cam4.pose.rotation.matrix().m.begin(), rig.cam4.pose.rotation.matrix().m.end());
    if (rig.sync == CameraSync::synced) {
        for (std::size_t i = 0; i < 3; ++i) key.push_back(rig.cam3.position[i]);
        key.insert(key.end(), rig.cam3.orientation.m.begin(), rig.cam3.orientation.m.end());
    }
    return key;
}

void build_frame(SessionState& s, Frame& f) {
    const std::vector<double> cam_key = camera_key(s.rig);
    for (const SceneNode& node : s.scene.nodes) {
        std::vector<double> key;
        const auto h = node.transform().homogeneous();
        key.assign(h.begin(), h.end());
        if (node.is_4d()) key.insert(key.end(), cam_key.begin(), cam_key.end());

        auto it = s.mesh_cache.find(node.id);
        FrameMesh fm;
        fm.node_id = node.id;
        fm.is_4d = node.is_4d();
        fm.material = node.material;
        if (it != s.mesh_cache.end() && it->second.key == key) {
            fm.mesh = it->second.mesh;
            fm.changed = false;
            f.meshes.push_back(std::move(fm));
            continue;
        }
        auto mesh = std::make_shared<const TriMesh3>(render_node(node, s.rig));
        if (mesh->empty()) {
            if (it != s.mesh_cache.end()) {
                f.events.push_back({EventKind::node_vanished, node.id, 0, 0.0, {}});
                s.mesh_cache.erase(it);
            }
            continue;
        }
        if (it == s.mesh_cache.end()) {
            if (node.is_4d()) f.events.push_back({EventKind::node_appeared, node.id, 0, 0.0, {}});
            fm.changed = true;
            s.mesh_cache[node.id] = MeshCacheEntry{std::move(key), mesh};
            fm.mesh = mesh;
        } else if (*it->second.mesh == *mesh) {
            fm.changed = false;
            it->second.key = std::move(key);
            fm.mesh = it->second.mesh;
        } else {
            fm.changed = true;
            it->second = MeshCacheEntry{std::move(key), mesh};
            fm.mesh = mesh;
        }
        f.meshes.push_back(std::move(fm));
    }

    f.radar = radar_pins(s);
    f.camera.mode = s.rig.cam4.mode;
    f.camera.sync = s.rig.sync;
    f.camera.cam4 = s.rig.cam4.pose;
    f.camera.cam3 = s.rig.cam3;
    f.camera.player_w = s.player_w();
    f.camera.transitioning = s.transition_ticks_left.has_value();
    f.camera.orbit = s.rig.orbit;
    f.tick = s.tick;
    f.time = s.time;
    f.energy = s.energy;
}

} // namespace

SessionState start_session(Scene scene, std::uint64_t seed) {
    SessionState s;
    s.seed = seed;
    s.energy = scene.energy.initial;
    s.yaw = scene.player_spawn.yaw;
    s.pitch = std::clamp(scene.player_spawn.pitch, -kMaxPitch, kMaxPitch);

    RigidBody4 player;
    player.id = kPlayerBody;
    player.pose.translation = scene.player_spawn.position;
    player.mass = scene.player.mass;
    player.collider = Collider4::hypersphere(scene.player.radius);
    player.restitution = 0.0;
    s.bodies.push_back(player);

    NodeId max_id = 0;
    for (const SceneNode& node : scene.nodes) {
        max_id = std::max(max_id, node.id);
        if (!node.body) continue;
        const BodySpec& spec = *node.body;
        RigidBody4 b;
        b.id = node.id;
        b.pose.translation = node.pose.translation;
        b.pose.rotation = node.pose.rotation;
        b.linear_velocity = spec.velocity;
        b.angular_velocity = spec.angular_velocity;
        b.mass = spec.mass;
        b.collider = spec.collider;
        b.restitution = spec.restitution;
        b.kinematic = spec.kinematic || node_drives_body(node);
        b.sensor = spec.sensor;
        b.affected_by_gravity = spec.gravity;
        try {
            b.validate();
        } catch (const InvalidArgument& e) {
            throw ValidationError("/nodes/" + std::to_string(node.id) + "/body", e.what());
        }
        s.bodies.push_back(b);
    }
    std::sort(s.bodies.begin(), s.bodies.end(), [](const RigidBody4& a, const RigidBody4& b) { return a.id < b.id; });
    s.next_node_id = max_id + 1;

    s.rig.cam4.focal = scene.camera.focal;
    s.rig.cam4.near_w = scene.camera.near_w;
    try {
        s.rig.cam4.validate();
    } catch (const InvalidArgument& e) {
        throw ValidationError("/camera", e.what());
    }
    s.scene = std::move(scene);
    sync_camera(s);
    return s;
}

Frame advance(SessionState& s, const InputFrame& input, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    const double steps_real = dt / kFixedTimestep;
    const long steps = std::lround(steps_real);
    if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9) {
        throw InvalidArgument("dt must be a multiple of the fixed timestep");
    }

    Frame f;
    const HeldKeys keys = read_keys(input, f);

    if (std::isfinite(input.mouse_dx) && std::isfinite(input.mouse_dy)) {
        s.yaw += input.mouse_dx * s.scene.player.mouse_sensitivity;
        s.pitch = std::clamp(s.pitch - input.mouse_dy * s.scene.player.mouse_sensitivity, -kMaxPitch, kMaxPitch);
    } else {
        f.events.push_back({EventKind::invalid_input, 0, 0, 0.0, "non-finite mouse delta"});
    }
    sync_camera(s);

    for (const Action& action : input.actions) handle_action(s, f, action, dt);

    // w travel is kinematic and paid per metre.
    const int w_dir = (keys.e ? 1 : 0) - (keys.q ? 1 : 0);
    if (w_dir != 0) {
        RigidBody4& p = s.player();
        const double from = p.pose.translation.w;
        const double to = std::clamp(from + w_dir * s.scene.player.w_speed * dt, s.scene.w_lo, s.scene.w_hi);
        const double cost = s.scene.energy.move_w_cost * std::abs(to - from);
        if (to != from) {
            if (try_spend(s, f, cost)) {
                p.pose.translation.w = to;
            } else {
                f.events.push_back({EventKind::insufficient_energy, 0, 0, s.energy, "move_w"});
            }
        }
    }

    const int orbit_dir = (keys.x ? 1 : 0) - (keys.z ? 1 : 0);
    if (orbit_dir != 0 && s.rig.sync == CameraSync::detached && s.rig.orbit && !s.transition_ticks_left) {
        s.rig = orbit_update(s.rig, orbit_dir * s.scene.camera.orbit_speed * dt);
    }

    {
        const Matrix3 heading = Matrix3::from_yaw_pitch(s.yaw, 0.0);
        const Vec3 fwd = heading.column(2);
        const Vec3 right = heading.column(0);
        Vec3 move = fwd * ((keys.w ? 1.0 : 0.0) - (keys.s ? 1.0 : 0.0)) +
                    right * ((keys.d ? 1.0 : 0.0) - (keys.a ? 1.0 : 0.0));
        const double n = norm(move);
        if (n > 0.0) move = move / n * s.scene.player.move_speed;
        RigidBody4& p = s.player();
        p.linear_velocity.x = move.x;
        p.linear_velocity.z = move.z;
    }

    for (long i = 0; i < steps; ++i) substep(s, f, kFixedTimestep);

    std::vector<NodeId> expired;
    for (const Projectile& p : s.projectiles) {
        if (s.time - p.t0 >= s.scene.projectile.lifetime) expired.push_back(p.node);
    }
    for (NodeId id : expired) {
        remove_node(s, id);
        f.events.push_back({EventKind::projectile_expired, id, 0, 0.0, {}});
    }

    sync_camera(s);

    if (s.rig.cam4.mode == ProjectionMode::frustum && !s.transition_ticks_left) {
        const double cost = s.scene.energy.frustum_cost * dt;
        if (s.energy + kEnergyEpsilon >= cost) {
            drain(s, f, cost);
        } else {
            drain(s, f, cost);
            begin_exit_transition(s, dt);
            f.events.push_back({EventKind::energy_depleted, 0, 0, 0.0, "frustum"});
        }
    }
    if (s.transition_ticks_left) {
        const int left = *s.transition_ticks_left;
        s.rig = transition_step(s.rig, 1.0 / static_cast<double>(left));
        if (left <= 1) {
            s.transition_ticks_left.reset();
            f.events.push_back({EventKind::transition_done, 0, 0, 0.0, {}});
        } else {
            s.transition_ticks_left = left - 1;
        }
    }

    ++s.tick;
    build_frame(s, f);
    return f;
}

std::pair<SessionState, Frame> tick(SessionState state, const InputFrame& input, double dt) {
    Frame f = advance(state, input, dt);
    return {std::move(state), std::move(f)};
}

SessionState fire_projectile(SessionState state, ProjectileKind kind) {
    Frame scratch;
    if (!try_spend(state, scratch, state.scene.energy.fire_cost)) throw InvalidState("not enough energy to fire");
    fire_in_place(state, kind);
    return state;
}

std::vector<TriMesh3> ghost_previews(const SessionState& state, NodeId id, std::span<const PlaneAngles> candidates) {
    const SceneNode* node = state.scene.find(id);
    if (node == nullptr) throw InvalidArgument("unknown node " + std::to_string(id));
    if (!node->is_4d() || !node->has_tag("manipulable")) {
        throw InvalidArgument("node " + std::to_string(id) + " is not manipulable");
    }
    std::vector<TriMesh3> out;
    out.reserve(candidates.size());
    for (const PlaneAngles& c : candidates) {
        SceneNode ghost = *node;
        ghost.pose = manipulated_pose(*node, rotation_from_plane_angles(c));
        out.push_back(render_node(ghost, state.rig));
    }
    return out;
}

SessionState apply_manipulation(SessionState state, NodeId node, const PlaneAngles& rotation) {
    Frame scratch;
    manipulate_in_place(state, scratch, node, rotation);
    return state;
}

std::vector<RadarPin> radar_pins(const SessionState& state) {
    std::vector<RadarPin> pins;
    const Vec4 p = state.player().pose.translation;
    for (const SceneNode& node : state.scene.nodes) {
        if (!node.is_4d()) continue;
        const Vec4 c = node_center(node);
        const double dx = c.x - p.x, dz = c.z - p.z;
        if (std::hypot(dx, dz) > state.scene.radar.radius) continue;
        const double w_center = mesh_w_extent(*node.tetra4, node.transform()).center();
        pins.push_back({node.id, dx, dz, state.scene.radar.altitude_scale * (w_center - p.w)});
    }
    return pins;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    void add(double v) { bytes(std::bit_cast<std::uint64_t>(v)); }
    void add(std::uint64_t v) { bytes(v); }
    void add(bool v) { bytes(v ? 1 : 0); }
    void add(Vec4 v) {
        for (std::size_t i = 0; i < 4; ++i) add(v[i]);
    }
    void add(Vec3 v) {
        for (std::size_t i = 0; i < 3; ++i) add(v[i]);
    }
    void add(const Rotation4& r) {
        for (double x : r.matrix().m) add(x);
    }
    void add(const PlaneAngles& a) {
        for (double x : {a.xy, a.xz, a.yz, a.xw, a.yw, a.zw}) add(x);
    }
};

} // namespace

std::uint64_t state_hash(const SessionState& s) {
    Fnv1a h;
    h.add(s.tick);
    h.add(s.time);
    h.add(s.energy);
    h.add(s.yaw);
    h.add(s.pitch);
    h.add(s.seed);
    h.add(s.rng_draws);
    h.add(static_cast<std::uint64_t>(s.next_node_id));
    h.add(static_cast<std::uint64_t>(s.transition_ticks_left.value_or(-1)));
    for (const RigidBody4& b : s.bodies) {
        h.add(static_cast<std::uint64_t>(b.id));
        h.add(b.pose.translation);
        h.add(b.pose.rotation);
        h.add(b.linear_velocity);
        h.add(b.angular_velocity);
        h.add(b.affected_by_gravity);
    }
    for (const SceneNode& n : s.scene.nodes) {
        h.add(static_cast<std::uint64_t>(n.id));
        h.add(n.pose.translation);
        h.add(n.pose.rotation);
        h.add(n.pose.scale);
        h.add(n.material.wireframe);
    }
    for (const Projectile& p : s.projectiles) {
        h.add(static_cast<std::uint64_t>(p.node));
        h.add(p.w0);
        h.add(p.t0);
        h.add(p.oscillating);
    }
    h.add(static_cast<std::uint64_t>(s.rig.cam4.mode));
    h.add(static_cast<std::uint64_t>(s.rig.sync));
    h.add(s.rig.cam4.pose.translation);
    h.add(s.rig.cam4.pose.rotation);
    h.add(s.rig.cam3.position);
    for (double x : s.rig.cam3.orientation.m) h.add(x);
    h.add(s.rig.sync_w);
    if (s.rig.orbit) {
        h.add(s.rig.orbit->focus);
        h.add(s.rig.orbit->radius);
        h.add(s.rig.orbit->angle);
    }
    for (const auto& [a, b] : s.touching) {
        h.add(static_cast<std::uint64_t>(a));
        h.add(static_cast<std::uint64_t>(b));
    }
    for (const auto& [id, t] : s.attack_ready_at) {
        h.add(static_cast<std::uint64_t>(id));
        h.add(t);
    }
    for (const auto& [id, off] : s.behavior_offset) {
        h.add(static_cast<std::uint64_t>(id));
        h.add(off);
    }
    return h.h;
}

} // namespace continuum
