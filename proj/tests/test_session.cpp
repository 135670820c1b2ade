#include "continuum/errors.hpp"
#include "continuum/geometry.hpp"
#include "continuum/protocol.hpp"
#include "continuum/session.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

using namespace continuum;
namespace ct = continuum::testing;

namespace {

Scene scene_from(const std::string& nodes, const std::string& extra = {}) {
    return load_scene(R"({"continuum_scene": 1, "w_range": [-3, 3], )" + extra + R"("nodes": [)" + nodes + "]}");
}

const std::string kNoGravity = R"("gravity": [0, 0, 0, 0], "player_spawn": {"position": [0, 1, 0, 0]}, )";

std::size_t count_events(const Frame& f, EventKind kind) {
    return static_cast<std::size_t>(
        std::count_if(f.events.begin(), f.events.end(), [kind](const Event& e) { return e.kind == kind; }));
}

const FrameMesh* mesh_for(const Frame& f, NodeId id) {
    for (const FrameMesh& m : f.meshes) {
        if (m.node_id == id) return &m;
    }
    return nullptr;
}

InputFrame keys(std::initializer_list<const char*> held) {
    InputFrame in;
    for (const char* k : held) in.keys.emplace_back(k);
    return in;
}

InputFrame with_action(Action action) {
    InputFrame in;
    in.actions.push_back(std::move(action));
    return in;
}

const std::string kTesseractAtOrigin =
    R"({"id": 5, "name": "box", "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
        "transform": {"translation": [0, 1, 4, 0]}, "tags": ["manipulable"]})";

} // namespace

TEST(SessionTick, StaticSceneReusesEveryMesh) {
    Scene scene = scene_from(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [10, 10]},
                                 "body": {"collider": {"halfspace": {"normal": [0, 1, 0, 0]}}, "kinematic": true}},)" +
                             kTesseractAtOrigin);
    SessionState s = start_session(std::move(scene));
    const Frame first = advance(s, {});
    ASSERT_EQ(first.meshes.size(), 2u);
    for (const FrameMesh& m : first.meshes) EXPECT_TRUE(m.changed);
    for (int i = 0; i < 5; ++i) {
        const Frame f = advance(s, {});
        ASSERT_EQ(f.meshes.size(), 2u);
        for (const FrameMesh& m : f.meshes) EXPECT_FALSE(m.changed) << "node " << m.node_id;
    }
}

TEST(SessionTick, WMoveWithoutEnergyIsRefused) {
    SessionState s = start_session(scene_from("", kNoGravity + R"("energy": {"initial": 0}, )"));
    const Frame f = advance(s, keys({"E"}));
    EXPECT_EQ(s.player_w(), 0.0);
    EXPECT_EQ(count_events(f, EventKind::insufficient_energy), 1u);
}

TEST(SessionTick, WMoveSpendsEnergy) {
    SessionState s = start_session(scene_from("", kNoGravity));
    const double before = s.energy;
    const Frame f = advance(s, keys({"E"}));
    const double moved = s.player_w();
    EXPECT_NEAR(moved, s.scene.player.w_speed * kFixedTimestep, 1e-12);
    EXPECT_NEAR(before - s.energy, s.scene.energy.move_w_cost * moved, 1e-12);
    EXPECT_NEAR(f.energy_spent, before - s.energy, 1e-12);
}

TEST(SessionTick, PlayerWStaysInRange) {
    SessionState s = start_session(scene_from("", kNoGravity));
    for (int i = 0; i < 400; ++i) advance(s, keys({"E"}));
    EXPECT_LE(s.player_w(), s.scene.w_hi);
    EXPECT_GE(s.player_w(), s.scene.w_lo);
}

TEST(SessionTick, CrystalPickup) {
    Scene scene = scene_from(R"({"id": 9, "name": "crystal", "tags": ["crystal"],
        "geometry": {"kind": "tetra4", "primitive": "hexadecachoron", "size": 0.3},
        "transform": {"translation": [0, 1, 0.3, 0]},
        "body": {"collider": {"hypersphere": {"radius": 0.3}}, "sensor": true, "kinematic": true, "gravity": false}})",
                             kNoGravity + R"("energy": {"initial": 40}, )");
    SessionState s = start_session(std::move(scene));
    const double value = s.scene.energy.crystal_value;
    const Frame f = advance(s, {});
    EXPECT_EQ(count_events(f, EventKind::pickup), 1u);
    EXPECT_NEAR(s.energy, 40.0 + value, 1e-12);
    EXPECT_EQ(s.scene.find(9), nullptr);
    EXPECT_EQ(mesh_for(f, 9), nullptr);
}

TEST(SessionTick, UnknownKeyAndBadMouseReported) {
    SessionState s = start_session(scene_from("", kNoGravity));
    InputFrame in = keys({"P"});
    in.mouse_dx = std::nan("");
    const Frame f = advance(s, in);
    EXPECT_EQ(count_events(f, EventKind::invalid_input), 2u);
    EXPECT_EQ(s.yaw, 0.0);
}

TEST(SessionTick, InvalidTimestepRejected) {
    SessionState s = start_session(scene_from("", kNoGravity));
    EXPECT_THROW(advance(s, {}, 0.0), InvalidArgument);
    EXPECT_THROW(advance(s, {}, -kFixedTimestep), InvalidArgument);
    EXPECT_THROW(advance(s, {}, 0.013), InvalidArgument);
    EXPECT_NO_THROW(advance(s, {}, 3 * kFixedTimestep));
    EXPECT_NEAR(s.time, 3 * kFixedTimestep, 1e-15);
}

TEST(SessionTick, ValueFormMatchesInPlace) {
    const Scene scene = load_scene_file(ct::scenes_dir() / "mini_level.json");
    SessionState a = start_session(scene, 3);
    const SessionState b0 = a;
    advance(a, keys({"W", "E"}));
    const auto [b, f] = tick(b0, keys({"W", "E"}));
    EXPECT_EQ(state_hash(a), state_hash(b));
    EXPECT_EQ(state_hash(b0), state_hash(start_session(scene, 3)));
}

TEST(SessionProjectile, FiredAtPlayerWAndVisible) {
    SessionState s = fire_projectile(start_session(scene_from("", kNoGravity)));
    ASSERT_EQ(s.projectiles.size(), 1u);
    const SceneNode* bullet = s.scene.find(s.projectiles[0].node);
    ASSERT_NE(bullet, nullptr);
    EXPECT_EQ(bullet->pose.translation.w, s.player_w());
    EXPECT_FALSE(render_node(*bullet, s.rig).empty());
}

TEST(SessionProjectile, PeakOffsetLeavesTheSlice) {
    SessionState s = fire_projectile(start_session(scene_from("", kNoGravity)));
    const ProjectileConfig cfg = s.scene.projectile;
    const NodeId id = s.projectiles[0].node;
    // Quarter period: 15 ticks of 1/60 s for omega = 2 pi.
    const int ticks = static_cast<int>(std::lround(M_PI / (2 * cfg.omega) / kTickDt));
    Frame f;
    for (int i = 0; i < ticks; ++i) f = advance(s, {}, kTickDt);
    const SceneNode* bullet = s.scene.find(id);
    ASSERT_NE(bullet, nullptr);
    EXPECT_NEAR(bullet->pose.translation.w, cfg.amplitude, 1e-9);
    EXPECT_TRUE(render_node(*bullet, s.rig).empty());
    EXPECT_EQ(mesh_for(f, id), nullptr);
    // The radar keeps tracking it.
    const auto pin = std::find_if(f.radar.begin(), f.radar.end(), [id](const RadarPin& p) { return p.node_id == id; });
    ASSERT_NE(pin, f.radar.end());
    EXPECT_NEAR(pin->altitude, cfg.amplitude, 1e-9);
}

TEST(SessionProjectile, HitsTargetWaitingAtThePeak) {
    // Where the bullet is at the quarter period, computed from the firing
    // geometry rather than read back from the session.
    const SessionState probe = start_session(scene_from("", kNoGravity));
    const ProjectileConfig& cfg = probe.scene.projectile;
    const double t_peak = M_PI / (2 * cfg.omega);
    const Vec3 eye = probe.rig.cam3.position;
    const Vec3 peak = eye + Vec3{0, 0, 1} * (probe.scene.player.radius + cfg.radius + 0.1 + cfg.speed * t_peak);
    const double target_radius = 0.3;

    const auto target_json = [&](double w) {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      R"({"id": 8, "geometry": {"kind": "tetra4", "primitive": "hypersphere", "size": 0.3},
                          "transform": {"translation": [%.17g, %.17g, %.17g, %.17g]},
                          "body": {"collider": {"hypersphere": {"radius": %.17g}}, "kinematic": true, "gravity": false}})",
                      peak.x, peak.y, peak.z, w, target_radius);
        return std::string(buf);
    };
    const auto hit_by_peak = [&](double w) {
        SessionState s = start_session(scene_from(target_json(w), kNoGravity));
        advance(s, with_action(Action{ActionKind::fire}), kFixedTimestep);
        for (double t = kFixedTimestep; t < t_peak + 1e-9; t += kFixedTimestep) {
            const Frame f = advance(s, {}, kFixedTimestep);
            for (const Event& e : f.events) {
                if (e.kind == EventKind::projectile_hit && e.b == 8) return true;
            }
        }
        return false;
    };
    // Oracle: at the peak the bullet sits at (peak, w0 + A); distance to the
    // target is |w - A| in w only.
    const double reach = cfg.radius + target_radius;
    ASSERT_LT(std::abs(cfg.amplitude - cfg.amplitude), reach);
    EXPECT_TRUE(hit_by_peak(cfg.amplitude));
    ASSERT_GT(std::abs(-cfg.amplitude - cfg.amplitude), reach);
    EXPECT_FALSE(hit_by_peak(-cfg.amplitude));
}

TEST(SessionProjectile, InsufficientEnergy) {
    SessionState s = start_session(scene_from("", kNoGravity + R"("energy": {"initial": 1}, )"));
    EXPECT_THROW(fire_projectile(s), InvalidState);
    const Frame f = advance(s, with_action(Action{ActionKind::fire}));
    EXPECT_EQ(count_events(f, EventKind::insufficient_energy), 1u);
    EXPECT_TRUE(s.projectiles.empty());
}

TEST(SessionProjectile, ExpiresAfterLifetime) {
    SessionState s = start_session(scene_from("", kNoGravity));
    advance(s, with_action(Action{ActionKind::fire}), kTickDt);
    std::size_t expired = 0;
    for (int i = 0; i < 400 && !s.projectiles.empty(); ++i) expired += count_events(advance(s, {}, kTickDt), EventKind::projectile_expired);
    EXPECT_EQ(expired, 1u);
    EXPECT_NEAR(s.time, s.scene.projectile.lifetime, kTickDt + 1e-9);
}

TEST(SessionGhost, IdentityCandidateMatchesCurrentProjection) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    const PlaneAngles none{};
    const auto ghosts = ghost_previews(s, 5, std::span<const PlaneAngles>(&none, 1));
    ASSERT_EQ(ghosts.size(), 1u);
    EXPECT_EQ(ghosts[0], render_node(*s.scene.find(5), s.rig));
    EXPECT_FALSE(ghosts[0].empty());
}

TEST(SessionGhost, CandidateLeavingTheSliceIsEmpty) {
    // A thin slab centred at w = 0.3 misses the slice once rotated a quarter
    // turn in xw: its 0.4 m w-extent becomes 0.1 m centred at 0.3.
    SessionState s = start_session(scene_from(
        R"({"id": 5, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
            "transform": {"translation": [0, 1, 4, 0.3], "scale": [0.1, 1, 1, 1]}, "tags": ["manipulable"]})",
        kNoGravity));
    EXPECT_FALSE(render_node(*s.scene.find(5), s.rig).empty());
    PlaneAngles quarter;
    quarter.xw = M_PI / 2;
    const auto ghosts = ghost_previews(s, 5, std::span<const PlaneAngles>(&quarter, 1));
    EXPECT_TRUE(ghosts.at(0).empty());
}

TEST(SessionGhost, PreviewsDoNotTouchState) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    advance(s, {});
    const std::uint64_t before = state_hash(s);
    std::vector<PlaneAngles> candidates(3);
    candidates[1].xw = 0.5;
    candidates[2].yw = 1.0;
    EXPECT_EQ(ghost_previews(s, 5, candidates).size(), 3u);
    EXPECT_EQ(state_hash(s), before);
}

TEST(SessionGhost, UnknownOrPlainNodeRejected) {
    SessionState s = start_session(scene_from(
        R"({"id": 6, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}})", kNoGravity));
    const PlaneAngles none{};
    EXPECT_THROW(ghost_previews(s, 99, std::span<const PlaneAngles>(&none, 1)), InvalidArgument);
    EXPECT_THROW(ghost_previews(s, 6, std::span<const PlaneAngles>(&none, 1)), InvalidArgument);
}

TEST(SessionGhost, PreviewActionFillsFrame) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    Action a{ActionKind::preview};
    a.node = 5;
    a.candidates.resize(2);
    const Frame f = advance(s, with_action(a));
    ASSERT_EQ(f.previews.size(), 1u);
    EXPECT_EQ(f.previews[0].ghosts.size(), 2u);
}

TEST(SessionManipulation, HalfTurnTwiceRestoresTransform) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    const Transform4 start = s.scene.find(5)->transform();
    PlaneAngles half;
    half.xw = M_PI;
    s = apply_manipulation(apply_manipulation(s, 5, half), 5, half);
    EXPECT_LT(ct::max_abs(s.scene.find(5)->transform().homogeneous(), start.homogeneous()), 1e-9);
}

TEST(SessionManipulation, RotatedSlabChangesTriangleCount) {
    SessionState s = start_session(scene_from(
        R"({"id": 5, "geometry": {"kind": "tetra4", "extrude": {"box": [1, 1, 1]}, "depth": 0.5},
            "transform": {"translation": [0, 1, 4, -0.25]}, "tags": ["manipulable"]})",
        kNoGravity));
    const SceneNode& node = *s.scene.find(5);
    const WExtent e = mesh_w_extent(*node.tetra4, node.transform());
    ASSERT_LT(e.w_min, 0.0);
    ASSERT_GT(e.w_max, 0.0);
    const TriMesh3 before = render_node(node, s.rig);
    PlaneAngles r;
    r.xw = 0.6;
    r.yw = 0.4;
    r.zw = 0.3;
    s = apply_manipulation(s, 5, r);
    const TriMesh3 after = render_node(*s.scene.find(5), s.rig);
    EXPECT_EQ(before.triangles.size(), 12u);
    EXPECT_FALSE(after.empty());
    EXPECT_NE(after.triangles.size(), before.triangles.size());
}

TEST(SessionManipulation, ZeroRotationOnlySpendsEnergy) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    const NodePose pose = s.scene.find(5)->pose;
    const double energy = s.energy;
    Action a{ActionKind::manipulate};
    a.node = 5;
    SessionState reference = s;
    advance(reference, {});
    const Frame f = advance(s, with_action(a));
    EXPECT_EQ(s.scene.find(5)->pose, pose);
    EXPECT_EQ(count_events(f, EventKind::manipulated), 1u);
    EXPECT_NEAR(energy - s.energy, s.scene.energy.manipulation_cost, 1e-12);
    reference.energy = s.energy;
    EXPECT_EQ(state_hash(reference), state_hash(s));
}

TEST(SessionManipulation, RejectedCases) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity + R"("energy": {"initial": 0}, )"));
    EXPECT_THROW(apply_manipulation(s, 5, {}), InvalidState);
    EXPECT_THROW(apply_manipulation(s, 77, {}), InvalidArgument);
    const Scene level = load_scene_file(ct::scenes_dir() / "mini_level.json");
    const SessionState m = start_session(level);
    EXPECT_THROW(apply_manipulation(m, 12, {}), InvalidArgument); // animated
    EXPECT_THROW(apply_manipulation(m, 1, {}), InvalidArgument);  // 3D
}

TEST(SessionRadar, AltitudeFollowsWOffset) {
    SessionState s = start_session(scene_from(
        R"({"id": 2, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [3, 1, 0, 0]}},
           {"id": 3, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [0, 1, 5, 2]}},
           {"id": 4, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [0, 1, -5, -1.5]}},
           {"id": 6, "geometry": {"kind": "tri3", "quad": [2, 2]}},
           {"id": 7, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [80, 1, 0, 0]}})",
        kNoGravity));
    const auto pins = radar_pins(s);
    ASSERT_EQ(pins.size(), 3u);
    EXPECT_EQ(pins[0].node_id, 2u);
    EXPECT_NEAR(pins[0].altitude, 0.0, 1e-12);
    EXPECT_NEAR(pins[0].x, 3.0, 1e-12);
    EXPECT_NEAR(pins[1].altitude, 2.0, 1e-12);
    EXPECT_NEAR(pins[1].z, 5.0, 1e-12);
    EXPECT_NEAR(pins[2].altitude, -1.5, 1e-12);
    for (const RadarPin& p : pins) EXPECT_NE(p.node_id, 6u);
}

TEST(SessionRadar, AltitudeScale) {
    SessionState s = start_session(scene_from(
        R"({"id": 3, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [0, 1, 5, 2]}})",
        kNoGravity + R"("radar": {"altitude_scale": 0.5}, )"));
    EXPECT_NEAR(radar_pins(s).at(0).altitude, 1.0, 1e-12);
}

TEST(SessionMode, ToggleEntersFrustumAndTransitionsBack) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    Frame f = advance(s, with_action(Action{ActionKind::toggle_projection}), kTickDt);
    EXPECT_EQ(count_events(f, EventKind::mode_changed), 1u);
    EXPECT_EQ(f.camera.mode, ProjectionMode::frustum);
    EXPECT_EQ(f.camera.sync, CameraSync::detached);
    EXPECT_NEAR(f.energy_spent, s.scene.energy.frustum_cost * kTickDt, 1e-12);

    f = advance(s, with_action(Action{ActionKind::toggle_projection}), kTickDt);
    EXPECT_TRUE(f.camera.transitioning);
    const int expected = static_cast<int>(std::lround(s.scene.camera.transition_time / kTickDt));
    int ticks = 1;
    while (count_events(f, EventKind::transition_done) == 0 && ticks < 1000) {
        f = advance(s, {}, kTickDt);
        ++ticks;
    }
    EXPECT_EQ(ticks, expected);
    EXPECT_EQ(f.camera.mode, ProjectionMode::cross_section);
    EXPECT_EQ(f.camera.sync, CameraSync::synced);
    EXPECT_FALSE(f.camera.transitioning);
}

TEST(SessionMode, FrustumNeedsEnergy) {
    SessionState s = start_session(scene_from("", kNoGravity + R"("energy": {"initial": 0}, )"));
    const Frame f = advance(s, with_action(Action{ActionKind::toggle_projection}));
    EXPECT_EQ(count_events(f, EventKind::insufficient_energy), 1u);
    EXPECT_EQ(s.rig.cam4.mode, ProjectionMode::cross_section);
}

TEST(SessionMode, DepletionForcesExit) {
    SessionState s = start_session(scene_from("", kNoGravity + R"("energy": {"initial": 0.05}, )"));
    advance(s, with_action(Action{ActionKind::toggle_projection}), kTickDt);
    bool depleted = false;
    for (int i = 0; i < 200 && !depleted; ++i) depleted = count_events(advance(s, {}, kTickDt), EventKind::energy_depleted) > 0;
    EXPECT_TRUE(depleted);
    EXPECT_GE(s.energy, 0.0);
    for (int i = 0; i < 100; ++i) advance(s, {}, kTickDt);
    EXPECT_EQ(s.rig.cam4.mode, ProjectionMode::cross_section);
}

TEST(SessionWeapons, BlastSnapsNearbyNodesToPlayerW) {
    SessionState s = start_session(scene_from(
        R"({"id": 3, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [0, 1, 3, 2]}},
           {"id": 4, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1}, "transform": {"translation": [0, 1, 30, 2]}})",
        kNoGravity));
    const Frame f = advance(s, with_action(Action{ActionKind::blast}));
    EXPECT_EQ(count_events(f, EventKind::blast), 1u);
    EXPECT_NEAR(s.scene.find(3)->pose.translation.w, s.player_w(), 1e-12);
    EXPECT_EQ(s.scene.find(4)->pose.translation.w, 2.0);
    EXPECT_NE(mesh_for(f, 3), nullptr);
}

TEST(SessionWeapons, WireframeTogglesMaterial) {
    SessionState s = start_session(scene_from(kTesseractAtOrigin, kNoGravity));
    const Frame f = advance(s, with_action(Action{ActionKind::wireframe}));
    EXPECT_TRUE(s.scene.find(5)->material.wireframe);
    ASSERT_NE(mesh_for(f, 5), nullptr);
    EXPECT_TRUE(mesh_for(f, 5)->material.wireframe);
}

TEST(SessionBehavior, AttackDrainsEnergyWithCooldown) {
    SessionState s = start_session(scene_from(
        R"({"id": 3, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 0.5},
            "transform": {"translation": [0, 1, 2, 0]},
            "behaviors": [{"kind": "attack", "radius": 5, "amount": 3, "cooldown": 1}]})",
        kNoGravity));
    std::size_t attacks = 0;
    for (int i = 0; i < 90; ++i) attacks += count_events(advance(s, {}, kTickDt), EventKind::attack);
    EXPECT_EQ(attacks, 2u); // t = 0 and t = 1 within 1.5 s
    EXPECT_NEAR(s.energy, s.scene.energy.initial - 6.0, 1e-9);
}

TEST(SessionBehavior, FleeMovesAwayAlongW) {
    SessionState s = start_session(scene_from(
        R"({"id": 3, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 0.5},
            "transform": {"translation": [0, 1, 2, 0.1]},
            "behaviors": [{"kind": "flee_w", "radius": 5, "speed": 1, "amount": 1.5}]})",
        kNoGravity));
    for (int i = 0; i < 240; ++i) advance(s, {}, kTickDt);
    EXPECT_NEAR(s.scene.find(3)->pose.translation.w, 1.6, 1e-9);
}

TEST(SessionProperty, HideAndRevealMatchesWExtent) {
    SessionState s = start_session(scene_from(
        R"({"id": 2, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
            "transform": {"translation": [0, 1, 4, 0.4], "scale": [2, 1, 1, 1.2]}})",
        kNoGravity));
    const SceneNode& node = *s.scene.find(2);
    const WExtent e = mesh_w_extent(*node.tetra4, node.transform());
    bool was_visible = false;
    for (int i = 0; i <= 240; ++i) {
        const double w = -1.5 + i * 0.0125;
        if (std::abs(w - e.w_min) < 1e-6 || std::abs(w - e.w_max) < 1e-6) continue;
        s.player().pose.translation.w = w;
        const Frame f = advance(s, {});
        const bool inside = w > e.w_min && w < e.w_max;
        EXPECT_EQ(mesh_for(f, 2) != nullptr, inside) << "w = " << w;
        if (inside != was_visible) {
            EXPECT_EQ(count_events(f, inside ? EventKind::node_appeared : EventKind::node_vanished), 1u) << "w = " << w;
        }
        was_visible = inside;
    }
}

namespace {

std::vector<InputFrame> demo_inputs() {
    return load_input_log(ct::scenes_dir() / "mini_level.inputs.jsonl");
}

} // namespace

TEST(SessionProperty, ReplayIsDeterministic) {
    const Scene scene = load_scene_file(ct::scenes_dir() / "mini_level.json");
    const auto inputs = demo_inputs();
    std::uint64_t hashes[2];
    for (std::uint64_t& h : hashes) {
        SessionState s = start_session(scene, 11);
        for (std::size_t i = 0; i < 1500; ++i) advance(s, inputs[i], kTickDt);
        h = state_hash(s);
    }
    EXPECT_EQ(hashes[0], hashes[1]);
    SessionState other = start_session(scene, 12);
    EXPECT_NE(state_hash(other), state_hash(start_session(scene, 11)));
}

TEST(SessionProperty, EnergyLedgerAndCacheCorrectness) {
    const Scene scene = load_scene_file(ct::scenes_dir() / "mini_level.json");
    const auto inputs = demo_inputs();
    SessionState s = start_session(scene);
    std::size_t reused = 0;
    for (std::size_t i = 0; i < 3000; ++i) {
        const double before = s.energy;
        const Frame f = advance(s, inputs[i], kTickDt);
        ASSERT_GE(s.energy, 0.0);
        ASSERT_LE(s.energy, s.scene.energy.max + 1e-12);
        ASSERT_NEAR(s.energy - before, f.energy_gained - f.energy_spent, 1e-9) << "tick " << f.tick;
        ASSERT_GE(f.energy_spent, 0.0);
        double pickups = 0.0;
        for (const Event& e : f.events) {
            if (e.kind == EventKind::pickup) pickups += e.amount;
        }
        ASSERT_NEAR(f.energy_gained, pickups, 1e-12);
        if (i % 7 != 0) continue;
        for (const FrameMesh& m : f.meshes) {
            ASSERT_FALSE(m.mesh->empty());
            if (m.changed) continue;
            ++reused;
            ASSERT_EQ(*m.mesh, render_node(*s.scene.find(m.node_id), s.rig)) << "node " << m.node_id << " tick " << f.tick;
        }
    }
    EXPECT_GT(reused, 0u);
}

TEST(SessionProperty, CollisionEventsOnlyOnNewContact) {
    Scene scene = scene_from(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [10, 10]},
        "body": {"collider": {"halfspace": {"normal": [0, 1, 0, 0]}}, "kinematic": true}})");
    SessionState s = start_session(std::move(scene));
    std::size_t collisions = 0;
    for (int i = 0; i < 240; ++i) collisions += count_events(advance(s, {}, kTickDt), EventKind::collision);
    EXPECT_EQ(collisions, 1u);
    EXPECT_NEAR(s.player().pose.translation.y, s.scene.player.radius, 0.01);
}
