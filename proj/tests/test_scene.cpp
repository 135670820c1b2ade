#include "continuum/errors.hpp"
#include "continuum/geometry.hpp"
#include "continuum/scene.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace continuum;

namespace {

const char* kGround = R"({
  "continuum_scene": 1,
  "name": "flat",
  "nodes": [
    {"id": 1, "name": "ground", "geometry": {"kind": "tri3", "quad": [10, 10]}}
  ]
})";

std::string with_node(const std::string& node) {
    return R"({"continuum_scene": 1, "nodes": [)" + node + "]}";
}

template <typename Error>
std::string error_of(const std::string& text) {
    try {
        load_scene(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "no error";
}

} // namespace

TEST(SceneLoad, MinimalGroundPlane) {
    const Scene scene = load_scene(kGround);
    ASSERT_EQ(scene.nodes.size(), 1u);
    EXPECT_EQ(scene.name, "flat");
    EXPECT_EQ(scene.nodes[0].kind, GeometryKind::tri3);
    EXPECT_EQ(scene.nodes[0].tri3->triangles.size(), 2u);
}

TEST(SceneLoad, TesseractAtWOffsetTwo) {
    const Scene scene = load_scene(with_node(
        R"({"id": 7, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
            "transform": {"translation": [0, 0, 0, 2]}})"));
    const SceneNode& node = scene.nodes.at(0);
    ASSERT_TRUE(node.is_4d());
    const WExtent e = mesh_w_extent(*node.tetra4, node.transform());
    EXPECT_NEAR(e.w_min, 1.5, 1e-12);
    EXPECT_NEAR(e.w_max, 2.5, 1e-12);
}

TEST(SceneLoad, DuplicateIdNamesTheId) {
    const std::string text = R"({"continuum_scene": 1, "nodes": [
        {"id": 42, "geometry": {"kind": "tri3", "quad": [1, 1]}},
        {"id": 42, "geometry": {"kind": "tri3", "quad": [2, 2]}}]})";
    EXPECT_THROW(load_scene(text), ParseError);
    EXPECT_NE(error_of<ParseError>(text).find("42"), std::string::npos);
}

TEST(SceneLoad, NodesSortedById) {
    const Scene scene = load_scene(R"({"continuum_scene": 1, "nodes": [
        {"id": 9, "geometry": {"kind": "tri3", "quad": [1, 1]}},
        {"id": 3, "geometry": {"kind": "tri3", "quad": [1, 1]}}]})");
    ASSERT_EQ(scene.nodes.size(), 2u);
    EXPECT_EQ(scene.nodes[0].id, 3u);
    EXPECT_EQ(scene.nodes[1].id, 9u);
    EXPECT_NE(scene.find(9), nullptr);
    EXPECT_EQ(scene.find(4), nullptr);
}

TEST(SceneLoad, UnknownFieldRejectedWithPath) {
    const std::string text = with_node(R"({"id": 1, "colour": [1, 0, 0], "geometry": {"kind": "tri3", "quad": [1, 1]}})");
    try {
        load_scene(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "/nodes/0/colour");
    }
}

TEST(SceneLoad, MissingVersionOrWrongVersion) {
    EXPECT_THROW(load_scene(R"({"nodes": []})"), ParseError);
    EXPECT_THROW(load_scene(R"({"continuum_scene": 2, "nodes": []})"), ParseError);
    EXPECT_THROW(load_scene("not json"), ParseError);
}

TEST(SceneLoad, GeometryNeedsExactlyOneSource) {
    EXPECT_THROW(load_scene(with_node(R"({"id": 1, "geometry": {"kind": "tri3"}})")), ParseError);
    EXPECT_THROW(load_scene(with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1], "box": [1, 1, 1]}})")),
                 ParseError);
}

TEST(SceneLoad, NegativePrimitiveSizeHasPath) {
    try {
        load_scene(with_node(R"({"id": 1, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": -1}})"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(e.path().find("/nodes/0/geometry"), std::string::npos) << e.what();
    }
}

TEST(SceneValidate, Tri3NodeWithWTranslationRejected) {
    const std::string text =
        with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]}, "transform": {"translation": [0, 0, 0, 1]}})");
    EXPECT_THROW(load_scene(text), ValidationError);
}

TEST(SceneValidate, Tri3NodeRotatingIntoWRejected) {
    const std::string text =
        with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]}, "transform": {"rotation": {"xw": 0.3}}})");
    EXPECT_THROW(load_scene(text), ValidationError);
    // A rotation inside the 3D subspace is fine.
    EXPECT_NO_THROW(load_scene(
        with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]}, "transform": {"rotation": {"xz": 0.3}}})")));
}

TEST(SceneValidate, Tri3NodeWithWScaleRejected) {
    const std::string text = with_node(
        R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]}, "transform": {"scale": [1, 1, 1, 2]}})");
    EXPECT_THROW(load_scene(text), ValidationError);
}

TEST(SceneLoad, ScalarScaleOnTri3NodeKeepsUnitW) {
    const Scene s = load_scene(with_node(
        R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]}, "transform": {"scale": 2},
            "animation": {"keyframes": [{"time": 0, "scale": 3}]}})"));
    EXPECT_EQ(s.nodes[0].pose.scale, (Vec4{2, 2, 2, 1}));
    EXPECT_EQ(s.nodes[0].animation->keys[0].pose.scale, (Vec4{3, 3, 3, 1}));
    const Scene t = load_scene(with_node(
        R"({"id": 1, "geometry": {"kind": "tetra4", "primitive": "tesseract"}, "transform": {"scale": 2}})"));
    EXPECT_EQ(t.nodes[0].pose.scale, (Vec4{2, 2, 2, 2}));
}

TEST(SceneValidate, Tri3PoseHelper) {
    NodePose pose;
    EXPECT_NO_THROW(validate_tri3_pose(pose, "/x"));
    pose.translation.w = 0.5;
    EXPECT_THROW(validate_tri3_pose(pose, "/x"), ValidationError);
}

TEST(SceneValidate, GravityWithWComponentRejected) {
    EXPECT_THROW(load_scene(R"({"continuum_scene": 1, "gravity": [0, -9.81, 0, 1], "nodes": []})"), ValidationError);
    const Scene s = load_scene(R"({"continuum_scene": 1, "gravity": [0, -3, 0, 0], "nodes": []})");
    EXPECT_EQ(s.gravity.y, -3.0);
}

TEST(SceneValidate, EmptyWRangeRejected) {
    EXPECT_THROW(load_scene(R"({"continuum_scene": 1, "w_range": [1, 1], "nodes": []})"), ParseError);
    EXPECT_THROW(load_scene(R"({"continuum_scene": 1, "w_range": [2, -2], "nodes": []})"), ParseError);
}

TEST(SceneValidate, SpawnOutsideWRangeRejected) {
    EXPECT_THROW(load_scene(R"({"continuum_scene": 1, "w_range": [0, 1],
                                "player_spawn": {"position": [0, 1, 0, 3]}, "nodes": []})"),
                 ValidationError);
}

TEST(SceneValidate, CrystalWithoutBodyRejected) {
    const std::string text = with_node(
        R"({"id": 1, "tags": ["crystal"], "geometry": {"kind": "tetra4", "primitive": "hexadecachoron", "size": 0.3}})");
    EXPECT_THROW(load_scene(text), ValidationError);
}

TEST(SceneValidate, BadBodyParameters) {
    EXPECT_THROW(load_scene(with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]},
        "body": {"mass": 0, "collider": {"hypersphere": {"radius": 1}}}})")),
                 ParseError);
    EXPECT_THROW(load_scene(with_node(R"({"id": 1, "geometry": {"kind": "tri3", "quad": [1, 1]},
        "body": {"restitution": 1.5, "collider": {"hypersphere": {"radius": 1}}}})")),
                 ParseError);
}

TEST(SceneAnimation, SamplesKeyframesAndLoops) {
    const Scene scene = load_scene(with_node(R"({"id": 1,
        "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
        "animation": {"loop": true, "keyframes": [
            {"time": 0, "translation": [0, 0, 0, 0]},
            {"time": 2, "translation": [4, 0, 0, 2]}]}})"));
    const AnimationTrack& track = *scene.nodes[0].animation;
    EXPECT_NEAR(track.sample(1.0).translation.x, 2.0, 1e-12);
    EXPECT_NEAR(track.sample(1.0).translation.w, 1.0, 1e-12);
    EXPECT_NEAR(track.sample(3.0).translation.x, 2.0, 1e-12);
}

TEST(SceneAnimation, NonIncreasingKeyTimesRejected) {
    EXPECT_THROW(load_scene(with_node(R"({"id": 1,
        "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
        "animation": {"keyframes": [{"time": 1}, {"time": 1}]}})")),
                 ParseError);
}

TEST(SceneFiles, DemoScenesLoad) {
    for (const char* name : {"two_worlds.json", "physics_wall.json", "mini_level.json"}) {
        SCOPED_TRACE(name);
        const Scene scene = load_scene_file(continuum::testing::scenes_dir() / name);
        EXPECT_FALSE(scene.nodes.empty());
        EXPECT_LT(scene.w_lo, scene.w_hi);
        for (const SceneNode& node : scene.nodes) {
            if (node.kind == GeometryKind::tri3) EXPECT_NO_THROW(validate_tri3_pose(node.pose, node.name));
        }
    }
}

TEST(SceneFiles, MissingFileIsParseError) {
    EXPECT_THROW(load_scene_file(continuum::testing::scenes_dir() / "does_not_exist.json"), ParseError);
}

TEST(SceneFiles, ExtrudedNodeHasRequestedDepth) {
    const Scene scene = load_scene_file(continuum::testing::scenes_dir() / "mini_level.json");
    const SceneNode* crate = scene.find(11);
    ASSERT_NE(crate, nullptr);
    EXPECT_TRUE(crate->has_tag("manipulable"));
    const WExtent e = mesh_w_extent(*crate->tetra4, crate->transform());
    EXPECT_NEAR(e.hyper_depth(), 0.5, 1e-12);
}
