#include "continuum/scene.hpp"

#include "continuum/errors.hpp"
#include "continuum/mesh_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace continuum {

using nlohmann::json;

NodePose AnimationTrack::sample(double time) const {
    if (keys.empty()) return {};
    if (keys.size() == 1 || time <= keys.front().time) return keys.front().pose;
    double t = time;
    const double span = keys.back().time - keys.front().time;
    if (loop && span > 0.0) {
        t = keys.front().time + std::fmod(time - keys.front().time, span);
    } else if (t >= keys.back().time) {
        return keys.back().pose;
    }
    auto hi = std::upper_bound(keys.begin(), keys.end(), t, [](double v, const Keyframe& k) { return v < k.time; });
    if (hi == keys.end()) return keys.back().pose;
    const Keyframe& b = *hi;
    const Keyframe& a = *(hi - 1);
    const double u = (t - a.time) / (b.time - a.time);
    if (u <= 0.0) return a.pose;

    NodePose out;
    out.translation = lerp(a.pose.translation, b.pose.translation, u);
    out.scale = lerp(a.pose.scale, b.pose.scale, u);
    if (a.pose.rotation == b.pose.rotation) {
        out.rotation = a.pose.rotation;
    } else {
        Matrix4 blend;
        const Matrix4& ma = a.pose.rotation.matrix();
        const Matrix4& mb = b.pose.rotation.matrix();
        for (std::size_t i = 0; i < 16; ++i) blend.m[i] = ma.m[i] + (mb.m[i] - ma.m[i]) * u;
        out.rotation = Rotation4::orthonormalized(blend);
    }
    return out;
}

const SceneNode* Scene::find(NodeId id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const SceneNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

SceneNode* Scene::find(NodeId id) {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const SceneNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

void validate_tri3_pose(const NodePose& pose, const std::string& path) {
    if (pose.translation.w != 0.0) throw ValidationError(path + "/translation", "3D nodes must sit at w = 0");
    if (pose.scale.w != 1.0) throw ValidationError(path + "/scale", "3D nodes must have unit w scale");
    if (!pose.rotation.fixes_w_axis(1e-12)) {
        throw ValidationError(path + "/rotation", "3D nodes may not rotate in the xw, yw or zw planes");
    }
}

namespace {

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ParseError(child(path, it.key()), "unknown field");
        }
    }
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ParseError(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path, "expected a string");
    return j.get<std::string>();
}

std::uint32_t as_index(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0 || j.get<std::int64_t>() > 0xffffffffLL) {
        throw ParseError(path, "expected a non-negative integer");
    }
    return static_cast<std::uint32_t>(j.get<std::int64_t>());
}

template <std::size_t N>
std::array<double, N> as_array(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != N) throw ParseError(path, "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = as_number(j[i], child(path, i));
    return out;
}

Vec3 as_vec3(const json& j, const std::string& path) {
    const auto a = as_array<3>(j, path);
    return {a[0], a[1], a[2]};
}

Vec4 as_vec4(const json& j, const std::string& path) {
    const auto a = as_array<4>(j, path);
    return {a[0], a[1], a[2], a[3]};
}

PlaneAngles as_angles(const json& j, const std::string& path) {
    check_keys(j, path, {"xy", "xz", "yz", "xw", "yw", "zw"});
    PlaneAngles a;
    const auto get = [&](const char* key, double& out) {
        if (j.contains(key)) out = as_number(j[key], child(path, key));
    };
    get("xy", a.xy);
    get("xz", a.xz);
    get("yz", a.yz);
    get("xw", a.xw);
    get("yw", a.yw);
    get("zw", a.zw);
    return a;
}

Rgba as_color(const json& j, const std::string& path) {
    if (!j.is_array() || (j.size() != 3 && j.size() != 4)) throw ParseError(path, "expected [r, g, b] or [r, g, b, a]");
    Rgba c;
    c.r = as_number(j[0], child(path, std::size_t{0}));
    c.g = as_number(j[1], child(path, 1));
    c.b = as_number(j[2], child(path, 2));
    if (j.size() == 4) c.a = as_number(j[3], child(path, 3));
    for (double v : {c.r, c.g, c.b, c.a}) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(path, "color components must lie in [0, 1]");
    }
    return c;
}

// Optional field helper: invokes fn(value, path) when the key is present.
template <class Fn>
void opt(const json& obj, const std::string& path, std::string_view key, Fn&& fn) {
    const std::string k(key);
    if (obj.contains(k)) fn(obj[k], child(path, key));
}

const json& required(const json& obj, const std::string& path, std::string_view key) {
    const std::string k(key);
    if (!obj.contains(k)) throw ParseError(child(path, key), "missing required field");
    return obj[k];
}

void positive(double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be positive");
}

void non_negative(double v, const std::string& path) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be non-negative");
}

// A scalar scale on a 3D node leaves w alone.
NodePose parse_pose(const json& j, const std::string& path, bool planar = false) {
    check_keys(j, path, {"translation", "rotation", "scale"});
    NodePose pose;
    opt(j, path, "translation", [&](const json& v, const std::string& p) { pose.translation = as_vec4(v, p); });
    opt(j, path, "rotation", [&](const json& v, const std::string& p) {
        pose.rotation = Rotation4::from_plane_angles(as_angles(v, p));
    });
    opt(j, path, "scale", [&](const json& v, const std::string& p) {
        if (v.is_number()) {
            const double s = as_number(v, p);
            pose.scale = {s, s, s, planar ? 1.0 : s};
        } else {
            pose.scale = as_vec4(v, p);
        }
        for (std::size_t i = 0; i < 4; ++i) positive(pose.scale[i], p);
    });
    return pose;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
    const std::filesystem::path p(file);
    return p.is_absolute() || base.empty() ? p : base / p;
}

// Wraps mesh-construction failures so they carry the document path.
template <class Fn>
auto build_mesh(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ValidationError(path, e.what());
    } catch (const InvalidArgument& e) {
        throw ValidationError(path, e.what());
    } catch (const std::ios_base::failure& e) {
        throw ValidationError(path, e.what());
    }
}

std::vector<Rgba> parse_colors(const json& j, const std::string& path, std::size_t expected) {
    if (!j.is_array() || j.size() != expected) {
        throw ValidationError(path, "expected one color per vertex");
    }
    std::vector<Rgba> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_color(j[i], child(path, i)));
    return out;
}

TriMesh3 parse_tri3_payload(const json& j, const std::string& path, const std::filesystem::path& base,
                            std::initializer_list<std::string_view> extra_keys) {
    std::vector<std::string_view> allowed{"kind", "box", "quad", "inline", "file"};
    allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ParseError(child(path, it.key()), "unknown field");
        }
    }
    int sources = 0;
    for (const char* k : {"box", "quad", "inline", "file"}) sources += j.contains(k) ? 1 : 0;
    if (sources != 1) throw ParseError(path, "exactly one of box, quad, inline or file is required");

    if (j.contains("box")) {
        const Vec3 size = as_vec3(j["box"], child(path, "box"));
        for (std::size_t i = 0; i < 3; ++i) positive(size[i], child(path, "box"));
        return make_box_surface(size);
    }
    if (j.contains("quad")) {
        const auto size = as_array<2>(j["quad"], child(path, "quad"));
        positive(size[0], child(path, "quad"));
        positive(size[1], child(path, "quad"));
        return make_ground_quad(size[0], size[1]);
    }
    if (j.contains("file")) {
        const std::string p = child(path, "file");
        const auto file = resolve(base, as_string(j["file"], p));
        return build_mesh(p, [&] {
            TriMesh3 m = load_obj(file);
            m.validate();
            return m;
        });
    }
    const std::string p = child(path, "inline");
    const json& in = j["inline"];
    check_keys(in, p, {"vertices", "triangles", "colors"});
    const json& verts = required(in, p, "vertices");
    const json& tris = required(in, p, "triangles");
    if (!verts.is_array()) throw ParseError(child(p, "vertices"), "expected an array");
    if (!tris.is_array()) throw ParseError(child(p, "triangles"), "expected an array");
    TriMesh3 m;
    for (std::size_t i = 0; i < verts.size(); ++i) m.vertices.push_back(as_vec3(verts[i], child(child(p, "vertices"), i)));
    for (std::size_t i = 0; i < tris.size(); ++i) {
        const std::string tp = child(child(p, "triangles"), i);
        if (!tris[i].is_array() || tris[i].size() != 3) throw ParseError(tp, "expected three indices");
        m.triangles.push_back({as_index(tris[i][0], tp), as_index(tris[i][1], tp), as_index(tris[i][2], tp)});
    }
    opt(in, p, "colors", [&](const json& v, const std::string& cp) { m.colors = parse_colors(v, cp, m.vertices.size()); });
    build_mesh(p, [&] {
        m.validate();
        return 0;
    });
    return m;
}

TetraMesh4 parse_tetra4_payload(const json& j, const std::string& path, const std::filesystem::path& base) {
    require_object(j, path);
    int sources = 0;
    for (const char* k : {"primitive", "file", "extrude", "inline"}) sources += j.contains(k) ? 1 : 0;
    if (sources != 1) throw ParseError(path, "exactly one of primitive, file, extrude or inline is required");

    if (j.contains("primitive")) {
        check_keys(j, path, {"kind", "primitive", "size", "subdivision"});
        const std::string pp = child(path, "primitive");
        const std::string name = as_string(j["primitive"], pp);
        const auto kind = parse_primitive_kind(name);
        if (!kind) throw ValidationError(pp, "unknown primitive '" + name + "'");
        double size = 1.0;
        int subdivision = 0;
        opt(j, path, "size", [&](const json& v, const std::string& p) {
            size = as_number(v, p);
            positive(size, p);
        });
        opt(j, path, "subdivision", [&](const json& v, const std::string& p) {
            const auto s = as_index(v, p);
            if (s > 6) throw ValidationError(p, "subdivision must lie in [0, 6]");
            subdivision = static_cast<int>(s);
        });
        return build_mesh(path, [&] { return make_primitive(*kind, size, subdivision); });
    }
    if (j.contains("file")) {
        check_keys(j, path, {"kind", "file"});
        const std::string p = child(path, "file");
        const auto file = resolve(base, as_string(j["file"], p));
        return build_mesh(p, [&] { return load_tmesh4(file); });
    }
    if (j.contains("extrude")) {
        check_keys(j, path, {"kind", "extrude", "depth"});
        const TriMesh3 surface = parse_tri3_payload(j["extrude"], child(path, "extrude"), base, {});
        double depth = 1.0;
        opt(j, path, "depth", [&](const json& v, const std::string& p) {
            depth = as_number(v, p);
            positive(depth, p);
        });
        return build_mesh(path, [&] { return extrude_lift(surface, depth); });
    }
    check_keys(j, path, {"kind", "inline"});
    const std::string p = child(path, "inline");
    const json& in = j["inline"];
    check_keys(in, p, {"vertices", "tetrahedra", "colors"});
    const json& verts = required(in, p, "vertices");
    const json& tets = required(in, p, "tetrahedra");
    if (!verts.is_array()) throw ParseError(child(p, "vertices"), "expected an array");
    if (!tets.is_array()) throw ParseError(child(p, "tetrahedra"), "expected an array");
    std::vector<Vec4> vs;
    std::vector<Tetrahedron> ts;
    std::vector<Rgba> colors;
    for (std::size_t i = 0; i < verts.size(); ++i) vs.push_back(as_vec4(verts[i], child(child(p, "vertices"), i)));
    for (std::size_t i = 0; i < tets.size(); ++i) {
        const std::string tp = child(child(p, "tetrahedra"), i);
        if (!tets[i].is_array() || tets[i].size() != 4) throw ParseError(tp, "expected four indices");
        ts.push_back({as_index(tets[i][0], tp), as_index(tets[i][1], tp), as_index(tets[i][2], tp),
                      as_index(tets[i][3], tp)});
    }
    opt(in, p, "colors", [&](const json& v, const std::string& cp) { colors = parse_colors(v, cp, vs.size()); });
    return build_mesh(p, [&] { return TetraMesh4(std::move(vs), std::move(ts), std::move(colors)); });
}

Collider4 parse_collider(const json& j, const std::string& path) {
    check_keys(j, path, {"hypersphere", "hyperbox", "halfspace"});
    if (j.size() != 1) throw ParseError(path, "expected exactly one collider shape");
    if (j.contains("hypersphere")) {
        const std::string p = child(path, "hypersphere");
        check_keys(j["hypersphere"], p, {"radius"});
        const double r = as_number(required(j["hypersphere"], p, "radius"), child(p, "radius"));
        positive(r, child(p, "radius"));
        return Collider4::hypersphere(r);
    }
    if (j.contains("hyperbox")) {
        const std::string p = child(path, "hyperbox");
        check_keys(j["hyperbox"], p, {"half_extents"});
        const Vec4 e = as_vec4(required(j["hyperbox"], p, "half_extents"), child(p, "half_extents"));
        for (std::size_t i = 0; i < 4; ++i) positive(e[i], child(p, "half_extents"));
        return Collider4::hyperbox(e);
    }
    const std::string p = child(path, "halfspace");
    check_keys(j["halfspace"], p, {"normal", "offset"});
    const Vec4 n = as_vec4(required(j["halfspace"], p, "normal"), child(p, "normal"));
    double offset = 0.0;
    opt(j["halfspace"], p, "offset", [&](const json& v, const std::string& op) { offset = as_number(v, op); });
    if (!(norm(n) > 0.0)) throw ValidationError(child(p, "normal"), "normal must be nonzero");
    return Collider4::halfspace(n, offset);
}

BodySpec parse_body(const json& j, const std::string& path) {
    check_keys(j, path, {"mass", "collider", "restitution", "kinematic", "sensor", "gravity", "velocity",
                         "angular_velocity", "spin_on_hit"});
    BodySpec b;
    b.collider = parse_collider(required(j, path, "collider"), child(path, "collider"));
    opt(j, path, "mass", [&](const json& v, const std::string& p) {
        b.mass = as_number(v, p);
        positive(b.mass, p);
    });
    opt(j, path, "restitution", [&](const json& v, const std::string& p) {
        b.restitution = as_number(v, p);
        if (!(b.restitution >= 0.0 && b.restitution <= 1.0)) throw ValidationError(p, "must lie in [0, 1]");
    });
    opt(j, path, "kinematic", [&](const json& v, const std::string& p) { b.kinematic = as_bool(v, p); });
    opt(j, path, "sensor", [&](const json& v, const std::string& p) { b.sensor = as_bool(v, p); });
    opt(j, path, "gravity", [&](const json& v, const std::string& p) { b.gravity = as_bool(v, p); });
    opt(j, path, "velocity", [&](const json& v, const std::string& p) { b.velocity = as_vec4(v, p); });
    opt(j, path, "angular_velocity", [&](const json& v, const std::string& p) { b.angular_velocity = as_angles(v, p); });
    opt(j, path, "spin_on_hit", [&](const json& v, const std::string& p) { b.spin_on_hit = as_angles(v, p); });
    return b;
}

AnimationTrack parse_animation(const json& j, const std::string& path, GeometryKind kind) {
    check_keys(j, path, {"loop", "keyframes"});
    AnimationTrack track;
    opt(j, path, "loop", [&](const json& v, const std::string& p) { track.loop = as_bool(v, p); });
    const std::string kp = child(path, "keyframes");
    const json& keys = required(j, path, "keyframes");
    if (!keys.is_array() || keys.empty()) throw ParseError(kp, "expected a non-empty array");
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string p = child(kp, i);
        check_keys(keys[i], p, {"time", "translation", "rotation", "scale"});
        Keyframe k;
        k.time = as_number(required(keys[i], p, "time"), child(p, "time"));
        json pose_part = keys[i];
        pose_part.erase("time");
        k.pose = parse_pose(pose_part, p, kind == GeometryKind::tri3);
        if (kind == GeometryKind::tri3) validate_tri3_pose(k.pose, p);
        if (!track.keys.empty() && !(k.time > track.keys.back().time)) {
            throw ValidationError(child(p, "time"), "keyframe times must increase strictly");
        }
        if (k.time < 0.0) throw ValidationError(child(p, "time"), "keyframe times must be non-negative");
        track.keys.push_back(k);
    }
    return track;
}

std::vector<Behavior> parse_behaviors(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array");
    std::vector<Behavior> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = child(path, i);
        check_keys(j[i], p, {"kind", "radius", "speed", "amount", "cooldown"});
        Behavior b;
        const std::string kind = as_string(required(j[i], p, "kind"), child(p, "kind"));
        if (kind == "approach") {
            b.kind = BehaviorKind::approach;
        } else if (kind == "flee_w") {
            b.kind = BehaviorKind::flee_w;
        } else if (kind == "attack") {
            b.kind = BehaviorKind::attack;
        } else {
            throw ValidationError(child(p, "kind"), "unknown behavior '" + kind + "'");
        }
        opt(j[i], p, "radius", [&](const json& v, const std::string& q) {
            b.radius = as_number(v, q);
            positive(b.radius, q);
        });
        opt(j[i], p, "speed", [&](const json& v, const std::string& q) {
            b.speed = as_number(v, q);
            non_negative(b.speed, q);
        });
        opt(j[i], p, "amount", [&](const json& v, const std::string& q) {
            b.amount = as_number(v, q);
            non_negative(b.amount, q);
        });
        opt(j[i], p, "cooldown", [&](const json& v, const std::string& q) {
            b.cooldown = as_number(v, q);
            non_negative(b.cooldown, q);
        });
        out.push_back(b);
    }
    return out;
}

SceneNode parse_node(const json& j, const std::string& path, const std::filesystem::path& base) {
    check_keys(j, path,
               {"id", "name", "geometry", "transform", "material", "body", "animation", "tags", "behaviors"});
    SceneNode node;
    node.id = as_index(required(j, path, "id"), child(path, "id"));
    if (node.id == 0) throw ValidationError(child(path, "id"), "node id 0 is reserved for the player");
    node.name = "node" + std::to_string(node.id);
    opt(j, path, "name", [&](const json& v, const std::string& p) { node.name = as_string(v, p); });

    const std::string gp = child(path, "geometry");
    const json& g = required(j, path, "geometry");
    require_object(g, gp);
    const std::string kind = as_string(required(g, gp, "kind"), child(gp, "kind"));
    if (kind == "tri3") {
        node.kind = GeometryKind::tri3;
        node.tri3 = std::make_shared<const TriMesh3>(parse_tri3_payload(g, gp, base, {}));
    } else if (kind == "tetra4") {
        node.kind = GeometryKind::tetra4;
        node.tetra4 = std::make_shared<const TetraMesh4>(parse_tetra4_payload(g, gp, base));
    } else {
        throw ValidationError(child(gp, "kind"), "expected tri3 or tetra4");
    }

    opt(j, path, "transform", [&](const json& v, const std::string& p) {
        node.pose = parse_pose(v, p, node.kind == GeometryKind::tri3);
    });
    if (node.kind == GeometryKind::tri3) validate_tri3_pose(node.pose, child(path, "transform"));

    opt(j, path, "material", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"color", "wireframe"});
        opt(v, p, "color", [&](const json& c, const std::string& cp) { node.material.color = as_color(c, cp); });
        opt(v, p, "wireframe", [&](const json& w, const std::string& wp) { node.material.wireframe = as_bool(w, wp); });
    });
    opt(j, path, "body", [&](const json& v, const std::string& p) { node.body = parse_body(v, p); });
    opt(j, path, "animation", [&](const json& v, const std::string& p) {
        node.animation = parse_animation(v, p, node.kind);
    });
    opt(j, path, "tags", [&](const json& v, const std::string& p) {
        if (!v.is_array()) throw ParseError(p, "expected an array of strings");
        for (std::size_t i = 0; i < v.size(); ++i) node.tags.insert(as_string(v[i], child(p, i)));
    });
    opt(j, path, "behaviors", [&](const json& v, const std::string& p) { node.behaviors = parse_behaviors(v, p); });

    if (node.kind == GeometryKind::tri3 && !node.behaviors.empty()) {
        throw ValidationError(child(path, "behaviors"), "scripted behaviors apply to 4D nodes only");
    }
    if (node.has_tag("crystal") && !node.body) {
        throw ValidationError(child(path, "tags"), "crystals need a body to be collected");
    }
    return node;
}

void parse_energy(const json& j, const std::string& path, EnergyConfig& e) {
    check_keys(j, path, {"max", "initial", "move_w_cost", "frustum_cost", "manipulation_cost", "fire_cost",
                         "blast_cost", "wireframe_cost", "crystal_value"});
    bool initial_given = false;
    const auto field = [&](const char* key, double& out) {
        opt(j, path, key, [&](const json& v, const std::string& p) {
            out = as_number(v, p);
            non_negative(out, p);
        });
    };
    field("max", e.max);
    field("move_w_cost", e.move_w_cost);
    field("frustum_cost", e.frustum_cost);
    field("manipulation_cost", e.manipulation_cost);
    field("fire_cost", e.fire_cost);
    field("blast_cost", e.blast_cost);
    field("wireframe_cost", e.wireframe_cost);
    field("crystal_value", e.crystal_value);
    opt(j, path, "initial", [&](const json& v, const std::string& p) {
        e.initial = as_number(v, p);
        initial_given = true;
    });
    if (!initial_given) e.initial = e.max;
    if (!(e.initial >= 0.0 && e.initial <= e.max)) throw ValidationError(child(path, "initial"), "must lie in [0, max]");
}

void parse_camera(const json& j, const std::string& path, CameraConfig& c) {
    check_keys(j, path, {"focal", "near_w", "focus_distance", "orbit_speed", "transition_time", "eye_height"});
    const auto field = [&](const char* key, double& out, bool allow_zero) {
        opt(j, path, key, [&](const json& v, const std::string& p) {
            out = as_number(v, p);
            allow_zero ? non_negative(out, p) : positive(out, p);
        });
    };
    field("focal", c.focal, false);
    field("near_w", c.near_w, false);
    field("focus_distance", c.focus_distance, false);
    field("orbit_speed", c.orbit_speed, true);
    field("transition_time", c.transition_time, true);
    opt(j, path, "eye_height", [&](const json& v, const std::string& p) { c.eye_height = as_number(v, p); });
    if (!(c.near_w < c.focal)) throw ValidationError(child(path, "near_w"), "must be smaller than focal");
}

} // namespace

Scene load_scene(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    const std::string root;
    check_keys(doc, root,
               {"continuum_scene", "name", "gravity", "w_range", "player_spawn", "energy", "camera", "radar",
                "projectile", "player", "weapons", "nodes"});
    const json& version = required(doc, root, "continuum_scene");
    if (!version.is_number_integer() || version.get<int>() != kSceneFormatVersion) {
        throw ParseError("/continuum_scene", "unsupported scene format version");
    }

    Scene scene;
    opt(doc, root, "name", [&](const json& v, const std::string& p) { scene.name = as_string(v, p); });
    opt(doc, root, "gravity", [&](const json& v, const std::string& p) {
        scene.gravity = as_vec4(v, p);
        if (scene.gravity.w != 0.0) throw ValidationError(p, "gravity may not have a w component");
    });
    opt(doc, root, "w_range", [&](const json& v, const std::string& p) {
        const auto r = as_array<2>(v, p);
        if (!(r[0] < r[1])) throw ValidationError(p, "expected [lo, hi] with lo < hi");
        scene.w_lo = r[0];
        scene.w_hi = r[1];
    });
    opt(doc, root, "player_spawn", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"position", "yaw", "pitch"});
        opt(v, p, "position", [&](const json& x, const std::string& q) { scene.player_spawn.position = as_vec4(x, q); });
        opt(v, p, "yaw", [&](const json& x, const std::string& q) { scene.player_spawn.yaw = as_number(x, q); });
        opt(v, p, "pitch", [&](const json& x, const std::string& q) { scene.player_spawn.pitch = as_number(x, q); });
    });
    if (scene.player_spawn.position.w < scene.w_lo || scene.player_spawn.position.w > scene.w_hi) {
        throw ValidationError("/player_spawn/position", "spawn w lies outside w_range");
    }
    opt(doc, root, "energy", [&](const json& v, const std::string& p) { parse_energy(v, p, scene.energy); });
    opt(doc, root, "camera", [&](const json& v, const std::string& p) { parse_camera(v, p, scene.camera); });
    opt(doc, root, "radar", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"radius", "altitude_scale"});
        opt(v, p, "radius", [&](const json& x, const std::string& q) {
            scene.radar.radius = as_number(x, q);
            positive(scene.radar.radius, q);
        });
        opt(v, p, "altitude_scale", [&](const json& x, const std::string& q) {
            scene.radar.altitude_scale = as_number(x, q);
        });
    });
    opt(doc, root, "projectile", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"amplitude", "omega", "speed", "radius", "lifetime", "restitution", "subdivision"});
        auto& c = scene.projectile;
        opt(v, p, "amplitude", [&](const json& x, const std::string& q) {
            c.amplitude = as_number(x, q);
            non_negative(c.amplitude, q);
        });
        opt(v, p, "omega", [&](const json& x, const std::string& q) { c.omega = as_number(x, q); });
        opt(v, p, "speed", [&](const json& x, const std::string& q) {
            c.speed = as_number(x, q);
            positive(c.speed, q);
        });
        opt(v, p, "radius", [&](const json& x, const std::string& q) {
            c.radius = as_number(x, q);
            positive(c.radius, q);
        });
        opt(v, p, "lifetime", [&](const json& x, const std::string& q) {
            c.lifetime = as_number(x, q);
            positive(c.lifetime, q);
        });
        opt(v, p, "restitution", [&](const json& x, const std::string& q) {
            c.restitution = as_number(x, q);
            if (!(c.restitution >= 0.0 && c.restitution <= 1.0)) throw ValidationError(q, "must lie in [0, 1]");
        });
        opt(v, p, "subdivision", [&](const json& x, const std::string& q) {
            const auto s = as_index(x, q);
            if (s > 4) throw ValidationError(q, "must lie in [0, 4]");
            c.subdivision = static_cast<int>(s);
        });
    });
    opt(doc, root, "player", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"radius", "mass", "move_speed", "w_speed", "mouse_sensitivity"});
        auto& c = scene.player;
        const auto field = [&](const char* key, double& out) {
            opt(v, p, key, [&](const json& x, const std::string& q) {
                out = as_number(x, q);
                positive(out, q);
            });
        };
        field("radius", c.radius);
        field("mass", c.mass);
        field("move_speed", c.move_speed);
        field("w_speed", c.w_speed);
        field("mouse_sensitivity", c.mouse_sensitivity);
    });
    opt(doc, root, "weapons", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"blast_radius", "wireframe_radius"});
        opt(v, p, "blast_radius", [&](const json& x, const std::string& q) {
            scene.weapons.blast_radius = as_number(x, q);
            positive(scene.weapons.blast_radius, q);
        });
        opt(v, p, "wireframe_radius", [&](const json& x, const std::string& q) {
            scene.weapons.wireframe_radius = as_number(x, q);
            positive(scene.weapons.wireframe_radius, q);
        });
    });

    const json& nodes = required(doc, root, "nodes");
    if (!nodes.is_array()) throw ParseError("/nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = child("/nodes", i);
        SceneNode node = parse_node(nodes[i], p, base_dir);
        if (scene.find(node.id) != nullptr) {
            throw ValidationError(child(p, "id"), "duplicate node id " + std::to_string(node.id));
        }
        scene.nodes.push_back(std::move(node));
    }
    std::sort(scene.nodes.begin(), scene.nodes.end(), [](const SceneNode& a, const SceneNode& b) { return a.id < b.id; });
    return scene;
}

Scene load_scene_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), "cannot open scene file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str(), path.parent_path());
}

} // namespace continuum
