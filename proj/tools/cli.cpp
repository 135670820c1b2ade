#include "cli.hpp"

#include "continuum/errors.hpp"
#include "continuum/mesh_io.hpp"
#include "continuum/protocol.hpp"
#include "continuum/server.hpp"
#include "continuum/session.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace continuum::cli {

using nlohmann::json;

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, value);
    return buf;
}

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

PlaneAngles angles(const json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object of plane angles");
    PlaneAngles a;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string p = path + "/" + it.key();
        const double v = number(it.value(), p);
        if (it.key() == "xy") a.xy = v;
        else if (it.key() == "xz") a.xz = v;
        else if (it.key() == "yz") a.yz = v;
        else if (it.key() == "xw") a.xw = v;
        else if (it.key() == "yw") a.yw = v;
        else if (it.key() == "zw") a.zw = v;
        else throw ParseError(p, "unknown field");
    }
    return a;
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != N) throw ParseError(path, "expected " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], path + "/" + std::to_string(i));
    return out;
}

// Node meshes in world space, with per-vertex colors taken from the
// material when the mesh has none.
struct ColoredObject {
    std::string name;
    TriMesh3 mesh;
};

ColoredObject colored(const std::string& name, TriMesh3 mesh, const Material& material) {
    if (!mesh.has_colors()) mesh.colors.assign(mesh.vertices.size(), material.color);
    return {name, std::move(mesh)};
}

void write_frame(const std::filesystem::path& file, const std::vector<ColoredObject>& objects) {
    std::vector<ObjObject> refs;
    for (const auto& o : objects) refs.push_back({o.name, &o.mesh});
    std::ofstream out = open_out(file);
    write_obj(out, refs);
    if (!out) throw std::runtime_error("failed writing " + file.string());
}

std::string frame_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%05zu.obj", index);
    return buf;
}

std::map<std::uint64_t, InputFrame> index_inputs(const std::vector<InputFrame>& inputs) {
    std::map<std::uint64_t, InputFrame> by_tick;
    for (const InputFrame& in : inputs) {
        InputFrame& slot = by_tick[in.tick];
        slot.tick = in.tick;
        slot.keys.insert(slot.keys.end(), in.keys.begin(), in.keys.end());
        slot.mouse_dx += in.mouse_dx;
        slot.mouse_dy += in.mouse_dy;
        slot.actions.insert(slot.actions.end(), in.actions.begin(), in.actions.end());
    }
    return by_tick;
}

InputFrame input_for(const std::map<std::uint64_t, InputFrame>& by_tick, std::uint64_t tick) {
    auto it = by_tick.find(tick);
    if (it != by_tick.end()) return it->second;
    InputFrame empty;
    empty.tick = tick;
    return empty;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &pos);
        } catch (const std::exception&) {
            throw InvalidArgument("invalid count '" + item + "'");
        }
        if (pos != item.size() || v <= 0) throw InvalidArgument("counts must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw InvalidArgument("at least one count is required");
    return out;
}

} // namespace

std::vector<CameraKey> parse_camera_script(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("", "camera script must be a JSON array");
    std::vector<CameraKey> keys;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const json& j = doc[i];
        if (!j.is_object()) throw ParseError(path, "expected an object");
        CameraKey k;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string p = path + "/" + it.key();
            const json& v = it.value();
            if (it.key() == "time") {
                k.time = number(v, p);
            } else if (it.key() == "position") {
                const auto a = numbers<3>(v, p);
                k.position = {a[0], a[1], a[2]};
            } else if (it.key() == "yaw") {
                k.yaw = number(v, p);
            } else if (it.key() == "pitch") {
                k.pitch = number(v, p);
            } else if (it.key() == "w") {
                k.w = number(v, p);
            } else if (it.key() == "mode") {
                if (v == "cross_section") k.mode = ProjectionMode::cross_section;
                else if (v == "frustum") k.mode = ProjectionMode::frustum;
                else throw ParseError(p, "expected cross_section or frustum");
            } else if (it.key() == "cam4") {
                if (!v.is_object()) throw ParseError(p, "expected an object");
                Pose4 pose;
                for (auto c = v.begin(); c != v.end(); ++c) {
                    const std::string cp = p + "/" + c.key();
                    if (c.key() == "position") {
                        const auto a = numbers<4>(c.value(), cp);
                        pose.translation = {a[0], a[1], a[2], a[3]};
                    } else if (c.key() == "rotation") {
                        pose.rotation = rotation_from_plane_angles(angles(c.value(), cp));
                    } else {
                        throw ParseError(cp, "unknown field");
                    }
                }
                k.detached = pose;
            } else if (it.key() == "focal") {
                k.focal = number(v, p);
            } else if (it.key() == "near_w") {
                k.near_w = number(v, p);
            } else {
                throw ParseError(p, "unknown field");
            }
        }
        keys.push_back(k);
    }
    return keys;
}

CameraRig rig_for(const CameraKey& key) {
    CameraRig rig;
    rig.cam3.position = key.position;
    rig.cam3.orientation = Matrix3::from_yaw_pitch(key.yaw, key.pitch);
    rig.sync_w = key.w;
    rig.cam4.mode = key.mode;
    rig.cam4.focal = key.focal;
    rig.cam4.near_w = key.near_w;
    rig.cam4.validate();
    if (key.detached) {
        rig.sync = CameraSync::detached;
        rig.cam4.pose = *key.detached;
    } else {
        rig.resync();
    }
    return rig;
}

int cmd_render(const RenderOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Scene scene = load_scene_file(options.scene);
        std::filesystem::create_directories(options.out_dir);
        json frames = json::array();

        const auto emit = [&](std::size_t index, double time, const std::vector<ColoredObject>& objects) {
            const std::string name = frame_name(index);
            write_frame(options.out_dir / name, objects);
            std::size_t triangles = 0;
            for (const auto& o : objects) triangles += o.mesh.triangles.size();
            frames.push_back({{"file", name}, {"time", time}, {"objects", objects.size()}, {"triangles", triangles}});
        };

        std::string source;
        if (options.camera_script) {
            source = "camera_script";
            const auto keys = parse_camera_script(read_text(*options.camera_script));
            for (std::size_t i = 0; i < keys.size(); ++i) {
                const CameraRig rig = rig_for(keys[i]);
                std::vector<ColoredObject> objects;
                for (const SceneNode& node : scene.nodes) {
                    SceneNode posed = node;
                    if (node.animation) posed.pose = node.animation->sample(keys[i].time);
                    TriMesh3 mesh = render_node(posed, rig);
                    if (mesh.empty()) continue;
                    objects.push_back(colored(node.name, std::move(mesh), node.material));
                }
                emit(i, keys[i].time, objects);
            }
        } else {
            if (options.ticks < 0) throw InvalidArgument("ticks must be non-negative");
            source = "session";
            const auto inputs = options.inputs ? index_inputs(load_input_log(*options.inputs))
                                               : std::map<std::uint64_t, InputFrame>{};
            SessionState state = start_session(scene, options.seed);
            for (int t = 0; t < options.ticks; ++t) {
                const Frame frame = advance(state, input_for(inputs, state.tick + 1), kTickDt);
                std::vector<ColoredObject> objects;
                for (const FrameMesh& m : frame.meshes) {
                    const SceneNode* node = state.scene.find(m.node_id);
                    objects.push_back(colored(node ? node->name : "node" + std::to_string(m.node_id), *m.mesh, m.material));
                }
                emit(static_cast<std::size_t>(t), frame.time, objects);
            }
        }
        const json manifest{{"scene", scene.name},
                            {"source", source},
                            {"frame_count", frames.size()},
                            {"frame_format", "obj"},
                            {"vertex_colors", "v x y z r g b"},
                            {"frames", frames}};
        std::ofstream mf = open_out(options.out_dir / "manifest.json");
        mf << manifest.dump(2) << '\n';
        out << "rendered " << frames.size() << " frames to " << options.out_dir.string() << '\n';
        return kExitOk;
    });
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err, SimulateResult* result) {
    return guarded(err, [&] {
        const Scene scene = load_scene_file(options.scene);
        const auto log = options.inputs ? load_input_log(*options.inputs) : std::vector<InputFrame>{};
        const auto inputs = index_inputs(log);
        std::uint64_t ticks = 600;
        if (options.ticks) {
            if (*options.ticks < 0) throw InvalidArgument("ticks must be non-negative");
            ticks = static_cast<std::uint64_t>(*options.ticks);
        } else if (!inputs.empty()) {
            ticks = inputs.rbegin()->first;
        }

        std::ofstream csv;
        if (options.log) {
            csv = open_out(*options.log);
            csv << "tick,time,px,py,pz,pw,vx,vy,vz,yaw,pitch,energy,state_hash\n";
        }
        std::ofstream events;
        if (options.events) events = open_out(*options.events);

        SessionState state = start_session(scene, options.seed);
        for (std::uint64_t t = 0; t < ticks; ++t) {
            const Frame frame = advance(state, input_for(inputs, state.tick + 1), kTickDt);
            if (csv.is_open()) {
                const RigidBody4& p = state.player();
                const Vec4 x = p.pose.translation;
                const Vec4 v = p.linear_velocity;
                csv << state.tick << ',' << format_double(state.time);
                for (double d : {x.x, x.y, x.z, x.w, v.x, v.y, v.z, state.yaw, state.pitch, state.energy}) {
                    csv << ',' << format_double(d);
                }
                csv << ',' << hex64(state_hash(state)) << '\n';
            }
            if (events.is_open()) {
                for (const Event& e : frame.events) events << encode_event(e, frame.tick) << '\n';
            }
        }
        const std::uint64_t hash = state_hash(state);
        out << "ticks " << state.tick << '\n' << "state_hash " << hex64(hash) << '\n';
        if (result != nullptr) *result = {hash, state.tick};
        return kExitOk;
    });
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (options.reps < 1) throw InvalidArgument("--reps must be at least 1");
        std::vector<BenchRecord> all;
        std::vector<std::pair<BenchMethod, LinearFit>> fits;
        for (BenchMethod m : options.methods) {
            const auto records = run_bench(m, options.counts, options.reps);
            all.insert(all.end(), records.begin(), records.end());
            if (records.size() >= 2) fits.emplace_back(m, fit_records(records));
        }
        std::ofstream file;
        if (options.out) file = open_out(*options.out);
        std::ostream& csv = options.out ? static_cast<std::ostream&>(file) : out;
        write_bench_csv(csv, all);
        std::ostream& summary = options.out ? out : err;
        for (const auto& [m, fit] : fits) {
            summary << "fit " << to_string(m) << " slope_ms_per_tetra " << format_double(fit.slope) << " intercept_ms "
                    << format_double(fit.intercept) << " r2 " << format_double(fit.r_squared) << '\n';
        }
        return kExitOk;
    });
}

int cmd_validate(const std::filesystem::path& scene_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scene scene = load_scene_file(scene_path);
        start_session(scene);
        std::size_t tri3 = 0, tetra4 = 0, tets = 0;
        for (const SceneNode& n : scene.nodes) {
            if (n.is_4d()) {
                ++tetra4;
                tets += n.tetra4->tetra_count();
            } else {
                ++tri3;
            }
        }
        out << "ok " << scene.name << ": " << scene.nodes.size() << " nodes (" << tri3 << " tri3, " << tetra4
            << " tetra4, " << tets << " tetrahedra)\n";
        return kExitOk;
    });
}

int cmd_serve(const ServeOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ServerOptions so;
        so.host = options.host;
        so.port = options.port;
        so.lockstep = options.lockstep;
        so.record_inputs = options.record;
        so.seed = options.seed;
        SessionServer server(load_scene_file(options.scene), so);
        try {
            server.bind();
        } catch (const BindError& e) {
            err << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
        out << "listening on " << options.host << ':' << server.port() << std::endl;
        server.run();
        return kExitOk;
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"continuum: hybrid 3D/4D geometry and game engine"};
    app.require_subcommand(1);

    RenderOptions render;
    auto* r = app.add_subcommand("render", "Write projected frames as OBJ files");
    r->add_option("--scene", render.scene, "Scene file")->required();
    r->add_option("--out", render.out_dir, "Output directory")->required();
    r->add_option("--camera-script", render.camera_script, "JSON list of rig states, one per frame");
    r->add_option("--inputs", render.inputs, "Input log (JSON Lines) when no camera script is given");
    r->add_option("--ticks", render.ticks, "Ticks to render without a camera script");
    r->add_option("--seed", render.seed, "Session seed");

    SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "Run a headless session and print the final state hash");
    s->add_option("--scene", sim.scene, "Scene file")->required();
    s->add_option("--inputs", sim.inputs, "Input log (JSON Lines)");
    s->add_option("--ticks", sim.ticks, "Ticks to run (default: last input tick, or 600)");
    s->add_option("--seed", sim.seed, "Session seed");
    s->add_option("--out", sim.log, "CSV state log");
    s->add_option("--events", sim.events, "Event log (JSON Lines)");

    BenchOptions bench;
    std::string method = "both";
    std::string counts = "1000,5000,10000,50000,100000";
    auto* b = app.add_subcommand("bench", "Time projection passes over tesseract arrays");
    b->add_option("--method", method, "cross, frustum or both");
    b->add_option("--counts", counts, "Comma-separated tetrahedron counts");
    b->add_option("--reps", bench.reps, "Repetitions per count");
    b->add_option("--out", bench.out, "CSV output file (default stdout)");

    std::filesystem::path validate_scene;
    auto* v = app.add_subcommand("validate", "Check a scene file");
    v->add_option("--scene", validate_scene, "Scene file")->required();

    ServeOptions serve;
    auto* sv = app.add_subcommand("serve", "Run the session server for a viewer");
    sv->add_option("--scene", serve.scene, "Scene file")->required();
    sv->add_option("--port", serve.port, "TCP port");
    sv->add_option("--host", serve.host, "Listen address");
    sv->add_flag("--lockstep", serve.lockstep, "Advance one tick per input message");
    sv->add_option("--record", serve.record, "Record received inputs as an input log");
    sv->add_option("--seed", serve.seed, "Session seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    if (*r) return cmd_render(render, out, err);
    if (*s) return cmd_simulate(sim, out, err);
    if (*b) {
        return guarded(err, [&] {
            if (method == "both") {
                bench.methods = {BenchMethod::cross_section, BenchMethod::frustum};
            } else if (auto m = parse_bench_method(method)) {
                bench.methods = {*m};
            } else {
                throw InvalidArgument("--method must be cross, frustum or both");
            }
            bench.counts = parse_counts(counts);
            return cmd_bench(bench, out, err);
        });
    }
    if (*v) return cmd_validate(validate_scene, out, err);
    return cmd_serve(serve, out, err);
}

} // namespace continuum::cli
