#include "continuum/protocol.hpp"

#include "continuum/errors.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace continuum {

using nlohmann::json;

namespace {

json vec(Vec3 v) { return json::array({v.x, v.y, v.z}); }
json vec(Vec4 v) { return json::array({v.x, v.y, v.z, v.w}); }
json color(Rgba c) { return json::array({c.r, c.g, c.b, c.a}); }

json rotation(const Rotation4& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < 4; ++i) rows.push_back(vec(r.matrix().row(i)));
    return rows;
}

json mesh_json(const TriMesh3& mesh) {
    json vertices = json::array();
    for (const Vec3& v : mesh.vertices) {
        vertices.push_back(v.x);
        vertices.push_back(v.y);
        vertices.push_back(v.z);
    }
    json triangles = json::array();
    for (const Triangle& t : mesh.triangles) {
        for (Index i : t) triangles.push_back(i);
    }
    json out{{"vertices", std::move(vertices)}, {"triangles", std::move(triangles)}};
    if (mesh.has_colors()) {
        json colors = json::array();
        for (const Rgba& c : mesh.colors) {
            for (double x : {c.r, c.g, c.b, c.a}) colors.push_back(x);
        }
        out["colors"] = std::move(colors);
    }
    return out;
}

json angles_json(const PlaneAngles& a) {
    json out = json::object();
    if (a.xy != 0.0) out["xy"] = a.xy;
    if (a.xz != 0.0) out["xz"] = a.xz;
    if (a.yz != 0.0) out["yz"] = a.yz;
    if (a.xw != 0.0) out["xw"] = a.xw;
    if (a.yw != 0.0) out["yw"] = a.yw;
    if (a.zw != 0.0) out["zw"] = a.zw;
    return out;
}

json event_json(const Event& e) {
    json out{{"kind", to_string(e.kind)}, {"a", e.a}, {"b", e.b}, {"amount", e.amount}};
    if (!e.detail.empty()) out["detail"] = e.detail;
    return out;
}

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ParseError(child(path, it.key()), "unknown field");
        }
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

std::uint32_t node_id(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() || j.get<std::uint64_t>() > 0xffffffffULL) {
        throw ParseError(path, "expected a node id");
    }
    return static_cast<std::uint32_t>(j.get<std::uint64_t>());
}

PlaneAngles parse_angles(const json& j, const std::string& path) {
    check_keys(j, path, {"xy", "xz", "yz", "xw", "yw", "zw"});
    PlaneAngles a;
    const auto get = [&](const char* key, double& out) {
        if (j.contains(key)) out = number(j[key], child(path, key));
    };
    get("xy", a.xy);
    get("xz", a.xz);
    get("yz", a.yz);
    get("xw", a.xw);
    get("yw", a.yw);
    get("zw", a.zw);
    return a;
}

InputFrame parse_input(const json& j, const std::string& path) {
    check_keys(j, path, {"type", "tick", "keys", "mouse_dx", "mouse_dy", "actions"});
    InputFrame in;
    if (j.contains("tick")) {
        if (!j["tick"].is_number_unsigned()) throw ParseError(child(path, "tick"), "expected a tick number");
        in.tick = j["tick"].get<std::uint64_t>();
    }
    if (j.contains("keys")) {
        const json& keys = j["keys"];
        if (!keys.is_array()) throw ParseError(child(path, "keys"), "expected an array of strings");
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (!keys[i].is_string()) throw ParseError(child(child(path, "keys"), i), "expected a string");
            in.keys.push_back(keys[i].get<std::string>());
        }
    }
    if (j.contains("mouse_dx")) in.mouse_dx = number(j["mouse_dx"], child(path, "mouse_dx"));
    if (j.contains("mouse_dy")) in.mouse_dy = number(j["mouse_dy"], child(path, "mouse_dy"));
    if (j.contains("actions")) {
        const json& actions = j["actions"];
        const std::string ap = child(path, "actions");
        if (!actions.is_array()) throw ParseError(ap, "expected an array");
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const std::string p = child(ap, i);
            const json& a = actions[i];
            check_keys(a, p, {"kind", "node", "rotation", "candidates", "projectile"});
            if (!a.contains("kind") || !a["kind"].is_string()) throw ParseError(child(p, "kind"), "expected a string");
            const auto kind = parse_action_kind(a["kind"].get<std::string>());
            if (!kind) throw ParseError(child(p, "kind"), "unknown action '" + a["kind"].get<std::string>() + "'");
            Action action;
            action.kind = *kind;
            if (a.contains("projectile")) {
                const json& k = a["projectile"];
                if (k == "sinusoidal") action.projectile = ProjectileKind::sinusoidal;
                else if (k == "straight") action.projectile = ProjectileKind::straight;
                else throw ParseError(child(p, "projectile"), "expected sinusoidal or straight");
            }
            if (a.contains("node")) action.node = node_id(a["node"], child(p, "node"));
            if (a.contains("rotation")) action.rotation = parse_angles(a["rotation"], child(p, "rotation"));
            if (a.contains("candidates")) {
                const json& c = a["candidates"];
                const std::string cp = child(p, "candidates");
                if (!c.is_array()) throw ParseError(cp, "expected an array");
                for (std::size_t k = 0; k < c.size(); ++k) action.candidates.push_back(parse_angles(c[k], child(cp, k)));
            }
            if ((action.kind == ActionKind::manipulate || action.kind == ActionKind::preview) && !a.contains("node")) {
                throw ParseError(child(p, "node"), "missing required field");
            }
            in.actions.push_back(std::move(action));
        }
    }
    return in;
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

std::string encode_config(const Scene& scene) {
    json out{{"type", "config"},
             {"protocol", kProtocolVersion},
             {"tick_rate", kTickRate},
             {"dt", kTickDt},
             {"scene_name", scene.name},
             {"w_range", json::array({scene.w_lo, scene.w_hi})},
             {"energy_max", scene.energy.max},
             {"radar_radius", scene.radar.radius}};
    return out.dump();
}

std::string encode_frame(const Frame& frame) {
    json meshes = json::array();
    for (const FrameMesh& m : frame.meshes) {
        json entry{{"node", m.node_id},
                   {"is_4d", m.is_4d},
                   {"changed", m.changed},
                   {"color", color(m.material.color)},
                   {"wireframe", m.material.wireframe}};
        if (m.changed && m.mesh) entry["mesh"] = mesh_json(*m.mesh);
        meshes.push_back(std::move(entry));
    }
    json radar = json::array();
    for (const RadarPin& p : frame.radar) {
        radar.push_back({{"node", p.node_id}, {"x", p.x}, {"z", p.z}, {"altitude", p.altitude}});
    }
    json events = json::array();
    for (const Event& e : frame.events) events.push_back(event_json(e));
    json previews = json::array();
    for (const GhostSet& g : frame.previews) {
        json ghosts = json::array();
        for (const TriMesh3& m : g.ghosts) ghosts.push_back(mesh_json(m));
        previews.push_back({{"node", g.node_id}, {"ghosts", std::move(ghosts)}});
    }
    const CameraSummary& c = frame.camera;
    json camera{{"mode", to_string(c.mode)},
                {"sync", to_string(c.sync)},
                {"cam4_position", vec(c.cam4.translation)},
                {"cam4_rotation", rotation(c.cam4.rotation)},
                {"cam3_position", vec(c.cam3.position)},
                {"cam3_forward", vec(c.cam3.orientation.column(2))},
                {"cam3_up", vec(c.cam3.orientation.column(1))},
                {"player_w", c.player_w},
                {"transitioning", c.transitioning}};
    if (c.orbit) camera["orbit"] = {{"focus", vec(c.orbit->focus)}, {"angle", c.orbit->angle}, {"radius", c.orbit->radius}};

    json out{{"type", "frame"},
             {"tick", frame.tick},
             {"time", frame.time},
             {"energy", frame.energy},
             {"energy_gained", frame.energy_gained},
             {"energy_spent", frame.energy_spent},
             {"camera", std::move(camera)},
             {"meshes", std::move(meshes)},
             {"radar", std::move(radar)},
             {"events", std::move(events)},
             {"previews", std::move(previews)}};
    return out.dump();
}

std::string encode_error(std::string_view message) {
    return json{{"type", "error"}, {"message", std::string(message)}}.dump();
}

std::string encode_event(const Event& event, std::uint64_t tick) {
    json out = event_json(event);
    out["tick"] = tick;
    return out.dump();
}

std::string encode_input(const InputFrame& input) {
    json out{{"type", "input"}, {"tick", input.tick}};
    if (!input.keys.empty()) out["keys"] = input.keys;
    if (input.mouse_dx != 0.0) out["mouse_dx"] = input.mouse_dx;
    if (input.mouse_dy != 0.0) out["mouse_dy"] = input.mouse_dy;
    if (!input.actions.empty()) {
        json actions = json::array();
        for (const Action& a : input.actions) {
            json entry{{"kind", to_string(a.kind)}};
            if (a.kind == ActionKind::manipulate || a.kind == ActionKind::preview) entry["node"] = a.node;
            if (a.kind == ActionKind::fire && a.projectile == ProjectileKind::straight) entry["projectile"] = "straight";
            if (a.kind == ActionKind::manipulate) entry["rotation"] = angles_json(a.rotation);
            if (a.kind == ActionKind::preview) {
                json c = json::array();
                for (const PlaneAngles& p : a.candidates) c.push_back(angles_json(p));
                entry["candidates"] = std::move(c);
            }
            actions.push_back(std::move(entry));
        }
        out["actions"] = std::move(actions);
    }
    return out.dump();
}

std::string encode_hello(int version) { return json{{"type", "hello"}, {"protocol", version}}.dump(); }

ClientMessage decode_client_message(std::string_view text) {
    const json j = parse_json(text);
    if (!j.is_object()) throw ParseError("", "expected an object");
    if (!j.contains("type") || !j["type"].is_string()) throw ParseError("/type", "expected a message type");
    const std::string type = j["type"].get<std::string>();
    ClientMessage msg;
    if (type == "hello") {
        check_keys(j, "", {"type", "protocol", "client"});
        msg.kind = ClientMessageKind::hello;
        if (!j.contains("protocol") || !j["protocol"].is_number_integer()) {
            throw ParseError("/protocol", "expected a protocol version");
        }
        msg.version = j["protocol"].get<int>();
        return msg;
    }
    if (type == "input") {
        msg.kind = ClientMessageKind::input;
        msg.input = parse_input(j, "");
        return msg;
    }
    throw ParseError("/type", "unknown message type '" + type + "'");
}

InputFrame decode_input(std::string_view text) {
    const ClientMessage msg = decode_client_message(text);
    if (msg.kind != ClientMessageKind::input) throw ParseError("/type", "expected an input message");
    return msg.input;
}

std::vector<InputFrame> read_input_log(std::istream& in) {
    std::vector<InputFrame> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(decode_input(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(number) + e.path(), e.what());
        }
    }
    return out;
}

std::vector<InputFrame> load_input_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open input log");
    return read_input_log(in);
}

void write_input_log(std::ostream& out, const std::vector<InputFrame>& inputs) {
    for (const InputFrame& in : inputs) out << encode_input(in) << '\n';
}

std::string length_prefixed(std::string_view payload) {
    if (payload.size() > kMaxMessageBytes) throw InvalidArgument("message too large");
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(4 + payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out.append(payload);
    return out;
}

void LengthPrefixDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<std::string> LengthPrefixDecoder::next() {
    if (buffer_.size() < 4) return std::nullopt;
    const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (n > kMaxMessageBytes) throw ParseError("", "frame exceeds the maximum message size");
    if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    std::string payload = buffer_.substr(4, n);
    buffer_.erase(0, 4 + static_cast<std::size_t>(n));
    return payload;
}

std::string websocket_accept_key(std::string_view client_key) {
    static constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
    std::string input(client_key);
    input.append(kGuid);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
        throw InvalidState("SHA-1 digest failed");
    }
    std::string out(4 * ((len + 2) / 3), '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), digest, static_cast<int>(len));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::string websocket_frame(WsOpcode opcode, std::string_view payload, std::optional<std::uint32_t> mask) {
    std::string out;
    out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode)));
    const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
    const std::uint64_t n = payload.size();
    if (n < 126) {
        out.push_back(static_cast<char>(mask_bit | n));
    } else if (n <= 0xffff) {
        out.push_back(static_cast<char>(mask_bit | 126));
        out.push_back(static_cast<char>((n >> 8) & 0xff));
        out.push_back(static_cast<char>(n & 0xff));
    } else {
        out.push_back(static_cast<char>(mask_bit | 127));
        for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
    }
    if (!mask) {
        out.append(payload);
        return out;
    }
    const std::array<char, 4> key{static_cast<char>((*mask >> 24) & 0xff), static_cast<char>((*mask >> 16) & 0xff),
                                  static_cast<char>((*mask >> 8) & 0xff), static_cast<char>(*mask & 0xff)};
    out.append(key.begin(), key.end());
    for (std::size_t i = 0; i < payload.size(); ++i) out.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
    return out;
}

void WebSocketDecoder::feed(std::string_view bytes) {
    buffer_.append(bytes);
    parse();
}

std::optional<WsMessage> WebSocketDecoder::next() {
    if (ready_.empty()) return std::nullopt;
    WsMessage m = std::move(ready_.front());
    ready_.pop_front();
    return m;
}

void WebSocketDecoder::parse() {
    for (;;) {
        if (buffer_.size() < 2) return;
        const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer_[i]); };
        const bool fin = (byte(0) & 0x80) != 0;
        if ((byte(0) & 0x70) != 0) throw ParseError("", "reserved WebSocket bits set");
        const auto opcode = static_cast<WsOpcode>(byte(0) & 0x0f);
        const bool masked = (byte(1) & 0x80) != 0;
        std::uint64_t len = byte(1) & 0x7f;
        std::size_t pos = 2;
        if (len == 126) {
            if (buffer_.size() < 4) return;
            len = (static_cast<std::uint64_t>(byte(2)) << 8) | byte(3);
            pos = 4;
        } else if (len == 127) {
            if (buffer_.size() < 10) return;
            len = 0;
            for (std::size_t i = 0; i < 8; ++i) len = (len << 8) | byte(2 + i);
            pos = 10;
        }
        if (len > kMaxMessageBytes) throw ParseError("", "WebSocket frame exceeds the maximum message size");
        if (require_mask_ && !masked) throw ParseError("", "client WebSocket frames must be masked");
        std::array<std::uint8_t, 4> key{};
        if (masked) {
            if (buffer_.size() < pos + 4) return;
            for (std::size_t i = 0; i < 4; ++i) key[i] = byte(pos + i);
            pos += 4;
        }
        if (buffer_.size() < pos + len) return;
        std::string payload = buffer_.substr(pos, static_cast<std::size_t>(len));
        if (masked) {
            for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
        }
        buffer_.erase(0, pos + static_cast<std::size_t>(len));

        const bool control = (static_cast<std::uint8_t>(opcode) & 0x08) != 0;
        if (control) {
            if (!fin || len > 125) throw ParseError("", "malformed WebSocket control frame");
            ready_.push_back({opcode, std::move(payload)});
            continue;
        }
        if (opcode == WsOpcode::continuation) {
            if (!partial_opcode_) throw ParseError("", "unexpected WebSocket continuation frame");
            partial_.append(payload);
        } else if (opcode == WsOpcode::text || opcode == WsOpcode::binary) {
            if (partial_opcode_) throw ParseError("", "interleaved WebSocket data frames");
            partial_opcode_ = opcode;
            partial_ = std::move(payload);
        } else {
            throw ParseError("", "unknown WebSocket opcode");
        }
        if (partial_.size() > kMaxMessageBytes) throw ParseError("", "WebSocket message exceeds the maximum size");
        if (fin) {
            ready_.push_back({*partial_opcode_, std::move(partial_)});
            partial_.clear();
            partial_opcode_.reset();
        }
    }
}

std::optional<std::string> HttpRequest::header(std::string_view name) const {
    for (const auto& [k, v] : headers) {
        if (k == name) return v;
    }
    return std::nullopt;
}

std::optional<HttpRequest> parse_http_request(std::string_view data, std::size_t* consumed) {
    const std::size_t end = data.find("\r\n\r\n");
    if (end == std::string_view::npos) {
        if (data.size() > 64 * 1024) throw ParseError("", "HTTP header block too large");
        return std::nullopt;
    }
    if (consumed != nullptr) *consumed = end + 4;
    HttpRequest req;
    std::string_view block = data.substr(0, end);
    std::size_t line_end = block.find("\r\n");
    const std::string_view request_line = block.substr(0, line_end);
    const std::size_t sp1 = request_line.find(' ');
    const std::size_t sp2 = request_line.find(' ', sp1 == std::string_view::npos ? sp1 : sp1 + 1);
    if (sp1 == std::string_view::npos || sp2 == std::string_view::npos) throw ParseError("", "malformed HTTP request line");
    req.method = std::string(request_line.substr(0, sp1));
    req.target = std::string(request_line.substr(sp1 + 1, sp2 - sp1 - 1));
    while (line_end != std::string_view::npos) {
        const std::size_t start = line_end + 2;
        line_end = block.find("\r\n", start);
        const std::string_view line = block.substr(start, line_end == std::string_view::npos ? block.size() - start : line_end - start);
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string name(line.substr(0, colon));
        for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::string_view value = line.substr(colon + 1);
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.remove_prefix(1);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.remove_suffix(1);
        req.headers.emplace_back(std::move(name), std::string(value));
    }
    return req;
}

std::string websocket_handshake_response(const HttpRequest& request) {
    const auto key = request.header("sec-websocket-key");
    const auto upgrade = request.header("upgrade");
    std::string up = upgrade.value_or("");
    for (char& c : up) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (request.method != "GET" || !key || up != "websocket") {
        throw ParseError("", "not a WebSocket upgrade request");
    }
    return "HTTP/1.1 101 Switching Protocols\r\n"
           "Upgrade: websocket\r\n"
           "Connection: Upgrade\r\n"
           "Sec-WebSocket-Accept: " +
           websocket_accept_key(*key) + "\r\n\r\n";
}

} // namespace continuum
