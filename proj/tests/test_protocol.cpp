#include "continuum/errors.hpp"
#include "continuum/protocol.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <bit>
#include <random>
#include <sstream>

using namespace continuum;
using nlohmann::json;
namespace ct = continuum::testing;

TEST(ProtocolMessages, HelloRoundTrip) {
    const ClientMessage m = decode_client_message(encode_hello());
    EXPECT_EQ(m.kind, ClientMessageKind::hello);
    EXPECT_EQ(m.version, kProtocolVersion);
    EXPECT_EQ(json::parse(encode_hello())["protocol"], 1);
}

TEST(ProtocolMessages, InputRoundTrip) {
    InputFrame in;
    in.tick = 17;
    in.keys = {"W", "E"};
    in.mouse_dx = 0.1 + 0.2; // not exactly representable in short decimal
    in.mouse_dy = -3.5;
    Action fire{ActionKind::fire};
    fire.projectile = ProjectileKind::straight;
    Action manip{ActionKind::manipulate};
    manip.node = 11;
    manip.rotation.xw = M_PI / 3;
    Action preview{ActionKind::preview};
    preview.node = 11;
    preview.candidates.resize(2);
    preview.candidates[1].zw = -0.25;
    in.actions = {fire, manip, preview, Action{ActionKind::toggle_projection}};

    const InputFrame out = decode_input(encode_input(in));
    EXPECT_EQ(out.tick, 17u);
    EXPECT_EQ(out.keys, in.keys);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(out.mouse_dx), std::bit_cast<std::uint64_t>(in.mouse_dx));
    EXPECT_EQ(out.mouse_dy, -3.5);
    ASSERT_EQ(out.actions.size(), 4u);
    EXPECT_EQ(out.actions[0].projectile, ProjectileKind::straight);
    EXPECT_EQ(out.actions[1].node, 11u);
    EXPECT_EQ(out.actions[1].rotation.xw, M_PI / 3);
    EXPECT_EQ(out.actions[2].candidates.size(), 2u);
    EXPECT_EQ(out.actions[2].candidates[1].zw, -0.25);
    EXPECT_EQ(out.actions[3].kind, ActionKind::toggle_projection);
}

TEST(ProtocolMessages, MalformedInputsCarryPaths) {
    const auto path_of = [](const std::string& text) {
        try {
            decode_client_message(text);
        } catch (const ParseError& e) {
            return e.path();
        }
        return std::string("no error");
    };
    EXPECT_EQ(path_of(R"({"type": "input", "keys": ["W", 3]})"), "/keys/1");
    EXPECT_EQ(path_of(R"({"type": "input", "mouse_dx": "left"})"), "/mouse_dx");
    EXPECT_EQ(path_of(R"({"type": "input", "actions": [{"kind": "dance"}]})"), "/actions/0/kind");
    EXPECT_EQ(path_of(R"({"type": "input", "actions": [{"kind": "manipulate"}]})"), "/actions/0/node");
    EXPECT_EQ(path_of(R"({"type": "input", "bogus": 1})"), "/bogus");
    EXPECT_EQ(path_of(R"({"type": "teleport"})"), "/type");
    EXPECT_EQ(path_of(R"({"type": "hello"})"), "/protocol");
    EXPECT_EQ(path_of("[1, 2"), "");
    EXPECT_EQ(path_of("42"), "");
}

TEST(ProtocolMessages, ConfigCarriesSceneFields) {
    Scene scene;
    scene.name = "demo";
    scene.energy.max = 80;
    const json j = json::parse(encode_config(scene));
    EXPECT_EQ(j["type"], "config");
    EXPECT_EQ(j["scene_name"], "demo");
    EXPECT_EQ(j["tick_rate"], kTickRate);
    EXPECT_EQ(j["energy_max"], 80.0);
}

TEST(ProtocolMessages, FrameOmitsUnchangedGeometry) {
    Frame f;
    f.tick = 3;
    f.energy = 12.5;
    auto mesh = std::make_shared<const TriMesh3>(TriMesh3{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {}});
    f.meshes.push_back({1, true, mesh, {}, true});
    f.meshes.push_back({2, false, mesh, {}, false});
    f.radar.push_back({1, 2.0, -1.0, 0.5});
    f.events.push_back({EventKind::pickup, 0, 4, 25.0, {}});
    const json j = json::parse(encode_frame(f));
    EXPECT_EQ(j["type"], "frame");
    EXPECT_EQ(j["tick"], 3);
    ASSERT_EQ(j["meshes"].size(), 2u);
    EXPECT_TRUE(j["meshes"][0].contains("mesh"));
    EXPECT_EQ(j["meshes"][0]["mesh"]["vertices"].size(), 9u);
    EXPECT_FALSE(j["meshes"][1].contains("mesh"));
    EXPECT_EQ(j["meshes"][1]["changed"], false);
    EXPECT_EQ(j["radar"][0]["altitude"], 0.5);
    EXPECT_EQ(j["events"][0]["kind"], "pickup");
}

TEST(ProtocolMessages, FloatsSurviveAsDecimalText) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        Frame f;
        f.energy = u(rng);
        f.time = u(rng) * 1e-9;
        const json j = json::parse(encode_frame(f));
        ASSERT_EQ(j["energy"].get<double>(), f.energy);
        ASSERT_EQ(j["time"].get<double>(), f.time);
    }
}

TEST(ProtocolMessages, EventLine) {
    const json j = json::parse(encode_event({EventKind::projectile_hit, 30, 2, 0.01, "hypersphere-halfspace"}, 99));
    EXPECT_EQ(j["kind"], "projectile-hit");
    EXPECT_EQ(j["tick"], 99);
    EXPECT_EQ(j["detail"], "hypersphere-halfspace");
}

TEST(ProtocolInputLog, RoundTripAndBlankLines) {
    std::vector<InputFrame> inputs(3);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i].tick = i + 1;
    inputs[1].keys = {"Q"};
    std::stringstream ss;
    write_input_log(ss, inputs);
    std::stringstream padded(ss.str() + "\n   \n");
    const auto back = read_input_log(padded);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[1].keys, std::vector<std::string>{"Q"});
    EXPECT_EQ(back[2].tick, 3u);
}

TEST(ProtocolInputLog, ErrorNamesTheLine) {
    std::stringstream ss(R"({"type": "input", "tick": 1})"
                         "\n"
                         R"({"type": "input", "tick": -2})"
                         "\n");
    try {
        read_input_log(ss);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "line 2/tick");
    }
}

TEST(ProtocolInputLog, DemoLogCoversFiveThousandTicks) {
    const auto inputs = load_input_log(ct::scenes_dir() / "mini_level.inputs.jsonl");
    ASSERT_EQ(inputs.size(), 5000u);
    for (std::size_t i = 0; i < inputs.size(); ++i) ASSERT_EQ(inputs[i].tick, i + 1);
}

TEST(ProtocolFraming, LengthPrefixSplitAcrossReads) {
    const std::string a = length_prefixed("hello");
    const std::string b = length_prefixed(std::string(70000, 'x'));
    EXPECT_EQ(a.substr(0, 4), std::string("\0\0\0\5", 4));
    const std::string stream = a + b + length_prefixed("");
    LengthPrefixDecoder d;
    std::vector<std::string> got;
    for (char c : stream) {
        d.feed(std::string_view(&c, 1));
        while (auto m = d.next()) got.push_back(*m);
    }
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(got[0], "hello");
    EXPECT_EQ(got[1].size(), 70000u);
    EXPECT_EQ(got[2], "");
}

TEST(ProtocolFraming, OversizeFrameRejected) {
    LengthPrefixDecoder d;
    d.feed(std::string("\xff\xff\xff\xff", 4));
    EXPECT_THROW(d.next(), ParseError);
}

TEST(ProtocolWebSocket, AcceptKeyFromRfcExample) {
    EXPECT_EQ(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(ProtocolWebSocket, HandshakeResponse) {
    const std::string request =
        "GET /session HTTP/1.1\r\nHost: localhost\r\nUpgrade: WebSocket\r\nConnection: Upgrade\r\n"
        "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\nEXTRA";
    std::size_t consumed = 0;
    EXPECT_FALSE(parse_http_request(request.substr(0, 40)).has_value());
    const auto req = parse_http_request(request, &consumed);
    ASSERT_TRUE(req.has_value());
    EXPECT_EQ(request.substr(consumed), "EXTRA");
    EXPECT_EQ(req->method, "GET");
    EXPECT_EQ(req->target, "/session");
    EXPECT_EQ(req->header("host"), "localhost");
    const std::string response = websocket_handshake_response(*req);
    EXPECT_EQ(response.rfind("HTTP/1.1 101", 0), 0u);
    EXPECT_NE(response.find("Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo=\r\n"), std::string::npos);
}

TEST(ProtocolWebSocket, NonUpgradeRequestRejected) {
    const auto req = parse_http_request("GET / HTTP/1.1\r\nHost: x\r\n\r\n");
    ASSERT_TRUE(req.has_value());
    EXPECT_THROW(websocket_handshake_response(*req), ParseError);
}

TEST(ProtocolWebSocket, MaskedFramesOfEverySizeClass) {
    for (std::size_t n : {0u, 5u, 125u, 126u, 65535u, 65536u, 200000u}) {
        std::string payload(n, '\0');
        for (std::size_t i = 0; i < n; ++i) payload[i] = static_cast<char>(i * 31);
        const std::string bytes = websocket_frame(WsOpcode::binary, payload, 0x12345678u);
        WebSocketDecoder d(true);
        d.feed(bytes.substr(0, bytes.size() / 2));
        EXPECT_FALSE(d.next().has_value());
        d.feed(bytes.substr(bytes.size() / 2));
        const auto m = d.next();
        ASSERT_TRUE(m.has_value()) << n;
        EXPECT_EQ(m->opcode, WsOpcode::binary);
        EXPECT_EQ(m->payload, payload);
    }
}

TEST(ProtocolWebSocket, FragmentedMessageWithInterleavedPing) {
    // text "Hel" (no FIN), ping, continuation "lo" (FIN); hand-built frames.
    const auto frame = [](std::uint8_t first, std::string_view payload) {
        std::string out;
        out.push_back(static_cast<char>(first));
        out.push_back(static_cast<char>(0x80 | payload.size()));
        out.append(4, '\0'); // zero mask
        out.append(payload);
        return out;
    };
    WebSocketDecoder d(true);
    d.feed(frame(0x01, "Hel") + frame(0x89, "p") + frame(0x80, "lo"));
    auto m = d.next();
    ASSERT_TRUE(m.has_value());
    EXPECT_EQ(m->opcode, WsOpcode::ping);
    m = d.next();
    ASSERT_TRUE(m.has_value());
    EXPECT_EQ(m->opcode, WsOpcode::text);
    EXPECT_EQ(m->payload, "Hello");
}

TEST(ProtocolWebSocket, ProtocolViolations) {
    WebSocketDecoder server(true);
    EXPECT_THROW(server.feed(websocket_frame(WsOpcode::text, "x")), ParseError); // unmasked
    WebSocketDecoder stray(true);
    EXPECT_THROW(stray.feed(websocket_frame(WsOpcode::continuation, "x", 1u)), ParseError);
    WebSocketDecoder reserved(false);
    EXPECT_THROW(reserved.feed(std::string("\xC1\x00", 2)), ParseError);
    // Clients accept unmasked server frames.
    WebSocketDecoder client(false);
    client.feed(websocket_frame(WsOpcode::text, "ok"));
    EXPECT_EQ(client.next()->payload, "ok");
}
